use num_complex::Complex64;

use super::Tolerances;
use crate::boson::{CMatrix, HermitianMatrix};
use crate::error::{Error, Result};

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
    pub sweeps: usize,
}

impl EigenDecomposition {
    pub fn min_eigenpair(&self) -> (f64, Vec<Complex64>) {
        (self.eigenvalues[0], self.eigenvector(0))
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k).iter().copied().collect()
    }

    /// `max_k |A v_k - lambda_k v_k|_2`.
    pub fn max_residual(&self, a: &HermitianMatrix) -> f64 {
        let q = &self.eigenvectors;
        let aq = a.as_matrix() * q;
        (0..self.eigenvalues.len())
            .map(|k| (aq.column(k) - q.column(k).scale(self.eigenvalues[k])).norm())
            .fold(0.0, f64::max)
    }

    /// `|A - Q diag(lambda) Q^H|_F`.
    pub fn reconstruction_error(&self, a: &HermitianMatrix) -> f64 {
        let q = &self.eigenvectors;
        let lambda = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)),
        ));
        (a.as_matrix() - q * lambda * q.adjoint()).norm()
    }
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Each rotation first removes the phase of `a_pq`, then applies the real
/// symmetric Jacobi rotation that annihilates it. Pairs are visited row by
/// row, so the result is deterministic.
pub fn jacobi_eigen(a: &HermitianMatrix, tol: &Tolerances) -> Result<EigenDecomposition> {
    let n = a.dim();
    let mut m = a.as_matrix().clone();
    let mut v = CMatrix::identity(n, n);
    let norm = a.frobenius_norm();
    let target = 1e-15 * norm;
    let negligible = 1e-18 * norm / (n.max(1) as f64);

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&m);
        if off <= target || off == 0.0 {
            break;
        }
        if sweeps >= tol.max_jacobi_sweeps {
            return Err(Error::solver(format!(
                "Jacobi did not converge in {} sweeps: off-diagonal norm {off:.3e}, |A|_F {norm:.3e}",
                tol.max_jacobi_sweeps
            )));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= negligible {
                    continue;
                }
                rotate(&mut m, &mut v, p, q, apq / mag, mag);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |row, k| v[(row, order[k])]);
    let decomposition = EigenDecomposition { eigenvalues, eigenvectors, sweeps };

    if sweeps == 0 {
        // Already diagonal: the eigenvectors are unit vectors and exact.
        return Ok(decomposition);
    }
    let residual = decomposition.max_residual(a);
    if residual > tol.eigen_residual * norm.max(f64::MIN_POSITIVE) && norm > 0.0 {
        return Err(Error::solver(format!(
            "eigenpair residual {residual:.3e} exceeds {:.1e} * |A|_F",
            tol.eigen_residual
        )));
    }
    Ok(decomposition)
}

/// Applies `J^H A J` and `V J` where `J` zeroes `a_pq` with unit phase `phase`.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, phase: Complex64, mag: f64) {
    let n = m.nrows();
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // J = diag(1, conj(phase)) * R(c, s)
    let conj_phase = phase.conj();

    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * c - akq * conj_phase * s;
        m[(k, q)] = akp * s + akq * conj_phase * c;
    }
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = apk * c - aqk * phase * s;
        m[(q, k)] = apk * s + aqk * phase * c;
    }
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * conj_phase * s;
        v[(k, q)] = vkp * s + vkq * conj_phase * c;
    }
}

fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}
