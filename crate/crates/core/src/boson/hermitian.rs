use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Dense complex matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    inner: CMatrix,
}

impl HermitianMatrix {
    /// Accepts `m` if it is square and `max |m - m^H| <= tolerance`; the
    /// stored matrix is the exact Hermitian part `(m + m^H) / 2`.
    pub fn new(m: CMatrix, tolerance: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::domain(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
        }
        let deviation = hermitian_deviation(&m);
        if deviation > tolerance {
            return Err(Error::domain(format!(
                "matrix is not Hermitian: max |A - A^H| = {deviation:.3e} exceeds {tolerance:e}"
            )));
        }
        let adjoint = m.adjoint();
        Ok(Self { inner: (m + adjoint).scale(0.5) })
    }

    pub fn identity(dim: usize) -> Self {
        Self { inner: CMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { inner: CMatrix::zeros(dim, dim) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut inner = CMatrix::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            inner[(i, i)] = Complex64::new(v, 0.0);
        }
        Self { inner }
    }

    /// Builds from a real symmetric row-major slice.
    pub fn from_real_rows(dim: usize, rows: &[f64], tolerance: f64) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::domain("row data does not match dimension"));
        }
        Self::new(CMatrix::from_fn(dim, dim, |i, j| Complex64::new(rows[i * dim + j], 0.0)), tolerance)
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> CMatrix {
        self.inner
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.inner[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest off-diagonal magnitude.
    pub fn max_off_diagonal(&self) -> f64 {
        let n = self.dim();
        let mut best = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    best = best.max(self.inner[(i, j)].norm());
                }
            }
        }
        best
    }

    pub fn is_diagonal(&self) -> bool {
        self.max_off_diagonal() == 0.0
    }

    /// `Re Tr(self * other)`; exact for Hermitian pairs.
    pub fn trace_product(&self, other: &HermitianMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::domain(format!(
                "trace of product needs equal dimensions, got {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.inner[(i, k)] * other.inner[(k, i)];
            }
        }
        Ok(acc.re)
    }

    /// `v^H A v` for a vector `v`.
    pub fn quadratic_form(&self, v: &[Complex64]) -> Result<f64> {
        if v.len() != self.dim() {
            return Err(Error::domain("vector length does not match matrix dimension"));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..v.len() {
            let row: Complex64 = (0..v.len()).map(|j| self.inner[(i, j)] * v[j]).sum();
            acc += v[i].conj() * row;
        }
        Ok(acc.re)
    }
}

/// `max |m_ij - conj(m_ji)|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows().min(m.ncols());
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}
