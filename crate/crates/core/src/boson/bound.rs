use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::occupation::{compress, compress_diagonal, OccupationBasis, OCCUPATION_DENSE_LIMIT};
use crate::error::{Error, Result};
use crate::exchangeable::{BoundResult, Certificate, Diagnostics, Method};
use crate::multiindex::{compositions, num_compositions};
use crate::polynomial::SimplexPolynomial;
use crate::solvers::{jacobi_eigen, Tolerances};

/// Basis dimension up to which the compressed operator is diagonalized with
/// Jacobi. Above it the operator is read off its diagonal directly.
pub const EIGEN_DENSE_LIMIT: usize = OCCUPATION_DENSE_LIMIT;

const GRID_POINTS: usize = 100_000;
const STARTS: usize = 64;
const START_SEED: u64 = 0x5eed;
const MAX_DESCENT_STEPS: usize = 10_000;

/// [`quantum_bound_with`] under default tolerances.
pub fn quantum_bound(g: &SimplexPolynomial, s: usize) -> Result<BoundResult> {
    quantum_bound_with(g, s, &Tolerances::default())
}

/// Ground-state energy of the lifted observable restricted to the
/// symmetric subspace.
pub fn quantum_bound_with(g: &SimplexPolynomial, s: usize, tol: &Tolerances) -> Result<BoundResult> {
    if s < g.degree() {
        return Err(Error::domain(format!("s = {s} is below the polynomial degree {}", g.degree())));
    }
    let obs = g.homogenize(s)?.to_diagonal_observable();
    let basis = OccupationBasis::new(g.d(), s)?;
    let dim = basis.dim();

    if dim <= EIGEN_DENSE_LIMIT {
        let a = compress(&obs)?;
        let eig = jacobi_eigen(&a, tol)?;
        let (value, v) = eig.min_eigenpair();
        let psi = nalgebra::DVector::from_column_slice(&v);
        let residual = (a.as_matrix() * &psi - psi.scale(value)).norm();
        return Ok(BoundResult {
            value,
            method: Method::Boson,
            s,
            certificate: Certificate::ground_state(basis.states(), &v),
            diagnostics: Diagnostics { iterations: eig.sweeps, residual, size: dim },
        });
    }

    // The compressed operator is diagonal: its spectrum is its diagonal.
    let diag = compress_diagonal(&obs);
    let (k, &value) =
        diag.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0))).expect("non-empty basis");
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    v[k] = Complex64::new(1.0, 0.0);
    Ok(BoundResult {
        value,
        method: Method::Boson,
        s,
        certificate: Certificate::ground_state(basis.states(), &v),
        diagnostics: Diagnostics { iterations: 0, residual: 0.0, size: dim },
    })
}

/// Minimum of a polynomial over the probability simplex with its location.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexMinimum {
    pub value: f64,
    pub point: Vec<f64>,
}

/// `min g(theta)` over the simplex by multistart projected gradient descent,
/// checked against a uniform grid of about 1e5 points.
pub fn v_infinity(g: &SimplexPolynomial) -> Result<SimplexMinimum> {
    let d = g.d();
    if d == 1 {
        return Ok(SimplexMinimum { value: g.evaluate(&[1.0])?, point: vec![1.0] });
    }

    let mut best: Option<SimplexMinimum> = None;
    for start in starting_points(d) {
        let found = descend(g, start)?;
        if best.as_ref().is_none_or(|b| found.value < b.value) {
            best = Some(found);
        }
    }
    let best = best.expect("at least one start");

    let grid = grid_minimum(g)?;
    if best.value > grid.value + 1e-6 {
        return Err(Error::solver(format!(
            "projected gradient reached {} but the grid has {}",
            best.value, grid.value
        )));
    }
    Ok(best)
}

fn starting_points(d: usize) -> Vec<Vec<f64>> {
    let mut starts = Vec::new();
    for i in 0..d {
        let mut x = vec![0.0; d];
        x[i] = 1.0;
        starts.push(x);
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut x = vec![0.0; d];
            x[i] = 0.5;
            x[j] = 0.5;
            starts.push(x);
        }
    }
    starts.push(vec![1.0 / d as f64; d]);
    starts.truncate(STARTS);

    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    while starts.len() < STARTS {
        // Uniform on the simplex: normalized exponentials.
        let e: Vec<f64> = (0..d).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = e.iter().sum();
        starts.push(e.into_iter().map(|x| x / total).collect());
    }
    starts
}

/// Euclidean projection onto `{x >= 0, sum x = 1}` by sorting.
fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumulative += uj;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if uj - candidate > 0.0 {
            tau = candidate;
        }
    }
    y.iter().map(|&v| (v - tau).max(0.0)).collect()
}

/// Projected gradient with backtracking on the sufficient-decrease condition.
fn descend(g: &SimplexPolynomial, start: Vec<f64>) -> Result<SimplexMinimum> {
    let mut x = project_simplex(&start);
    let mut fx = g.evaluate(&x)?;
    let mut step = 1.0;
    for _ in 0..MAX_DESCENT_STEPS {
        let grad = g.gradient(&x)?;
        let mut moved = false;
        while step > 1e-16 {
            let trial: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - step * gi).collect();
            let next = project_simplex(&trial);
            let diff: Vec<f64> = next.iter().zip(&x).map(|(a, b)| a - b).collect();
            let dist2: f64 = diff.iter().map(|v| v * v).sum();
            if dist2 < 1e-28 {
                break;
            }
            let fnext = g.evaluate(&next)?;
            let model = fx + grad.iter().zip(&diff).map(|(a, b)| a * b).sum::<f64>() + dist2 / (2.0 * step);
            if fnext <= model {
                moved = fnext < fx;
                x = next;
                fx = fnext;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
        step = (step * 2.0).min(1e6);
    }
    Ok(SimplexMinimum { value: fx, point: x })
}

/// Minimum over the points `n / k` with `n` in `compositions(k, d)`, where
/// `k` is the finest resolution giving at most [`GRID_POINTS`] points.
fn grid_minimum(g: &SimplexPolynomial) -> Result<SimplexMinimum> {
    let d = g.d();
    let mut k = 1;
    while num_compositions(k + 1, d).is_ok_and(|c| c <= GRID_POINTS) {
        k += 1;
    }
    let mut best = SimplexMinimum { value: f64::INFINITY, point: Vec::new() };
    let mut x = vec![0.0; d];
    for n in compositions(k, d)? {
        for (xi, &ni) in x.iter_mut().zip(n.counts()) {
            *xi = ni as f64 / k as f64;
        }
        let value = g.evaluate(&x)?;
        if value < best.value {
            best = SimplexMinimum { value, point: x.clone() };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchangeable::oracle_bound;
    use crate::multiindex::CountVector;

    fn cv(c: &[usize]) -> CountVector {
        CountVector::new(c.to_vec()).unwrap()
    }

    fn dice_witness() -> SimplexPolynomial {
        SimplexPolynomial::from_terms(
            6,
            [(cv(&[2, 0, 0, 0, 0, 0]), 1.0), (cv(&[1, 1, 0, 0, 0, 0]), -1.0), (cv(&[0, 2, 0, 0, 0, 0]), 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_simplex(&[0.2, 0.3, 0.5]), vec![0.2, 0.3, 0.5]);
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = project_simplex(&[0.0, 0.0, 0.0]);
        assert!(p.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
        let q = project_simplex(&[-1.0, 0.5, 0.9]);
        assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(q[0], 0.0);
    }

    #[test]
    fn ground_state_matches_urn_oracle() {
        let g = dice_witness();
        for s in 2..=4 {
            let q = quantum_bound(&g, s).unwrap();
            let o = oracle_bound(&g, s).unwrap();
            assert!((q.value - o.value).abs() < 1e-12, "s = {s}");
            assert!((q.value + 1.0 / (s * (s - 1)) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn large_basis_uses_diagonal_path() {
        let g = dice_witness();
        let q = quantum_bound(&g, 12).unwrap();
        assert_eq!(q.diagnostics.size, 6188);
        assert!((q.value + 1.0 / 132.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_minimum_of_witness_is_zero() {
        let m = v_infinity(&dice_witness()).unwrap();
        assert!(m.value.abs() < 1e-12);
        assert!(m.value >= -1e-12);
    }

    #[test]
    fn simplex_minimum_interior() {
        // -theta_1 theta_2 on two outcomes: minimum -1/4 at the midpoint.
        let g = SimplexPolynomial::from_terms(2, [(cv(&[1, 1]), -1.0)]).unwrap();
        let m = v_infinity(&g).unwrap();
        assert!((m.value + 0.25).abs() < 1e-12);
        assert!((m.point[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn quantum_bound_below_simplex_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let g = SimplexPolynomial::random(3, 2, &mut rng).unwrap();
            let vinf = v_infinity(&g).unwrap().value;
            for s in 2..=5 {
                assert!(quantum_bound(&g, s).unwrap().value <= vinf + 1e-9);
            }
        }
    }
}
