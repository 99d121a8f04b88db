use num_complex::Complex64;

use super::{CMatrix, HermitianMatrix};
use crate::error::{Error, Result};
use crate::multiindex::{next_permutation, sequence_at, tensor_dim, tensor_index};

/// Largest tensor-space dimension `d^s` built densely.
pub const DENSE_LIMIT: usize = 4096;

/// Cap on `s! * d^s` work for the explicit permutation average.
const SYMMETRIZER_WORK_LIMIT: usize = 50_000_000;

pub(crate) fn checked_tensor_dim(s: usize, d: usize) -> Result<usize> {
    match tensor_dim(s, d) {
        Some(dim) if dim <= DENSE_LIMIT => Ok(dim),
        Some(dim) => Err(Error::Capacity { what: "dense tensor space", requested: dim, limit: DENSE_LIMIT }),
        None => Err(Error::Capacity { what: "dense tensor space", requested: usize::MAX, limit: DENSE_LIMIT }),
    }
}

/// Every permutation of `0..s`, in lexicographic order.
pub fn all_permutations(s: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..s).collect();
    let mut out = vec![current.clone()];
    while next_permutation(&mut current) {
        out.push(current.clone());
    }
    out
}

/// Applies `perm` to the positions of `seq`: the outcome at position `i`
/// moves to position `perm[i]`.
fn permute_positions(perm: &[usize], seq: &[usize]) -> Vec<usize> {
    let mut out = vec![0; seq.len()];
    for (i, &t) in seq.iter().enumerate() {
        out[perm[i]] = t;
    }
    out
}

fn check_permutation(perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
            return Err(Error::domain(format!("{perm:?} is not a permutation of 0..{}", perm.len())));
        }
    }
    Ok(())
}

/// The operator relabelling tensor factors, `P e_seq = e_{perm . seq}`.
/// Composition follows `P_a P_b = P_{a o b}` with `(a o b)(i) = a(b(i))`.
pub fn permutation_matrix(perm: &[usize], d: usize) -> Result<CMatrix> {
    check_permutation(perm)?;
    let s = perm.len();
    let dim = checked_tensor_dim(s, d)?;
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let seq = sequence_at(col, s, d);
        let row = tensor_index(&permute_positions(perm, &seq), d);
        m[(row, col)] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}

/// `(1/s!) * sum over permutations of P_perm`, built by explicit averaging.
pub fn symmetrizer(s: usize, d: usize) -> Result<HermitianMatrix> {
    let dim = checked_tensor_dim(s, d)?;
    let perms = all_permutations(s);
    let work = perms.len().saturating_mul(dim);
    if work > SYMMETRIZER_WORK_LIMIT {
        return Err(Error::Capacity { what: "permutation average", requested: work, limit: SYMMETRIZER_WORK_LIMIT });
    }
    let mut counts = vec![0u32; dim * dim];
    for perm in &perms {
        for col in 0..dim {
            let seq = sequence_at(col, s, d);
            let row = tensor_index(&permute_positions(perm, &seq), d);
            counts[row * dim + col] += 1;
        }
    }
    let scale = 1.0 / perms.len() as f64;
    let m = CMatrix::from_fn(dim, dim, |i, j| Complex64::new(counts[i * dim + j] as f64 * scale, 0.0));
    HermitianMatrix::new(m, 0.0)
}

/// Largest change of `rho[a][b]` when the positions of sequence `a`, of
/// sequence `b`, or of both are permuted. Zero for operators supported on the
/// symmetric subspace.
pub fn index_symmetry_deviation(rho: &HermitianMatrix, d: usize) -> Result<f64> {
    let s = super::infer_power(rho.dim(), d)?;
    let dim = checked_tensor_dim(s, d)?;
    let perms = all_permutations(s);
    let work = perms.len().saturating_mul(dim).saturating_mul(dim);
    if work > SYMMETRIZER_WORK_LIMIT {
        return Err(Error::Capacity { what: "index symmetry scan", requested: work, limit: SYMMETRIZER_WORK_LIMIT });
    }
    let moved: Vec<Vec<usize>> = perms
        .iter()
        .map(|perm| (0..dim).map(|i| tensor_index(&permute_positions(perm, &sequence_at(i, s, d)), d)).collect())
        .collect();
    let m = rho.as_matrix();
    let mut worst = 0.0f64;
    for p in &moved {
        for a in 0..dim {
            for b in 0..dim {
                let base = m[(a, b)];
                worst = worst
                    .max((m[(p[a], b)] - base).norm())
                    .max((m[(a, p[b])] - base).norm())
                    .max((m[(p[a], p[b])] - base).norm());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn re(m: &CMatrix) -> Vec<f64> {
        let mut out = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.push(m[(i, j)].re);
            }
        }
        out
    }

    fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
        b.iter().map(|&i| a[i]).collect()
    }

    fn kron_power(x: &[Complex64], s: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(1.0, 0.0)];
        for _ in 0..s {
            out = out.iter().flat_map(|a| x.iter().map(move |b| a * b)).collect();
        }
        out
    }

    #[test]
    fn identity_and_swap() {
        assert_eq!(permutation_matrix(&[0, 1], 2).unwrap(), CMatrix::identity(4, 4));
        let swap = permutation_matrix(&[1, 0], 2).unwrap();
        assert_eq!(re(&swap), vec![1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.]);
        assert!(permutation_matrix(&[0, 0], 2).is_err());
    }

    #[test]
    fn permutation_matrices_compose() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let mut a: Vec<usize> = (0..3).collect();
            let mut b = a.clone();
            a.shuffle(&mut rng);
            b.shuffle(&mut rng);
            let lhs = permutation_matrix(&a, 2).unwrap() * permutation_matrix(&b, 2).unwrap();
            assert_eq!(lhs, permutation_matrix(&compose(&a, &b), 2).unwrap());
        }
    }

    #[test]
    fn symmetrizer_small_cases() {
        assert_eq!(symmetrizer(1, 3).unwrap(), HermitianMatrix::identity(3));
        let pi = symmetrizer(2, 2).unwrap();
        assert_eq!(re(pi.as_matrix()), vec![1., 0., 0., 0., 0., 0.5, 0.5, 0., 0., 0.5, 0.5, 0., 0., 0., 0., 1.]);
    }

    #[test]
    fn symmetrizer_fixes_product_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (s, d) = (3, 3);
        let pi = symmetrizer(s, d).unwrap();
        for _ in 0..20 {
            let mut x: Vec<Complex64> =
                (0..d).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            x.iter_mut().for_each(|z| *z /= norm);
            let psi = nalgebra::DVector::from_vec(kron_power(&x, s));
            let image = pi.as_matrix() * &psi;
            assert!((image - psi).norm() < 1e-12);
        }
    }

    #[test]
    fn capacity_errors() {
        assert!(matches!(symmetrizer(5, 6), Err(Error::Capacity { .. })));
        assert!(matches!(permutation_matrix(&[0, 1, 2, 3, 4], 6), Err(Error::Capacity { .. })));
        assert!(matches!(symmetrizer(11, 2), Err(Error::Capacity { .. })));
    }
}
