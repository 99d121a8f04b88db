//! The symmetric-subspace view of exchangeability.
//!
//! A degree-`s` polynomial on the simplex is a diagonal observable on the
//! `d^s`-dimensional tensor space of `s` distinguishable `d`-level systems.
//! Exchangeable quasi-expectations correspond to density matrices supported
//! on the permutation-symmetric (bosonic) subspace, whose orthonormal basis is
//! indexed by occupation numbers. Minimizing an observable over those
//! density matrices is a ground-state problem on the compressed operator.
//!
//! Dense tensor-space matrices ([`symmetrizer`], [`permutation_matrix`],
//! [`OccupationBasis::isometry`]) exist for verification at small sizes only.

mod bound;
mod dense;
mod hermitian;
mod occupation;

use std::collections::BTreeMap;

pub use bound::{quantum_bound, quantum_bound_with, v_infinity, SimplexMinimum, EIGEN_DENSE_LIMIT};
pub use dense::{all_permutations, index_symmetry_deviation, permutation_matrix, symmetrizer, DENSE_LIMIT};
pub use hermitian::{hermitian_deviation, CMatrix, HermitianMatrix};
pub use occupation::{
    compress, compress_diagonal, compress_hermitian, rho_from_exchangeable, witness_value, BosonDensityMatrix,
    DensityMatrixJson, OccupationBasis, Witness, OCCUPATION_DENSE_LIMIT,
};

use crate::error::{Error, Result};
use crate::multiindex::{compositions, orbit_size_f64, sequence_at, sequence_to_counts, tensor_dim, CountVector};
use crate::polynomial::SimplexPolynomial;

/// A diagonal operator on the `d^s` sequence basis that takes the same value
/// on every ordering of a multiset. Only the per-orbit values are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalObservable {
    d: usize,
    s: usize,
    values: BTreeMap<CountVector, f64>,
}

impl DiagonalObservable {
    pub fn from_values(d: usize, s: usize, mut values: BTreeMap<CountVector, f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("d must be at least 1"));
        }
        if let Some(n) = values.keys().find(|n| n.dim() != d || n.degree() != s) {
            return Err(Error::domain(format!("orbit {n} does not have d = {d} and degree {s}")));
        }
        values.retain(|_, v| *v != 0.0);
        Ok(Self { d, s, values })
    }

    /// The constant observable, the identity times `value`.
    pub fn constant(d: usize, s: usize, value: f64) -> Result<Self> {
        let values = compositions(s, d)?.into_iter().map(|n| (n, value)).collect();
        Self::from_values(d, s, values)
    }

    /// Reads a diagonal `d^s x d^s` matrix, checking it is constant on orbits.
    pub fn from_dense_diagonal(m: &HermitianMatrix, d: usize, tolerance: f64) -> Result<Self> {
        let s = infer_power(m.dim(), d)?;
        if m.max_off_diagonal() > tolerance {
            return Err(Error::domain("matrix has off-diagonal entries; use the dense witness path"));
        }
        let mut values: BTreeMap<CountVector, f64> = BTreeMap::new();
        for idx in 0..m.dim() {
            let seq = sequence_at(idx, s, d);
            let n = sequence_to_counts(&seq, d)?;
            let v = m.get(idx, idx).re;
            match values.get(&n) {
                Some(&prev) if (prev - v).abs() > tolerance => {
                    return Err(Error::domain(format!(
                        "diagonal is not permutation symmetric: entries for orbit {n} differ ({prev} vs {v})"
                    )));
                }
                Some(_) => {}
                None => {
                    values.insert(n, v);
                }
            }
        }
        Self::from_values(d, s, values)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn value(&self, n: &CountVector) -> f64 {
        self.values.get(n).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> impl Iterator<Item = (&CountVector, f64)> {
        self.values.iter().map(|(n, &v)| (n, v))
    }

    /// Diagonal entry for one ordered sequence.
    pub fn entry(&self, seq: &[usize]) -> Result<f64> {
        if seq.len() != self.s {
            return Err(Error::domain(format!("sequence has length {}, observable acts on {}", seq.len(), self.s)));
        }
        Ok(self.value(&sequence_to_counts(seq, self.d)?))
    }

    /// Diagonal entry at a row-major tensor index.
    pub fn dense_entry(&self, index: usize) -> Result<f64> {
        let dim = tensor_dim(self.s, self.d).ok_or_else(|| Error::Overflow("d^s".into()))?;
        if index >= dim {
            return Err(Error::domain(format!("index {index} out of range for dimension {dim}")));
        }
        self.entry(&sequence_at(index, self.s, self.d))
    }

    pub fn to_dense(&self) -> Result<HermitianMatrix> {
        let dim = dense::checked_tensor_dim(self.s, self.d)?;
        let diag: Result<Vec<f64>> = (0..dim).map(|i| self.dense_entry(i)).collect();
        Ok(HermitianMatrix::from_real_diagonal(&diag?))
    }

    /// Inverse of [`SimplexPolynomial::to_diagonal_observable`].
    pub fn to_polynomial(&self) -> SimplexPolynomial {
        let mut p = SimplexPolynomial::zero(self.d, self.s).expect("d >= 1");
        for (n, v) in self.values() {
            p.add_term(n.clone(), v * orbit_size_f64(n)).expect("same shape");
        }
        p
    }
}

/// `s` with `d^s == dim`.
pub(crate) fn infer_power(dim: usize, d: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::domain("d must be at least 1"));
    }
    if d == 1 {
        return if dim == 1 { Ok(1) } else { Err(Error::domain("with d = 1 the tensor space is one-dimensional")) };
    }
    let mut s = 0;
    let mut acc = 1usize;
    while acc < dim {
        acc = acc.saturating_mul(d);
        s += 1;
    }
    if acc != dim {
        return Err(Error::domain(format!("dimension {dim} is not a power of d = {d}")));
    }
    Ok(s)
}
