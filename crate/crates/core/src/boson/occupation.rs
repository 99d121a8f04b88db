use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dense::checked_tensor_dim;
use super::{infer_power, CMatrix, DiagonalObservable, HermitianMatrix};
use crate::error::{Error, Result};
use crate::exchangeable::ExchangeableDistribution;
use crate::multiindex::{compositions, orbit_size_f64, rank, sequence_at, sequence_to_counts, CountVector};
use crate::solvers::{jacobi_eigen, Tolerances};

/// Largest occupation-basis dimension stored as a dense matrix.
pub const OCCUPATION_DENSE_LIMIT: usize = 1024;

/// Orthonormal basis of the symmetric subspace, one state per count vector
/// in rank order. The state for `n` is the uniform superposition of its orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupationBasis {
    d: usize,
    s: usize,
    states: Vec<CountVector>,
}

impl OccupationBasis {
    pub fn new(d: usize, s: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("d must be at least 1"));
        }
        Ok(Self { d, s, states: compositions(s, d)? })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[CountVector] {
        &self.states
    }

    pub fn index_of(&self, n: &CountVector) -> Option<usize> {
        (n.dim() == self.d && n.degree() == self.s).then(|| rank(n))
    }

    /// The `d^s x dim` isometry `V` whose columns are the basis states.
    pub fn isometry(&self) -> Result<CMatrix> {
        let rows = checked_tensor_dim(self.s, self.d)?;
        let mut v = CMatrix::zeros(rows, self.dim());
        for idx in 0..rows {
            let n = sequence_to_counts(&sequence_at(idx, self.s, self.d), self.d)?;
            v[(idx, rank(&n))] = Complex64::new(orbit_size_f64(&n).sqrt().recip(), 0.0);
        }
        Ok(v)
    }

    fn check_dense(&self) -> Result<()> {
        if self.dim() > OCCUPATION_DENSE_LIMIT {
            return Err(Error::Capacity {
                what: "dense occupation-basis matrix",
                requested: self.dim(),
                limit: OCCUPATION_DENSE_LIMIT,
            });
        }
        Ok(())
    }
}

/// Diagonal of `V^H D V` in basis order. A permutation-symmetric diagonal
/// observable compresses to a diagonal matrix carrying its orbit values.
pub fn compress_diagonal(obs: &DiagonalObservable) -> Vec<f64> {
    compositions(obs.s(), obs.d()).expect("valid shape").iter().map(|n| obs.value(n)).collect()
}

/// `V^H D V` as a dense matrix.
pub fn compress(obs: &DiagonalObservable) -> Result<HermitianMatrix> {
    OccupationBasis::new(obs.d(), obs.s())?.check_dense()?;
    Ok(HermitianMatrix::from_real_diagonal(&compress_diagonal(obs)))
}

/// `V^H G V` for an arbitrary Hermitian operator on `(C^d)^{(x)s}`,
/// accumulated orbit by orbit without forming `V`.
pub fn compress_hermitian(g: &HermitianMatrix, d: usize) -> Result<HermitianMatrix> {
    let s = infer_power(g.dim(), d)?;
    let dim = checked_tensor_dim(s, d)?;
    let basis = OccupationBasis::new(d, s)?;
    basis.check_dense()?;
    let orbit_of: Vec<usize> =
        (0..dim).map(|idx| sequence_to_counts(&sequence_at(idx, s, d), d).map(|n| rank(&n))).collect::<Result<_>>()?;
    let scale: Vec<f64> = basis.states().iter().map(|n| orbit_size_f64(n).sqrt().recip()).collect();
    let k = basis.dim();
    let mut acc = CMatrix::zeros(k, k);
    let m = g.as_matrix();
    for b in 0..dim {
        for a in 0..dim {
            acc[(orbit_of[a], orbit_of[b])] += m[(a, b)];
        }
    }
    for j in 0..k {
        for i in 0..k {
            acc[(i, j)] *= scale[i] * scale[j];
        }
    }
    HermitianMatrix::new(acc, 1e-12 * (1.0 + g.frobenius_norm()))
}

/// A density matrix on the symmetric subspace, in occupation-basis coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct BosonDensityMatrix {
    basis: OccupationBasis,
    matrix: HermitianMatrix,
}

impl BosonDensityMatrix {
    /// Checks unit trace and positive semidefiniteness.
    pub fn new(basis: OccupationBasis, matrix: HermitianMatrix, tol: &Tolerances) -> Result<Self> {
        if matrix.dim() != basis.dim() {
            return Err(Error::domain(format!(
                "matrix dimension {} does not match basis dimension {}",
                matrix.dim(),
                basis.dim()
            )));
        }
        let trace = matrix.trace();
        if (trace - 1.0).abs() > tol.normalization {
            return Err(Error::Normalization { mass: trace, tolerance: tol.normalization });
        }
        if !matrix.is_diagonal() {
            basis.check_dense()?;
        }
        let min = if matrix.is_diagonal() {
            (0..matrix.dim()).map(|i| matrix.get(i, i).re).fold(f64::INFINITY, f64::min)
        } else {
            jacobi_eigen(&matrix, tol)?.eigenvalues[0]
        };
        if min < -tol.psd {
            return Err(Error::domain(format!("density matrix has negative eigenvalue {min:.3e}")));
        }
        Ok(Self { basis, matrix })
    }

    /// `|psi><psi|` for a normalized copy of `amplitudes`.
    pub fn pure(basis: OccupationBasis, amplitudes: &[Complex64]) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::domain("amplitude count does not match basis dimension"));
        }
        basis.check_dense()?;
        let psi = DVector::from_column_slice(amplitudes);
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::domain("zero state vector"));
        }
        let psi = psi.unscale(norm);
        let matrix = HermitianMatrix::new(&psi * psi.adjoint(), 1e-12)?;
        Ok(Self { basis, matrix })
    }

    /// `A A^H / Tr(A A^H)` for `A` with independent uniform complex entries.
    pub fn random<R: Rng + ?Sized>(basis: OccupationBasis, rng: &mut R) -> Result<Self> {
        basis.check_dense()?;
        let k = basis.dim();
        let a = CMatrix::from_fn(k, k, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let m = &a * a.adjoint();
        let trace: f64 = (0..k).map(|i| m[(i, i)].re).sum();
        let matrix = HermitianMatrix::new(m.unscale(trace), 1e-12)?;
        Ok(Self { basis, matrix })
    }

    pub fn basis(&self) -> &OccupationBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    /// `V rho V^H` on the full tensor space, formed entrywise as
    /// `rho[n, m] / sqrt(|orbit n| |orbit m|)` so rational entries stay exact.
    pub fn to_dense(&self) -> Result<HermitianMatrix> {
        let (s, d) = (self.basis.s(), self.basis.d());
        let rows = checked_tensor_dim(s, d)?;
        let mut orbit = Vec::with_capacity(rows);
        for idx in 0..rows {
            let n = sequence_to_counts(&sequence_at(idx, s, d), d)?;
            orbit.push((rank(&n), orbit_size_f64(&n)));
        }
        let m = self.matrix.as_matrix();
        let dense = CMatrix::from_fn(rows, rows, |i, j| {
            let ((a, size_a), (b, size_b)) = (orbit[i], orbit[j]);
            m[(a, b)] / (size_a * size_b).sqrt()
        });
        HermitianMatrix::new(dense, 1e-12)
    }

    pub fn to_json(&self) -> DensityMatrixJson {
        let m = self.matrix.as_matrix();
        let k = self.basis.dim();
        DensityMatrixJson {
            d: self.basis.d(),
            s: self.basis.s(),
            basis: self.basis.states().iter().map(|n| n.counts().to_vec()).collect(),
            entries: (0..k * k).map(|i| [m[(i / k, i % k)].re, m[(i / k, i % k)].im]).collect(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let json: DensityMatrixJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let basis = OccupationBasis::new(json.d, json.s)?;
        let expected: Vec<Vec<usize>> = basis.states().iter().map(|n| n.counts().to_vec()).collect();
        if json.basis != expected {
            return Err(Error::Parse("basis labels are not the occupation basis in rank order".into()));
        }
        let k = basis.dim();
        if json.entries.len() != k * k {
            return Err(Error::Parse(format!("expected {} entries, found {}", k * k, json.entries.len())));
        }
        let m = CMatrix::from_fn(k, k, |i, j| {
            let [re, im] = json.entries[i * k + j];
            Complex64::new(re, im)
        });
        let tol = Tolerances::default();
        Self::new(basis, HermitianMatrix::new(m, tol.hermitian)?, &tol)
    }
}

/// Serialized form: basis labels in rank order and row-major `[re, im]` entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrixJson {
    pub d: usize,
    pub s: usize,
    pub basis: Vec<Vec<usize>>,
    pub entries: Vec<[f64; 2]>,
}

/// The symmetric-subspace state of an exchangeable distribution: diagonal in
/// the occupation basis with the orbit probabilities on the diagonal.
pub fn rho_from_exchangeable(dist: &ExchangeableDistribution) -> Result<BosonDensityMatrix> {
    let basis = OccupationBasis::new(dist.d(), dist.r())?;
    basis.check_dense()?;
    let diag: Vec<f64> = basis.states().iter().map(|n| dist.orbit_prob(n)).collect();
    let matrix = HermitianMatrix::from_real_diagonal(&diag);
    BosonDensityMatrix::new(basis, matrix, &Tolerances::default())
}

/// An operator paired with a density matrix by [`witness_value`].
#[derive(Clone, Copy, Debug)]
pub enum Witness<'a> {
    Diagonal(&'a DiagonalObservable),
    /// Any Hermitian operator on the `d^s` tensor space.
    Dense(&'a HermitianMatrix),
}

/// `Tr(G rho)`, where `rho` lives on the symmetric subspace.
pub fn witness_value(witness: Witness<'_>, rho: &BosonDensityMatrix) -> Result<f64> {
    let basis = rho.basis();
    match witness {
        Witness::Diagonal(obs) => {
            if obs.d() != basis.d() || obs.s() != basis.s() {
                return Err(Error::domain("observable and density matrix act on different spaces"));
            }
            let diag = compress_diagonal(obs);
            Ok(diag.iter().enumerate().map(|(i, v)| v * rho.matrix().get(i, i).re).sum())
        }
        Witness::Dense(g) => {
            let compressed = compress_hermitian(g, basis.d())?;
            if compressed.dim() != basis.dim() {
                return Err(Error::domain("operator and density matrix act on different spaces"));
            }
            compressed.trace_product(rho.matrix())
        }
    }
}
