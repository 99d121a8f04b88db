//! Numerical kernels shared by the bound computations: a dense two-phase
//! revised simplex and a cyclic Jacobi eigensolver for Hermitian matrices.

mod jacobi;
mod simplex;

pub use jacobi::{jacobi_eigen, EigenDecomposition};
pub use simplex::{simplex_solve, LinearProgram, LpResiduals, LpSolution, LpStatus, VarBound};

use serde::Serialize;

use crate::error::{Error, Result};

/// Environment variable holding tolerance overrides, e.g. `primal=1e-9,pivot=1e-11`.
pub const TOLERANCE_ENV: &str = "FINEX_TOL";

/// Every numerical threshold used by the crate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Simplex: `|Ax - b|` and bound violations, scaled by `1 + max|b|`.
    pub primal: f64,
    /// Simplex: reduced-cost sign violations, scaled by `1 + max|c|`.
    pub dual: f64,
    /// Simplex: `|x_j * reduced_cost_j|`.
    pub complementarity: f64,
    /// Smallest pivot element accepted by the ratio test.
    pub pivot: f64,
    pub max_simplex_iterations: usize,
    pub max_jacobi_sweeps: usize,
    /// Eigenpair residual `|Av - lambda v|`, relative to `|A|_F`.
    pub eigen_residual: f64,
    /// Maximum `|A - A^H|` entry accepted as Hermitian.
    pub hermitian: f64,
    /// Allowed spread of probabilities within one permutation orbit.
    pub symmetry: f64,
    pub normalization: f64,
    /// Smallest eigenvalue accepted as positive semidefinite is `-psd`.
    pub psd: f64,
    /// Allowed gap between the LP bound and the urn oracle.
    pub cross_check: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            primal: 1e-8,
            dual: 1e-8,
            complementarity: 1e-8,
            pivot: 1e-10,
            max_simplex_iterations: 1_000_000,
            max_jacobi_sweeps: 100,
            eigen_residual: 1e-9,
            hermitian: 1e-12,
            symmetry: 1e-9,
            normalization: 1e-9,
            psd: 1e-9,
            cross_check: 1e-7,
        }
    }
}

impl Tolerances {
    /// Defaults, then `FINEX_TOL`, then `flag` (highest precedence).
    pub fn resolve(flag: Option<&str>) -> Result<Self> {
        let mut tol = Self::default();
        if let Ok(env) = std::env::var(TOLERANCE_ENV) {
            tol.apply_overrides(&env)?;
        }
        if let Some(flag) = flag {
            tol.apply_overrides(flag)?;
        }
        Ok(tol)
    }

    /// Parses a comma-separated `key=value` list.
    pub fn apply_overrides(&mut self, spec: &str) -> Result<()> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("tolerance override {item:?} is not key=value")))?;
            let key = key.trim();
            let value = value.trim();
            let float = || -> Result<f64> {
                let v: f64 =
                    value.parse().map_err(|_| Error::Parse(format!("tolerance {key}: {value:?} is not a number")))?;
                if v.is_finite() && v > 0.0 {
                    Ok(v)
                } else {
                    Err(Error::Parse(format!("tolerance {key} must be positive, got {value}")))
                }
            };
            let count = || -> Result<usize> {
                value.parse().map_err(|_| Error::Parse(format!("tolerance {key}: {value:?} is not an integer")))
            };
            match key {
                "primal" => self.primal = float()?,
                "dual" => self.dual = float()?,
                "complementarity" => self.complementarity = float()?,
                "pivot" => self.pivot = float()?,
                "max_simplex_iterations" => self.max_simplex_iterations = count()?,
                "max_jacobi_sweeps" => self.max_jacobi_sweeps = count()?,
                "eigen_residual" => self.eigen_residual = float()?,
                "hermitian" => self.hermitian = float()?,
                "symmetry" => self.symmetry = float()?,
                "normalization" => self.normalization = float()?,
                "psd" => self.psd = float()?,
                "cross_check" => self.cross_check = float()?,
                other => return Err(Error::Parse(format!("unknown tolerance {other:?}"))),
            }
        }
        Ok(())
    }
}
