//! A deterministic self-check: cross-method agreement on random observables
//! plus structural properties of the symmetric-subspace construction.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bernstein_lp::{lower_bound_lp_with, ConeMembershipLP};
use crate::boson::{
    index_symmetry_deviation, permutation_matrix, quantum_bound_with, symmetrizer, BosonDensityMatrix, CMatrix,
    OccupationBasis,
};
use crate::error::Result;
use crate::exchangeable::oracle_bound;
use crate::multiindex::CountVector;
use crate::polynomial::SimplexPolynomial;
use crate::solvers::Tolerances;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub agreement_cases: usize,
    /// Shifts every LP bound by this amount before comparison; a negative control.
    pub perturbation: f64,
    pub tolerances: Tolerances,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 0, agreement_cases: 50, perturbation: 0.0, tolerances: Tolerances::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Fixed-width table, one row per check.
    pub fn render(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status}  {:<width$}  {}\n", c.name, c.detail));
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        out.push_str(&format!("{passed}/{} checks passed\n", self.checks.len()));
        out
    }
}

fn outcome(name: &str, result: Result<(bool, String)>) -> CheckOutcome {
    match result {
        Ok((passed, detail)) => CheckOutcome { name: name.to_string(), passed, detail },
        Err(e) => CheckOutcome { name: name.to_string(), passed: false, detail: format!("error: {e}") },
    }
}

fn cv(c: &[usize]) -> CountVector {
    CountVector::new(c.to_vec()).expect("non-empty")
}

/// `theta_1^2 - theta_1 theta_2 + theta_2^2` over six outcomes.
pub fn dice_witness() -> SimplexPolynomial {
    SimplexPolynomial::from_terms(
        6,
        [(cv(&[2, 0, 0, 0, 0, 0]), 1.0), (cv(&[1, 1, 0, 0, 0, 0]), -1.0), (cv(&[0, 2, 0, 0, 0, 0]), 1.0)],
    )
    .expect("valid terms")
}

pub fn run(opts: &VerifyOptions) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let tol = &opts.tolerances;
    let checks = vec![
        outcome("dice witness s=2,3", check_dice(opts)),
        outcome("three-method agreement", check_agreement(opts, &mut rng)),
        outcome("symmetrizer projector", check_symmetrizer(&mut rng)),
        outcome("occupation basis", check_occupation()),
        outcome("boson index symmetry", check_index_symmetry(&mut rng)),
        outcome("cone LP row count", check_lp_rows()),
        outcome("LP certificate residuals", check_lp_residuals(tol)),
    ];
    VerifyReport { checks }
}

fn check_dice(opts: &VerifyOptions) -> Result<(bool, String)> {
    let g = dice_witness();
    let mut worst = 0.0f64;
    for (s, target) in [(2, -0.5), (3, -1.0 / 6.0)] {
        let values = [
            oracle_bound(&g, s)?.value,
            lower_bound_lp_with(&g, s, &opts.tolerances)?.value + opts.perturbation,
            quantum_bound_with(&g, s, &opts.tolerances)?.value,
        ];
        for v in values {
            worst = worst.max((v - target).abs());
        }
    }
    Ok((worst <= 1e-7, format!("max error {worst:.3e}")))
}

fn check_agreement(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..opts.agreement_cases {
        let d = rng.gen_range(2..=3);
        let s = rng.gen_range(2..=5);
        let g = SimplexPolynomial::random(d, 2, rng)?;
        let o = oracle_bound(&g, s)?.value;
        let l = lower_bound_lp_with(&g, s, &opts.tolerances)?.value + opts.perturbation;
        let q = quantum_bound_with(&g, s, &opts.tolerances)?.value;
        worst = worst.max((o - l).abs()).max((o - q).abs()).max((l - q).abs());
    }
    Ok((worst <= opts.tolerances.cross_check, format!("{} cases, max discrepancy {worst:.3e}", opts.agreement_cases)))
}

fn check_symmetrizer(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for d in 1..=3 {
        for s in 1..=4 {
            let pi = symmetrizer(s, d)?;
            let m = pi.as_matrix();
            worst = worst.max((m * m - m).norm()).max((m.adjoint() - m).norm());
            for _ in 0..10 {
                let mut perm: Vec<usize> = (0..s).collect();
                perm.shuffle(rng);
                let p = permutation_matrix(&perm, d)?;
                worst = worst.max((m * &p - m).norm()).max((&p * m - m).norm());
            }
        }
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.3e}")))
}

fn check_occupation() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for d in 1..=3 {
        for s in 1..=4 {
            let basis = OccupationBasis::new(d, s)?;
            let v = basis.isometry()?;
            let k = basis.dim();
            worst = worst.max((v.adjoint() * &v - CMatrix::identity(k, k)).norm());
            worst = worst.max((&v * v.adjoint() - symmetrizer(s, d)?.as_matrix()).norm());
        }
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.3e}")))
}

fn check_index_symmetry(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for d in 2..=3 {
        for s in 1..=3 {
            let rho = BosonDensityMatrix::random(OccupationBasis::new(d, s)?, rng)?;
            worst = worst.max(index_symmetry_deviation(&rho.to_dense()?, d)?);
        }
    }
    Ok((worst <= 1e-10, format!("max deviation {worst:.3e}")))
}

fn check_lp_rows() -> Result<(bool, String)> {
    let rows = ConeMembershipLP::assemble(&dice_witness(), 2)?.program().rows();
    Ok((rows == 21, format!("{rows} equality rows")))
}

fn check_lp_residuals(tol: &Tolerances) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for s in 2..=4 {
        worst = worst.max(lower_bound_lp_with(&dice_witness(), s, tol)?.diagnostics.residual);
    }
    Ok((worst <= tol.primal.max(tol.dual), format!("max residual {worst:.3e}")))
}
