//! Lower bounds from membership in the cone of simplex monomials.
//!
//! For a degree-`s` lift of `g`, the largest `c` such that
//! `lift(g) - c * (sum theta)^s` is a non-negative combination of the
//! monomials `theta^n`, `|n| = s`, is a lower bound on `g` over the simplex.
//! The identity is imposed after eliminating `theta_d = 1 - sum theta_i`, one
//! equality row per monomial in the free variables.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exchangeable::{oracle_bound, BoundResult, Certificate, ConeTerm, Diagnostics, Method};
use crate::multiindex::{compositions, rank, CountVector};
use crate::polynomial::SimplexPolynomial;
use crate::solvers::{simplex_solve, LinearProgram, LpSolution, LpStatus, Tolerances, VarBound};

/// The equality-form LP behind [`lower_bound_lp`].
///
/// Columns are `u_n` for every `n` in `compositions(s, d)` in rank order,
/// then the free variable `c`. Rows are the monomials of the reduced
/// identity; the row for `theta^m` (free variables only) sits at the rank of
/// `(m, s - |m|)`.
#[derive(Clone, Debug)]
pub struct ConeMembershipLP {
    d: usize,
    s: usize,
    columns: Vec<CountVector>,
    lifted: SimplexPolynomial,
    program: LinearProgram,
}

impl ConeMembershipLP {
    pub fn assemble(g: &SimplexPolynomial, s: usize) -> Result<Self> {
        if s < g.degree() {
            return Err(Error::domain(format!("s = {s} is below the polynomial degree {}", g.degree())));
        }
        let d = g.d();
        let lifted = g.homogenize(s)?;
        let columns = compositions(s, d)?;
        let rows = columns.len();
        let row_of = |exps: &[usize]| {
            let total: usize = exps.iter().sum();
            let mut counts = exps.to_vec();
            counts.push(s - total);
            rank(&CountVector::new(counts).expect("d >= 1"))
        };

        let mut a = DMatrix::<f64>::zeros(rows, rows + 1);
        for (col, n) in columns.iter().enumerate() {
            for (exps, coeff) in SimplexPolynomial::monomial(n.clone(), 1.0).reduce_to_free_vars().terms() {
                a[(row_of(exps), col)] = coeff;
            }
        }
        // (sum theta)^s reduces to the constant 1.
        a[(row_of(&vec![0; d - 1]), rows)] = 1.0;

        let mut b = vec![0.0; rows];
        for (exps, coeff) in lifted.reduce_to_free_vars().terms() {
            b[row_of(exps)] = coeff;
        }
        let mut objective = vec![0.0; rows + 1];
        objective[rows] = 1.0;
        let mut bounds = vec![VarBound::NonNegative; rows + 1];
        bounds[rows] = VarBound::Free;

        let program = LinearProgram::new(a, b, objective, bounds)?;
        Ok(Self { d, s, columns, lifted, program })
    }

    pub fn program(&self) -> &LinearProgram {
        &self.program
    }

    /// Count vectors labelling the `u` columns; `c` is the final column.
    pub fn columns(&self) -> &[CountVector] {
        &self.columns
    }

    pub fn c_column(&self) -> usize {
        self.columns.len()
    }

    /// Row holding the coefficient of `theta^exps` in the free variables.
    pub fn row_index(&self, exps: &[usize]) -> Result<usize> {
        let total: usize = exps.iter().sum();
        if exps.len() + 1 != self.d || total > self.s {
            return Err(Error::domain(format!("{exps:?} is not a reduced monomial of degree <= {}", self.s)));
        }
        let mut counts = exps.to_vec();
        counts.push(self.s - total);
        Ok(rank(&CountVector::new(counts)?))
    }

    pub fn solve(&self, tol: &Tolerances) -> Result<LpSolution> {
        simplex_solve(&self.program, tol)
    }

    /// Human-readable listing of every constraint.
    pub fn to_text(&self) -> String {
        let a = self.program.matrix();
        let mut out = format!(
            "maximize c\nsubject to  ({} rows, {} columns, d = {}, s = {})\n",
            a.nrows(),
            a.ncols(),
            self.d,
            self.s
        );
        for (row, m) in self.columns.iter().enumerate() {
            let free = &m.counts()[..self.d - 1];
            let _ = write!(out, "  theta{free:?}:");
            for col in 0..a.ncols() {
                let v = a[(row, col)];
                if v != 0.0 {
                    let name = if col == self.c_column() { "c".to_string() } else { format!("u{}", self.columns[col]) };
                    let _ = write!(out, " {} {} {}", if v < 0.0 { "-" } else { "+" }, v.abs(), name);
                }
            }
            let _ = writeln!(out, " = {}", self.program.rhs()[row]);
        }
        out.push_str("bounds\n  u >= 0, c free\n");
        out
    }

    /// `lift(g) - c (sum theta)^s - sum u_n theta^n`, largest coefficient.
    fn reconstruction_error(&self, c: f64, u: &[f64]) -> Result<f64> {
        let mut rest = self.lifted.checked_sub(&SimplexPolynomial::simplex_power(self.d, self.s)?.scale(c))?;
        for (n, &w) in self.columns.iter().zip(u) {
            rest.add_term(n.clone(), -w)?;
        }
        Ok(rest.terms().map(|(_, v)| v.abs()).fold(0.0, f64::max))
    }
}

/// [`lower_bound_lp_with`] under default tolerances.
pub fn lower_bound_lp(g: &SimplexPolynomial, s: usize) -> Result<BoundResult> {
    lower_bound_lp_with(g, s, &Tolerances::default())
}

/// Optimal `c` of the cone-membership LP, with the cone decomposition as
/// certificate. The decomposition and the urn oracle are both checked.
pub fn lower_bound_lp_with(g: &SimplexPolynomial, s: usize, tol: &Tolerances) -> Result<BoundResult> {
    if s < g.degree() {
        return Err(Error::domain(format!("s = {s} is below the polynomial degree {}", g.degree())));
    }
    if g.is_zero() {
        return Ok(BoundResult {
            value: 0.0,
            method: Method::Lp,
            s,
            certificate: Certificate::Empty,
            diagnostics: Diagnostics::default(),
        });
    }
    let lp = ConeMembershipLP::assemble(g, s)?;
    let sol = lp.solve(tol)?;
    match sol.status {
        LpStatus::Optimal => {}
        status => return Err(Error::solver(format!("cone LP reported {status:?}"))),
    }
    let c = sol.primal[lp.c_column()];
    let u = &sol.primal[..lp.c_column()];

    let scale = 1.0 + lp.lifted.terms().map(|(_, v)| v.abs()).fold(0.0, f64::max);
    let error = lp.reconstruction_error(c, u)?;
    if error > tol.primal * scale {
        return Err(Error::solver(format!("cone decomposition misses lift(g) by {error:.3e}")));
    }
    let oracle = oracle_bound(g, s)?.value;
    if (c - oracle).abs() > tol.cross_check * (1.0 + oracle.abs()) {
        return Err(Error::solver(format!("LP bound {c} disagrees with urn oracle {oracle}")));
    }

    let terms = lp
        .columns
        .iter()
        .zip(u)
        .filter(|(_, &w)| w > 0.0)
        .map(|(n, &w)| ConeTerm { counts: n.clone(), weight: w })
        .collect();
    let residual = sol.residuals.primal.max(sol.residuals.dual).max(sol.residuals.complementarity).max(error);
    Ok(BoundResult {
        value: c,
        method: Method::Lp,
        s,
        certificate: Certificate::Cone { c, terms },
        diagnostics: Diagnostics { iterations: sol.iterations, residual, size: lp.program.rows() },
    })
}
