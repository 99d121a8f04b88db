use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::Tolerances;
use crate::error::{Error, Result};

/// Sign restriction of one LP column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VarBound {
    NonNegative,
    Free,
}

/// `maximize objective . x  subject to  A x = b`, with per-column bounds.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    a: DMatrix<f64>,
    b: Vec<f64>,
    objective: Vec<f64>,
    bounds: Vec<VarBound>,
}

impl LinearProgram {
    pub fn new(a: DMatrix<f64>, b: Vec<f64>, objective: Vec<f64>, bounds: Vec<VarBound>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::domain(format!("A has {} rows but b has {} entries", a.nrows(), b.len())));
        }
        if a.ncols() != objective.len() || a.ncols() != bounds.len() {
            return Err(Error::domain(format!(
                "A has {} columns, objective has {}, bounds has {}",
                a.ncols(),
                objective.len(),
                bounds.len()
            )));
        }
        if a.iter().chain(&b).chain(&objective).any(|v| !v.is_finite()) {
            return Err(Error::domain("LP data must be finite"));
        }
        Ok(Self { a, b, objective, bounds })
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn cols(&self) -> usize {
        self.a.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn bounds(&self) -> &[VarBound] {
        &self.bounds
    }

    /// The same LP with its constraint rows reordered: row `i` of the result
    /// is row `order[i]` of `self`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.rows()];
        for &i in order {
            if i >= self.rows() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::domain("row order is not a permutation"));
            }
        }
        if order.len() != self.rows() {
            return Err(Error::domain("row order is not a permutation"));
        }
        let a = DMatrix::from_fn(self.rows(), self.cols(), |i, j| self.a[(order[i], j)]);
        let b = order.iter().map(|&i| self.b[i]).collect();
        Self::new(a, b, self.objective.clone(), self.bounds.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct LpResiduals {
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value; meaningful only when optimal.
    pub optimum: f64,
    pub primal: Vec<f64>,
    /// One multiplier per constraint row, with `A^T y >= c` on non-negative
    /// columns, equality on free columns, and `b . y` equal to the optimum.
    pub dual: Vec<f64>,
    pub iterations: usize,
    pub residuals: LpResiduals,
}

impl LpSolution {
    fn without_solution(status: LpStatus, iterations: usize) -> Self {
        Self {
            status,
            optimum: f64::NAN,
            primal: Vec::new(),
            dual: Vec::new(),
            iterations,
            residuals: LpResiduals::default(),
        }
    }
}

/// Consecutive degenerate pivots after which pricing switches to Bland's rule.
const DEGENERATE_STREAK: usize = 50;
const REFACTOR_EVERY: usize = 100;
const SCALING_PASSES: usize = 4;

/// Solves the LP with a dense two-phase revised simplex.
///
/// Rows and columns are first equilibrated by powers of two. Entering
/// columns are priced with Devex weights; after a run of degenerate pivots
/// the solver falls back to Bland's smallest-index rule until the objective
/// moves again, which rules out cycling. Optimality is checked
/// on the original, unscaled problem.
pub fn simplex_solve(lp: &LinearProgram, tol: &Tolerances) -> Result<LpSolution> {
    let m = lp.rows();
    let std = StandardForm::build(lp);
    let n = std.a.ncols();
    let scaling = Scaling::geometric(&std.a);

    // [RAC | I] with artificials; rows were flipped so that b >= 0.
    let mut full = DMatrix::<f64>::zeros(m, n + m);
    full.view_mut((0, 0), (m, n)).copy_from(&scaling.apply(&std.a));
    for i in 0..m {
        full[(i, n + i)] = 1.0;
    }
    let b = DVector::from_iterator(m, std.b.iter().zip(&scaling.row).map(|(v, r)| v * r));
    let cost: Vec<f64> = std.c.iter().zip(&scaling.col).map(|(c, s)| c * s).collect();
    let b_scale = 1.0 + b.amax();
    let mut state = Revised::new(full, b);

    // Crash: artificials sitting at zero can be swapped for structural
    // columns without moving the point.
    state.drive_out_artificials(n, tol);

    // Phase 1: minimize the sum of artificials. Artificials that have left
    // the basis never re-enter.
    let phase1: Vec<f64> = (0..n + m).map(|j| if j >= n { -1.0 } else { 0.0 }).collect();
    match state.optimize(&phase1, n, tol)? {
        Outcome::Optimal => {}
        Outcome::Unbounded => return Err(Error::solver("phase 1 reported unbounded")),
    }
    state.refactor()?;
    let infeasibility: f64 =
        state.basis.iter().zip(state.x_b.iter()).filter(|(&j, _)| j >= n).map(|(_, &v)| v.abs()).sum();
    if infeasibility > tol.primal * b_scale {
        return Ok(LpSolution::without_solution(LpStatus::Infeasible, state.iterations));
    }
    state.drive_out_artificials(n, tol);

    // Phase 2 on the structural columns only.
    let mut phase2 = cost;
    phase2.extend(std::iter::repeat_n(0.0, m));
    if let Outcome::Unbounded = state.optimize(&phase2, n, tol)? {
        return Ok(LpSolution::without_solution(LpStatus::Unbounded, state.iterations));
    }

    state.refactor()?;
    let mut x_std = vec![0.0; n];
    for (&j, &v) in state.basis.iter().zip(state.x_b.iter()) {
        if j < n {
            x_std[j] = v.max(0.0) * scaling.col[j];
        }
    }
    let y_scaled = state.duals(&phase2);
    let primal = std.recover_primal(&x_std);
    let dual: Vec<f64> = (0..m).map(|i| y_scaled[i] * scaling.row[i] * std.row_sign[i]).collect();
    let optimum: f64 = lp.objective.iter().zip(&primal).map(|(c, x)| c * x).sum();

    let b_scale = 1.0 + lp.b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let c_scale = 1.0 + lp.objective.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let residuals = residuals(lp, &primal, &dual);
    if residuals.primal > tol.primal * b_scale
        || residuals.dual > tol.dual * c_scale
        || residuals.complementarity > tol.complementarity * b_scale * c_scale
    {
        return Err(Error::solver(format!(
            "optimality check failed after {} pivots: primal {:.3e}, dual {:.3e}, complementarity {:.3e}",
            state.iterations, residuals.primal, residuals.dual, residuals.complementarity
        )));
    }

    Ok(LpSolution { status: LpStatus::Optimal, optimum, primal, dual, iterations: state.iterations, residuals })
}

fn residuals(lp: &LinearProgram, x: &[f64], y: &[f64]) -> LpResiduals {
    let mut out = LpResiduals::default();
    let xv = DVector::from_column_slice(x);
    let yv = DVector::from_column_slice(y);
    let ax = &lp.a * &xv;
    for i in 0..lp.rows() {
        out.primal = out.primal.max((ax[i] - lp.b[i]).abs());
    }
    let aty = lp.a.tr_mul(&yv);
    for j in 0..lp.cols() {
        let reduced = aty[j] - lp.objective[j];
        match lp.bounds[j] {
            VarBound::NonNegative => {
                out.primal = out.primal.max(-x[j]);
                out.dual = out.dual.max(-reduced);
                out.complementarity = out.complementarity.max((x[j] * reduced).abs());
            }
            VarBound::Free => out.dual = out.dual.max(reduced.abs()),
        }
    }
    out
}

/// Non-negative standard form: free columns split in two, rows flipped to `b >= 0`.
struct StandardForm {
    a: DMatrix<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    /// For each original column, its positive column and optional negative twin.
    columns: Vec<(usize, Option<usize>)>,
    row_sign: Vec<f64>,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.rows();
        let mut columns = Vec::with_capacity(lp.cols());
        let mut next = 0;
        for bound in &lp.bounds {
            match bound {
                VarBound::NonNegative => {
                    columns.push((next, None));
                    next += 1;
                }
                VarBound::Free => {
                    columns.push((next, Some(next + 1)));
                    next += 2;
                }
            }
        }
        let row_sign: Vec<f64> = lp.b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        let mut a = DMatrix::zeros(m, next);
        let mut c = vec![0.0; next];
        for (j, &(pos, neg)) in columns.iter().enumerate() {
            c[pos] = lp.objective[j];
            for i in 0..m {
                a[(i, pos)] = row_sign[i] * lp.a[(i, j)];
            }
            if let Some(neg) = neg {
                c[neg] = -lp.objective[j];
                for i in 0..m {
                    a[(i, neg)] = -row_sign[i] * lp.a[(i, j)];
                }
            }
        }
        let b = lp.b.iter().zip(&row_sign).map(|(v, s)| v * s).collect();
        Self { a, b, c, columns, row_sign }
    }

    fn recover_primal(&self, x_std: &[f64]) -> Vec<f64> {
        self.columns.iter().map(|&(pos, neg)| x_std[pos] - neg.map_or(0.0, |k| x_std[k])).collect()
    }
}

/// Power-of-two row and column factors with `R A C` close to unit magnitude.
struct Scaling {
    row: Vec<f64>,
    col: Vec<f64>,
}

impl Scaling {
    fn geometric(a: &DMatrix<f64>) -> Self {
        let (m, n) = a.shape();
        let mut row = vec![1.0; m];
        let mut col = vec![1.0; n];
        // sqrt(max * min) of the nonzero magnitudes, as a power of two
        let factor = |values: &mut dyn Iterator<Item = f64>| {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for v in values.map(f64::abs).filter(|&v| v > 0.0) {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi == 0.0 {
                1.0
            } else {
                2f64.powi(-((lo * hi).sqrt().log2().round() as i32))
            }
        };
        for _ in 0..SCALING_PASSES {
            for i in 0..m {
                row[i] *= factor(&mut (0..n).map(|j| a[(i, j)] * row[i] * col[j]));
            }
            for j in 0..n {
                col[j] *= factor(&mut (0..m).map(|i| a[(i, j)] * row[i] * col[j]));
            }
        }
        Self { row, col }
    }

    fn apply(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * self.row[i] * self.col[j])
    }
}

enum Outcome {
    Optimal,
    Unbounded,
}

/// Revised simplex state with an explicit dense basis inverse.
struct Revised {
    a: DMatrix<f64>,
    b: DVector<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: DMatrix<f64>,
    x_b: DVector<f64>,
    iterations: usize,
    since_refactor: usize,
}

impl Revised {
    fn new(a: DMatrix<f64>, b: DVector<f64>) -> Self {
        let m = a.nrows();
        let total = a.ncols();
        let basis: Vec<usize> = (total - m..total).collect();
        let mut is_basic = vec![false; total];
        for &j in &basis {
            is_basic[j] = true;
        }
        Self { x_b: b.clone(), a, b, basis, is_basic, binv: DMatrix::identity(m, m), iterations: 0, since_refactor: 0 }
    }

    fn duals(&self, cost: &[f64]) -> DVector<f64> {
        let c_b = DVector::from_iterator(self.basis.len(), self.basis.iter().map(|&j| cost[j]));
        self.binv.tr_mul(&c_b)
    }

    fn column(&self, j: usize) -> DVector<f64> {
        &self.binv * self.a.column(j)
    }

    /// Maximizes `cost` over columns `0..allowed` (plus whatever is basic).
    ///
    /// Pricing uses Devex reference weights, an approximation of steepest
    /// edge: the entering column maximizes `d_j^2 / weight_j`.
    fn optimize(&mut self, cost: &[f64], allowed: usize, tol: &Tolerances) -> Result<Outcome> {
        let mut degenerate_run = 0usize;
        let mut weights = vec![1.0f64; self.a.ncols()];
        loop {
            if self.iterations >= tol.max_simplex_iterations {
                return Err(Error::solver(format!("iteration cap of {} pivots reached", tol.max_simplex_iterations)));
            }
            let y = self.duals(cost);
            let aty = self.a.columns(0, allowed).tr_mul(&y);
            let bland = degenerate_run >= DEGENERATE_STREAK;
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..allowed {
                if self.is_basic[j] {
                    continue;
                }
                let d = cost[j] - aty[j];
                if d <= tol.dual {
                    continue;
                }
                if bland {
                    entering = Some((j, d));
                    break;
                }
                let score = d * d / weights[j];
                if entering.is_none_or(|(_, best)| score > best) {
                    entering = Some((j, score));
                }
            }
            let Some((j, _)) = entering else {
                return Ok(Outcome::Optimal);
            };

            let w = self.column(j);
            let threshold = tol.pivot * w.amax().max(1.0);
            let mut leaving: Option<(usize, f64)> = None;
            for (i, &wi) in w.iter().enumerate() {
                if wi <= threshold {
                    continue;
                }
                let ratio = self.x_b[i].max(0.0) / wi;
                leaving = match leaving {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        let better_tie = if bland { self.basis[i] < self.basis[r] } else { wi > w[r] };
                        if ratio < best && !tie || tie && better_tie {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
            let Some((r, step)) = leaving else {
                return Ok(Outcome::Unbounded);
            };

            if step <= tol.primal * 1e-3 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            if !bland {
                self.update_devex(&mut weights, allowed, r, j, w[r]);
            }
            self.pivot(r, j, &w, step);
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
        }
    }

    /// Devex weight update for entering column `q` pivoting on row `r`.
    fn update_devex(&self, weights: &mut [f64], allowed: usize, r: usize, q: usize, pivot: f64) {
        let row = self.a.columns(0, allowed).tr_mul(&self.binv.row(r).transpose());
        let wq = weights[q].max(1.0);
        let mut largest = 0.0f64;
        for j in 0..allowed {
            if self.is_basic[j] || j == q {
                continue;
            }
            let ratio = row[j] / pivot;
            weights[j] = weights[j].max(ratio * ratio * wq);
            largest = largest.max(weights[j]);
        }
        let leaving = self.basis[r];
        weights[leaving] = (wq / (pivot * pivot)).max(1.0);
        if largest > 1e6 {
            weights.iter_mut().for_each(|w| *w = 1.0);
        }
    }

    fn pivot(&mut self, r: usize, j: usize, w: &DVector<f64>, step: f64) {
        self.x_b.axpy(-step, w, 1.0);
        self.x_b[r] = step;
        for v in self.x_b.iter_mut() {
            if *v < 0.0 && *v > -1e-13 {
                *v = 0.0;
            }
        }

        let pivot_row: DVector<f64> = self.binv.row(r).transpose().unscale(w[r]);
        let mut others = w.clone();
        others[r] = 0.0;
        self.binv.ger(-1.0, &others, &pivot_row, 1.0);
        self.binv.set_row(r, &pivot_row.transpose());

        self.is_basic[self.basis[r]] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
        self.iterations += 1;
        self.since_refactor += 1;
    }

    /// Restores the basis inverse to working accuracy and recomputes the
    /// basic values. A Newton step `X + X (I - B X)` suffices when the drift
    /// is small; otherwise the inverse is rebuilt by LU.
    fn refactor(&mut self) -> Result<()> {
        let m = self.basis.len();
        let basis_matrix = DMatrix::from_fn(m, m, |i, k| self.a[(i, self.basis[k])]);
        let drift = DMatrix::<f64>::identity(m, m) - &basis_matrix * &self.binv;
        if drift.amax() < 1e-6 {
            self.binv += &self.binv * drift;
        } else {
            self.binv = basis_matrix.try_inverse().ok_or_else(|| Error::solver("basis matrix became singular"))?;
        }
        self.x_b = &self.binv * &self.b;
        self.since_refactor = 0;
        Ok(())
    }

    /// Pivots zero-valued artificials out of the basis where some structural
    /// column can replace them; rows where none can are redundant.
    fn drive_out_artificials(&mut self, structural: usize, tol: &Tolerances) {
        let m = self.basis.len();
        for r in 0..m {
            if self.basis[r] < structural || self.x_b[r].abs() > tol.primal * 1e-3 {
                continue;
            }
            let entries = self.a.columns(0, structural).tr_mul(&self.binv.row(r).transpose());
            let replacement = (0..structural)
                .filter(|&j| !self.is_basic[j])
                .map(|j| (j, entries[j].abs()))
                .filter(|&(_, v)| v > tol.pivot.max(1e-9))
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
            if let Some((j, _)) = replacement {
                let w = self.column(j);
                let step = self.x_b[r].max(0.0) / w[r];
                self.pivot(r, j, &w, step);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(a: &[&[f64]], b: &[f64], c: &[f64], bounds: &[VarBound]) -> LpSolution {
        let rows = a.len();
        let cols = c.len();
        let mat = DMatrix::from_fn(rows, cols, |i, j| a[i][j]);
        let lp = LinearProgram::new(mat, b.to_vec(), c.to_vec(), bounds.to_vec()).unwrap();
        simplex_solve(&lp, &Tolerances::default()).unwrap()
    }

    use VarBound::{Free, NonNegative as Pos};

    #[test]
    fn single_upper_bound() {
        // max c s.t. c + slack = 1
        let sol = solve(&[&[1.0, 1.0]], &[1.0], &[1.0, 0.0], &[Free, Pos]);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.optimum - 1.0).abs() < 1e-12);
        assert!((sol.dual[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_negated_equality() {
        // max c s.t. -c = 0
        let sol = solve(&[&[-1.0]], &[0.0], &[1.0], &[Free]);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.optimum.abs() < 1e-12);
    }

    #[test]
    fn textbook_two_variable_problem() {
        // max 3x + 5y; x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let sol = solve(
            &[&[1.0, 0.0, 1.0, 0.0, 0.0], &[0.0, 2.0, 0.0, 1.0, 0.0], &[3.0, 2.0, 0.0, 0.0, 1.0]],
            &[4.0, 12.0, 18.0],
            &[3.0, 5.0, 0.0, 0.0, 0.0],
            &[Pos; 5],
        );
        assert!((sol.optimum - 36.0).abs() < 1e-9);
        assert!((sol.primal[0] - 2.0).abs() < 1e-9);
        assert!((sol.primal[1] - 6.0).abs() < 1e-9);
        let by: f64 = sol.dual.iter().zip([4.0, 12.0, 18.0]).map(|(y, b)| y * b).sum();
        assert!((by - 36.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        // x + y = -1 with x, y >= 0
        let sol = solve(&[&[1.0, 1.0]], &[-1.0], &[1.0, 1.0], &[Pos, Pos]);
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        // max x s.t. x - y = 1
        let sol = solve(&[&[1.0, -1.0]], &[1.0], &[1.0, 0.0], &[Pos, Pos]);
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        // the second row duplicates the first
        let sol = solve(&[&[1.0, 1.0], &[2.0, 2.0]], &[1.0, 2.0], &[1.0, 2.0], &[Pos, Pos]);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.optimum - 2.0).abs() < 1e-9);
    }

    #[test]
    fn free_variable_can_go_negative() {
        // max -x s.t. x - s = -3, s >= 0 -> x = -3 + s, best x = -3
        let sol = solve(&[&[1.0, -1.0]], &[-3.0], &[-1.0, 0.0], &[Free, Pos]);
        assert!((sol.optimum - 3.0).abs() < 1e-9);
        assert!((sol.primal[0] + 3.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the textbook largest-coefficient rule.
        let sol = solve(
            &[
                &[0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0],
                &[0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0],
                &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            ],
            &[0.0, 0.0, 1.0],
            &[0.75, -150.0, 0.02, -6.0, 0.0, 0.0, 0.0],
            &[Pos; 7],
        );
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.optimum - 0.05).abs() < 1e-9);
    }

    #[test]
    fn shape_errors() {
        assert!(LinearProgram::new(DMatrix::zeros(2, 2), vec![0.0], vec![0.0; 2], vec![Pos; 2]).is_err());
        assert!(LinearProgram::new(DMatrix::zeros(1, 2), vec![0.0], vec![0.0; 3], vec![Pos; 2]).is_err());
        assert!(LinearProgram::new(DMatrix::zeros(1, 1), vec![f64::NAN], vec![0.0], vec![Pos]).is_err());
    }

    #[test]
    fn iteration_cap_reports_failure() {
        let lp =
            LinearProgram::new(DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), vec![1.0], vec![1.0, 2.0], vec![Pos, Pos])
                .unwrap();
        let tol = Tolerances { max_simplex_iterations: 0, ..Tolerances::default() };
        assert!(matches!(simplex_solve(&lp, &tol), Err(Error::SolverFailure(_))));
    }
}
