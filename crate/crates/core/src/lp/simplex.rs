//! Two-phase dense tableau simplex for problems in standard form
//! `min cᵀz  s.t.  G z = h,  0 ≤ z ≤ u` (`u` may be infinite).
//!
//! Pricing is Dantzig's most-negative reduced cost. After a run of
//! degenerate pivots the solver switches to Bland's smallest-index rule and
//! stays there until the objective strictly improves, so it cannot cycle.
//! The initial basis reuses singleton columns (slack-like columns with a
//! single positive entry) and only adds artificial variables for the rows
//! that lack one.
//!
//! A nonbasic variable sitting at its upper bound is stored substituted,
//! `z = u − z'`, so every nonbasic variable is at zero in the tableau's own
//! frame and the textbook pivot applies unchanged.

use nalgebra::DMatrix;

use super::{linalg, DenseMatrix, LpError};

/// Default primal feasibility tolerance.
pub const DEFAULT_FEAS_TOL: f64 = 1e-8;

const PIVOT_TOL: f64 = 1e-7;
const OPTIMALITY_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;
const DEGENERATE_STREAK: usize = 50;
/// Minimum pivots between periodic reinversions; large tableaus wait
/// longer since a reinversion costs about as much as `rows` pivots.
const REINVERT_EVERY: usize = 100;
const HARRIS_SLACK: f64 = 1e-9;
/// A column with no usable pivot but a reduced cost this close to zero is
/// round-off, not a ray; it is skipped rather than reported as unbounded.
const NEAR_OPTIMAL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    eq_matrix: DenseMatrix,
    eq_rhs: Vec<f64>,
    upper: Vec<f64>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, eq_matrix: DenseMatrix, eq_rhs: Vec<f64>) -> Result<Self, LpError> {
        if eq_matrix.cols() != objective.len() {
            return Err(LpError::DimensionMismatch(format!(
                "{} cost coefficients for {} columns",
                objective.len(),
                eq_matrix.cols()
            )));
        }
        if eq_matrix.rows() != eq_rhs.len() {
            return Err(LpError::DimensionMismatch(format!(
                "{} right-hand sides for {} rows",
                eq_rhs.len(),
                eq_matrix.rows()
            )));
        }
        if objective.iter().chain(&eq_rhs).chain(eq_matrix.entries()).any(|v| !v.is_finite()) {
            return Err(LpError::DimensionMismatch("non-finite problem data".into()));
        }
        let upper = vec![f64::INFINITY; objective.len()];
        Ok(Self {
            objective,
            eq_matrix,
            eq_rhs,
            upper,
        })
    }

    /// Adds `z ≤ upper`; use `f64::INFINITY` for unbounded variables.
    pub fn with_upper_bounds(mut self, upper: Vec<f64>) -> Result<Self, LpError> {
        if upper.len() != self.objective.len() {
            return Err(LpError::DimensionMismatch(format!(
                "{} upper bounds for {} columns",
                upper.len(),
                self.objective.len()
            )));
        }
        if upper.iter().any(|&u| u.is_nan() || u < 0.0) {
            return Err(LpError::DimensionMismatch("upper bounds must be nonnegative".into()));
        }
        self.upper = upper;
        Ok(self)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.eq_rhs.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn eq_matrix(&self) -> &DenseMatrix {
        &self.eq_matrix
    }

    pub fn eq_rhs(&self) -> &[f64] {
        &self.eq_rhs
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.upper
    }

    /// `‖G z − h‖_∞`.
    pub fn residual(&self, z: &[f64]) -> f64 {
        (0..self.num_constraints())
            .map(|i| {
                let lhs: f64 = self.eq_matrix.row(i).iter().zip(z).map(|(a, b)| a * b).sum();
                (lhs - self.eq_rhs[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest violation of `0 ≤ z ≤ u`.
    pub fn bound_violation(&self, z: &[f64]) -> f64 {
        z.iter()
            .zip(&self.upper)
            .map(|(&v, &u)| (-v).max(v - u))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective_value: f64,
    /// Multipliers `π` of `G z = h` at the optimal basis: reduced costs
    /// `c − Gᵀπ` are ≥ 0 at lower bounds, ≤ 0 at upper bounds, 0 in between.
    /// Empty unless the status is optimal.
    pub duals: Vec<f64>,
}

impl LpSolution {
    fn without_optimum(status: LpStatus, n: usize) -> Self {
        Self {
            status,
            values: vec![0.0; n],
            objective_value: match status {
                LpStatus::Unbounded => f64::NEG_INFINITY,
                _ => f64::INFINITY,
            },
            duals: Vec::new(),
        }
    }
}

struct Tableau {
    rows: usize,
    /// structural + artificial columns, excluding the rhs
    cols: usize,
    structural: usize,
    width: usize,
    data: Vec<f64>,
    /// the starting tableau (scaled rows, current substitutions), kept
    /// for reinversion
    original: Vec<f64>,
    /// reduced costs, with the negated objective value in the last slot
    costs: Vec<f64>,
    /// costs of the current phase, unreduced and unsubstituted
    phase_costs: Vec<f64>,
    upper: Vec<f64>,
    /// column `j` currently holds `u_j − z_j`
    flipped: Vec<bool>,
    basis: Vec<usize>,
    iterations: usize,
    max_iterations: usize,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

enum Step {
    /// the entering variable runs into its own upper bound
    Flip,
    Pivot { row: usize, to_upper: bool },
    Unbounded,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.data[r * self.width + self.cols]
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    fn basic_upper(&self, r: usize) -> f64 {
        self.upper[self.basis[r]]
    }

    fn choose_entering(&self, bland: bool, skip: &[bool]) -> Option<usize> {
        let limit = self.structural;
        if bland {
            return (0..limit).find(|&j| !skip[j] && self.costs[j] < -OPTIMALITY_TOL);
        }
        let mut best = None;
        let mut best_val = -OPTIMALITY_TOL;
        for j in 0..limit {
            if !skip[j] && self.costs[j] < best_val {
                best_val = self.costs[j];
                best = Some(j);
            }
        }
        best
    }

    /// Distance the entering column `q` can move before row `r` hits a
    /// bound, and whether that bound is the upper one. `slack` loosens the
    /// bound (Harris pass one).
    fn row_limit(&self, r: usize, q: usize, slack: f64) -> Option<(f64, bool)> {
        let a = self.at(r, q);
        let beta = self.rhs(r);
        if a > PIVOT_TOL {
            Some(((beta.max(0.0) + slack) / a, false))
        } else if a < -PIVOT_TOL {
            let u = self.basic_upper(r);
            u.is_finite().then(|| ((u - beta.min(u)).max(0.0) + slack) / -a).map(|t| (t, true))
        } else {
            None
        }
    }

    /// Minimum-ratio row; ties go to the row whose basic variable has the
    /// smallest index. This exact rule is what keeps Bland mode finite.
    fn choose_step_bland(&self, q: usize) -> Step {
        let mut best: Option<(usize, f64, bool)> = None;
        for r in 0..self.rows {
            let Some((ratio, to_upper)) = self.row_limit(r, q, 0.0) else {
                continue;
            };
            match best {
                None => best = Some((r, ratio, to_upper)),
                Some((br, bv, _)) => {
                    if ratio < bv - 1e-12 || (ratio <= bv + 1e-12 && self.basis[r] < self.basis[br]) {
                        best = Some((r, ratio, to_upper));
                    }
                }
            }
        }
        match best {
            Some((_, ratio, _)) if self.upper[q] <= ratio => Step::Flip,
            Some((row, _, to_upper)) => Step::Pivot { row, to_upper },
            None if self.upper[q].is_finite() => Step::Flip,
            None => Step::Unbounded,
        }
    }

    /// Harris two-pass ratio test: among rows whose ratio is within a small
    /// feasibility slack of the minimum, pivot on the largest entry. Avoids
    /// tiny pivots at the cost of letting basics overshoot a bound by at
    /// most the slack.
    fn choose_step_harris(&self, q: usize) -> Step {
        let mut bound = f64::INFINITY;
        let mut exact = f64::INFINITY;
        for r in 0..self.rows {
            if let Some((t, _)) = self.row_limit(r, q, HARRIS_SLACK) {
                bound = bound.min(t);
            }
            if let Some((t, _)) = self.row_limit(r, q, 0.0) {
                exact = exact.min(t);
            }
        }
        if self.upper[q].is_finite() && self.upper[q] <= exact {
            return Step::Flip;
        }
        if !bound.is_finite() {
            return Step::Unbounded;
        }
        let mut best: Option<(usize, f64, bool)> = None;
        for r in 0..self.rows {
            let Some((t, to_upper)) = self.row_limit(r, q, 0.0) else {
                continue;
            };
            if t > bound {
                continue;
            }
            let a = self.at(r, q).abs();
            match best {
                Some((br, ba, _)) if a < ba || (a == ba && self.basis[r] > self.basis[br]) => {}
                _ => best = Some((r, a, to_upper)),
            }
        }
        match best {
            Some((row, _, to_upper)) => Step::Pivot { row, to_upper },
            None => Step::Unbounded,
        }
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let w = self.width;
        let inv = 1.0 / self.data[p * w + q];
        let mut nz: Vec<(usize, f64)> = Vec::new();
        for j in 0..w {
            let v = self.data[p * w + j];
            if v != 0.0 {
                let scaled = v * inv;
                self.data[p * w + j] = scaled;
                nz.push((j, scaled));
            }
        }
        self.data[p * w + q] = 1.0;
        for r in 0..self.rows {
            if r == p {
                continue;
            }
            let f = self.data[r * w + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[r * w..(r + 1) * w];
            for &(j, v) in &nz {
                let updated = row[j] - f * v;
                row[j] = if updated.abs() < DROP_TOL { 0.0 } else { updated };
            }
            row[q] = 0.0;
        }
        let f = self.costs[q];
        if f != 0.0 {
            for &(j, v) in &nz {
                self.costs[j] -= f * v;
            }
            self.costs[q] = 0.0;
        }
        self.basis[p] = q;
    }

    /// Substitutes `z_j ↦ u_j − z_j` in nonbasic column `j`.
    fn flip(&mut self, j: usize) {
        let (w, cols) = (self.width, self.cols);
        let u = self.upper[j];
        for table in [&mut self.data, &mut self.original] {
            for r in 0..self.rows {
                let a = table[r * w + j];
                if a != 0.0 {
                    table[r * w + cols] -= a * u;
                    table[r * w + j] = -a;
                }
            }
        }
        let d = self.costs[j];
        self.costs[cols] -= d * u;
        self.costs[j] = -d;
        self.flipped[j] = !self.flipped[j];
    }

    fn run(&mut self) -> Result<PhaseOutcome, LpError> {
        let mut streak = 0usize;
        let mut skip = vec![false; self.structural];
        let mut skipped = false;
        let cost_scale = self.phase_costs.iter().fold(1.0f64, |a, c| a.max(c.abs()));
        loop {
            if self.iterations >= self.max_iterations {
                return Err(LpError::IterationLimit {
                    iterations: self.iterations,
                });
            }
            let bland = streak >= DEGENERATE_STREAK;
            let Some(q) = self.choose_entering(bland, &skip) else {
                return Ok(PhaseOutcome::Optimal);
            };
            let step = if bland {
                self.choose_step_bland(q)
            } else {
                self.choose_step_harris(q)
            };
            let (length, pivot) = match step {
                Step::Unbounded => {
                    if self.costs[q] > -NEAR_OPTIMAL_TOL * cost_scale {
                        skip[q] = true;
                        skipped = true;
                        continue;
                    }
                    return Ok(PhaseOutcome::Unbounded);
                }
                Step::Flip => (self.upper[q], None),
                Step::Pivot { row, to_upper } => (self.row_limit(row, q, 0.0).map_or(0.0, |(t, _)| t), Some((row, to_upper))),
            };
            if length * self.costs[q].abs() > 1e-12 {
                streak = 0;
                // skipped columns may price differently once the objective moves
                if skipped {
                    skip.iter_mut().for_each(|s| *s = false);
                    skipped = false;
                }
            } else {
                streak += 1;
            }
            match pivot {
                None => self.flip(q),
                Some((p, to_upper)) => {
                    let leaving = self.basis[p];
                    self.pivot(p, q);
                    if to_upper {
                        self.flip(leaving);
                    }
                }
            }
            self.iterations += 1;
            if self.iterations % REINVERT_EVERY.max(2 * self.rows) == 0 {
                self.reinvert();
            }
        }
    }

    /// Rebuilds the tableau as `B⁻¹ [G | h]` from the original rows, which
    /// discards round-off accumulated over many pivots. Returns false (and
    /// leaves the tableau alone) if the basis matrix is singular.
    fn reinvert(&mut self) -> bool {
        let (m, w) = (self.rows, self.width);
        let b = DMatrix::from_fn(m, m, |i, k| self.original[i * w + self.basis[k]]);
        let rhs = DMatrix::from_row_slice(m, w, &self.original);
        let Some(t) = b.lu().solve(&rhs) else {
            return false;
        };
        if t.iter().any(|v| !v.is_finite()) {
            return false;
        }
        for r in 0..m {
            for j in 0..w {
                let v = t[(r, j)];
                self.data[r * w + j] = if v.abs() < DROP_TOL { 0.0 } else { v };
            }
        }
        for (r, &j) in self.basis.iter().enumerate() {
            for i in 0..m {
                self.data[i * w + j] = if i == r { 1.0 } else { 0.0 };
            }
        }
        let costs = std::mem::take(&mut self.phase_costs);
        self.set_costs(&costs);
        true
    }

    /// Runs to optimality, then reinverts once and resumes if the fresh
    /// tableau disagrees.
    fn run_clean(&mut self) -> Result<PhaseOutcome, LpError> {
        let outcome = self.run()?;
        if matches!(outcome, PhaseOutcome::Optimal) && self.reinvert() {
            return self.run();
        }
        Ok(outcome)
    }

    /// Installs phase costs (length `cols`, in terms of the original
    /// variables) and reduces them against the current basis.
    fn set_costs(&mut self, costs: &[f64]) {
        self.phase_costs = costs.to_vec();
        let mut d = vec![0.0; self.width];
        for (j, &c) in costs.iter().enumerate() {
            d[j] = if self.flipped[j] { -c } else { c };
        }
        for r in 0..self.rows {
            let cb = d[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.data[r * self.width..(r + 1) * self.width];
            for (dj, a) in d.iter_mut().zip(row) {
                *dj -= cb * a;
            }
        }
        // basic columns price to exactly zero
        for &j in &self.basis {
            d[j] = 0.0;
        }
        self.costs = d;
    }

    /// Values of the structural variables in the original frame.
    fn values(&self) -> Vec<f64> {
        let n = self.structural;
        let mut frame = vec![0.0; n];
        for r in 0..self.rows {
            if self.basis[r] < n {
                frame[self.basis[r]] = self.rhs(r);
            }
        }
        frame
            .into_iter()
            .enumerate()
            .map(|(j, v)| if self.flipped[j] { self.upper[j] - v } else { v })
            .collect()
    }
}

/// Solves `min cᵀz s.t. G z = h, 0 ≤ z ≤ u`.
///
/// Optimal solutions satisfy `‖G z − h‖_∞ ≤ feas_tol` and bound violations
/// of at most `feas_tol`; if the tableau drifts past that, the basic
/// solution is recomputed from the original data before giving up with
/// [`LpError::NumericalBreakdown`].
pub fn solve_lp(problem: &LpProblem, feas_tol: f64) -> Result<LpSolution, LpError> {
    if !(feas_tol > 0.0) {
        return Err(LpError::InvalidTolerance(feas_tol));
    }
    let m = problem.num_constraints();
    let n = problem.num_vars();
    let g = problem.eq_matrix();

    // row multipliers: nonnegative rhs, largest entry of unit magnitude
    let mut scale = vec![1.0; m];
    for (r, s) in scale.iter_mut().enumerate() {
        let big = g.row(r).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if big > 0.0 {
            *s = 1.0 / big;
        }
        if problem.eq_rhs[r] < 0.0 {
            *s = -*s;
        }
    }

    // crash basis from singleton columns
    let mut nnz_col = vec![0usize; n];
    let mut owner = vec![usize::MAX; n];
    for r in 0..m {
        for (j, &v) in g.row(r).iter().enumerate() {
            if v != 0.0 {
                nnz_col[j] += 1;
                owner[j] = r;
            }
        }
    }
    let mut crash: Vec<Option<usize>> = vec![None; m];
    for j in 0..n {
        if nnz_col[j] != 1 {
            continue;
        }
        let r = owner[j];
        let a = scale[r] * g[(r, j)];
        if crash[r].is_none() && a > 0.0 && scale[r] * problem.eq_rhs[r] / a <= problem.upper[j] {
            crash[r] = Some(j);
        }
    }
    let artificial_rows: Vec<usize> = (0..m).filter(|&r| crash[r].is_none()).collect();
    let cols = n + artificial_rows.len();
    let width = cols + 1;

    let mut original = vec![0.0; m * width];
    for r in 0..m {
        for (j, &v) in g.row(r).iter().enumerate() {
            original[r * width + j] = scale[r] * v;
        }
        original[r * width + cols] = scale[r] * problem.eq_rhs[r];
    }
    for (k, &r) in artificial_rows.iter().enumerate() {
        original[r * width + n + k] = 1.0;
    }
    let mut data = original.clone();
    let mut basis = vec![0usize; m];
    for r in 0..m {
        let row = &mut data[r * width..(r + 1) * width];
        if let Some(j) = crash[r] {
            let s = 1.0 / row[j];
            for v in row.iter_mut() {
                *v *= s;
            }
            row[j] = 1.0;
            basis[r] = j;
        }
    }
    for (k, &r) in artificial_rows.iter().enumerate() {
        basis[r] = n + k;
    }

    let mut upper = problem.upper.clone();
    upper.resize(cols, f64::INFINITY);
    let mut tab = Tableau {
        rows: m,
        cols,
        structural: n,
        width,
        data,
        original,
        costs: Vec::new(),
        phase_costs: Vec::new(),
        upper,
        flipped: vec![false; cols],
        basis,
        iterations: 0,
        max_iterations: 50 * (m + cols) + 1000,
    };

    let rhs_scale = (0..m).fold(1.0f64, |a, r| a.max(tab.rhs(r).abs()));

    if !artificial_rows.is_empty() {
        let mut phase1 = vec![0.0; cols];
        for c in phase1.iter_mut().skip(n) {
            *c = 1.0;
        }
        tab.set_costs(&phase1);
        // phase 1 is bounded below by zero
        tab.run()?;
        if -tab.costs[cols] > feas_tol * rhs_scale && tab.reinvert() {
            tab.run()?;
        }
        let infeasibility = -tab.costs[cols];
        if infeasibility > feas_tol * rhs_scale {
            return Ok(LpSolution::without_optimum(LpStatus::Infeasible, n));
        }
        // drive zero-level artificials out of the basis; rows where that
        // is impossible are redundant and keep their artificial at zero
        for r in 0..m {
            if tab.basis[r] < n {
                continue;
            }
            let mut best = None;
            let mut best_abs = PIVOT_TOL;
            for j in 0..n {
                let a = tab.at(r, j).abs();
                if a > best_abs {
                    best_abs = a;
                    best = Some(j);
                }
            }
            if let Some(j) = best {
                tab.pivot(r, j);
            }
        }
    }

    let mut costs = problem.objective.clone();
    costs.resize(cols, 0.0);
    tab.set_costs(&costs);
    let mut outcome = tab.run()?;
    if matches!(outcome, PhaseOutcome::Unbounded) && tab.reinvert() {
        // a ray found on a drifted tableau is often an artifact
        outcome = tab.run()?;
    }
    if let PhaseOutcome::Unbounded = outcome {
        return Ok(LpSolution::without_optimum(LpStatus::Unbounded, n));
    }

    let tol_ok = |values: &[f64]| problem.residual(values) <= feas_tol && problem.bound_violation(values) <= feas_tol;
    let mut values = tab.values();
    if !tol_ok(&values) && tab.reinvert() {
        if let PhaseOutcome::Unbounded = tab.run_clean()? {
            return Ok(LpSolution::without_optimum(LpStatus::Unbounded, n));
        }
        values = tab.values();
    }
    if !tol_ok(&values) {
        values = refine(problem, &tab)?;
        if !tol_ok(&values) {
            return Err(LpError::NumericalBreakdown {
                residual: problem.residual(&values).max(problem.bound_violation(&values)),
            });
        }
    }
    let duals = duals(problem, &tab, &scale, &artificial_rows)?;
    let objective_value = problem.objective.iter().zip(&values).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        values,
        objective_value,
        duals,
    })
}

/// Recomputes basic values from the original constraint data, holding
/// nonbasic variables at their current bound.
fn refine(problem: &LpProblem, tab: &Tableau) -> Result<Vec<f64>, LpError> {
    let n = tab.structural;
    let basic: Vec<usize> = tab.basis.iter().copied().filter(|&j| j < n).collect();
    let is_basic = {
        let mut b = vec![false; n];
        basic.iter().for_each(|&j| b[j] = true);
        b
    };
    let mut values = vec![0.0; n];
    for j in 0..n {
        if !is_basic[j] && tab.flipped[j] {
            values[j] = problem.upper[j];
        }
    }
    let g = problem.eq_matrix();
    let rhs: Vec<f64> = (0..problem.num_constraints())
        .map(|r| problem.eq_rhs[r] - g.row(r).iter().zip(&values).map(|(a, v)| a * v).sum::<f64>())
        .collect();
    let xb = linalg::least_squares(&g.select_columns(&basic), &rhs)
        .map_err(|_| LpError::NumericalBreakdown { residual: f64::NAN })?;
    for (&j, v) in basic.iter().zip(xb) {
        values[j] = v;
    }
    Ok(values)
}

/// Solves `Bᵀπ = c_B` against the unscaled rows. An artificial left basic
/// on a redundant row pins that row's multiplier to zero.
fn duals(problem: &LpProblem, tab: &Tableau, scale: &[f64], artificial_rows: &[usize]) -> Result<Vec<f64>, LpError> {
    let (m, n) = (tab.rows, tab.structural);
    if m == 0 {
        return Ok(Vec::new());
    }
    let g = problem.eq_matrix();
    let b = DMatrix::from_fn(m, m, |i, k| {
        let j = tab.basis[k];
        if j < n {
            g[(i, j)]
        } else if artificial_rows[j - n] == i {
            1.0 / scale[i]
        } else {
            0.0
        }
    });
    let cb = nalgebra::DVector::from_fn(m, |k, _| {
        let j = tab.basis[k];
        if j < n {
            problem.objective[j]
        } else {
            0.0
        }
    });
    b.transpose()
        .lu()
        .solve(&cb)
        .filter(|pi| pi.iter().all(|v| v.is_finite()))
        .map(|pi| pi.iter().copied().collect())
        .ok_or(LpError::NumericalBreakdown { residual: f64::NAN })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(c: &[f64], g: &[&[f64]], h: &[f64]) -> LpProblem {
        let g = DenseMatrix::from_rows(g).unwrap();
        LpProblem::new(c.to_vec(), g, h.to_vec()).unwrap()
    }

    #[test]
    fn segment_objective_is_one() {
        let sol = solve_lp(&lp(&[1.0, 1.0], &[&[1.0, 1.0]], &[1.0]), DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_row() {
        let sol = solve_lp(&lp(&[1.0, 0.0], &[&[1.0, -1.0]], &[-1.0]), DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.objective_value, 0.0);
        assert_eq!(sol.values, vec![0.0, 1.0]);
    }

    #[test]
    fn unbounded_direction() {
        let sol = solve_lp(&lp(&[-1.0], &[&[0.0]], &[0.0]), DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn infeasible_system() {
        // x1 + x2 = 1 and x1 + x2 = 2
        let sol = solve_lp(&lp(&[1.0, 1.0], &[&[1.0, 1.0], &[1.0, 1.0]], &[1.0, 2.0]), DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        // x ≥ 0 cannot sum to −1
        let sol = solve_lp(&lp(&[0.0, 0.0], &[&[1.0, 1.0]], &[-1.0]), DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let sol = solve_lp(
            &lp(&[2.0, 1.0, 0.0], &[&[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0], &[1.0, 0.0, -1.0]], &[4.0, 8.0, 0.0]),
            DEFAULT_FEAS_TOL,
        )
        .unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        // x1 = x3, x1 + x2 + x3 = 4: cheapest is x2 = 4 at cost 4, or x1 = x3 = 2 at cost 4
        assert!((sol.objective_value - 4.0).abs() < 1e-9);
    }

    #[test]
    fn dimension_checks() {
        let g = DenseMatrix::from_rows(&[[1.0, 1.0]]).unwrap();
        assert!(matches!(
            LpProblem::new(vec![1.0], g.clone(), vec![1.0]),
            Err(LpError::DimensionMismatch(_))
        ));
        assert!(matches!(
            LpProblem::new(vec![1.0, 1.0], g.clone(), vec![1.0, 2.0]),
            Err(LpError::DimensionMismatch(_))
        ));
        let ok = LpProblem::new(vec![1.0, 1.0], g, vec![1.0]).unwrap();
        assert!(matches!(solve_lp(&ok, 0.0), Err(LpError::InvalidTolerance(_))));
    }

    #[test]
    fn empty_problem() {
        let sol = solve_lp(
            &LpProblem::new(vec![1.0, 2.0], DenseMatrix::zeros(0, 2), vec![]).unwrap(),
            DEFAULT_FEAS_TOL,
        )
        .unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.values, vec![0.0, 0.0]);
    }

    #[test]
    fn upper_bounds_cap_the_optimum() {
        // min −2a − b, a + b + s = 3, a ≤ 1
        let p = lp(&[-2.0, -1.0, 0.0], &[&[1.0, 1.0, 1.0]], &[3.0])
            .with_upper_bounds(vec![1.0, f64::INFINITY, f64::INFINITY])
            .unwrap();
        let sol = solve_lp(&p, DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value + 4.0).abs() < 1e-12);
        assert!((sol.values[0] - 1.0).abs() < 1e-12 && (sol.values[1] - 2.0).abs() < 1e-12);
        // π = −1 prices b and s to zero; a sits at its bound with d = −1
        assert!((sol.duals[0] + 1.0).abs() < 1e-12);
        assert!(lp(&[1.0], &[&[1.0]], &[1.0]).with_upper_bounds(vec![-1.0]).is_err());
    }

    #[test]
    fn bound_only_moves_without_pivots() {
        // both variables jump straight to their upper bounds
        let p = lp(&[-1.0, -1.0, 0.0], &[&[1.0, 1.0, 1.0]], &[10.0])
            .with_upper_bounds(vec![2.0, 3.0, f64::INFINITY])
            .unwrap();
        let sol = solve_lp(&p, DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(sol.values, vec![2.0, 3.0, 5.0]);
        assert_eq!(sol.duals, vec![0.0]);
    }

    #[test]
    fn degenerate_textbook_cycling_example() {
        // Beale's example, which cycles under pure Dantzig pricing with naive ties.
        // min -3/4 x4 + 150 x5 - 1/50 x6 + 6 x7, slacks x1..x3
        let c = [0.0, 0.0, 0.0, -0.75, 150.0, -0.02, 6.0];
        let g: [&[f64]; 3] = [
            &[1.0, 0.0, 0.0, 0.25, -60.0, -0.04, 9.0],
            &[0.0, 1.0, 0.0, 0.5, -90.0, -0.02, 3.0],
            &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0],
        ];
        let sol = solve_lp(&lp(&c, &g, &[0.0, 0.0, 1.0]), DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value + 0.05).abs() < 1e-9);
    }
}
