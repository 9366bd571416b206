//! Dense linear programming via two-phase revised simplex.
//!
//! Minimizes `c·x` subject to equality rows `A_eq x = b_eq`, inequality rows
//! `A_ub x <= b_ub`, and per-variable bounds (default `x >= 0`; variables may
//! be declared free or given finite bounds). Infeasible and unbounded problems
//! are reported as statuses, not errors; only numerical breakdown (iteration
//! cap without convergence) is an error.
//!
//! The implementation keeps an explicit dense basis inverse, prices with
//! Dantzig's rule, and falls back to Bland's rule after a stall to guarantee
//! termination on degenerate problems. Solves are deterministic: identical
//! problems produce bit-identical solutions within one process.

use std::fmt;

// ---------------------------------------------------------------------------
// Tolerances
// ---------------------------------------------------------------------------

/// Reduced costs smaller than this in magnitude are treated as zero.
pub const PIVOT_TOL: f64 = 1e-9;
/// Feasibility tolerance on constraint residuals and phase-1 mass.
pub const FEAS_TOL: f64 = 1e-8;
/// Iterations without objective progress before switching to Bland's rule.
const STALL_LIMIT: usize = 50;
/// Pivots between basis-inverse refactorizations.
const REFACTOR_PERIOD: usize = 200;

// ---------------------------------------------------------------------------
// Problem and solution types
// ---------------------------------------------------------------------------

/// A dense linear program in the form `min c·x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    eq_rows: Vec<Vec<f64>>,
    eq_rhs: Vec<f64>,
    ub_rows: Vec<Vec<f64>>,
    ub_rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

/// Termination status of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of a successful solve.
///
/// `value` and `x` are meaningful only when `status == Optimal`. Dual
/// multipliers follow the sign convention of `min c·x`: equality duals are
/// free, inequality duals are `<= 0`, and for problems with default bounds
/// strong duality reads `value = duals_eq·b_eq + duals_ub·b_ub`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub x: Vec<f64>,
    pub duals_eq: Vec<f64>,
    pub duals_ub: Vec<f64>,
    pub reduced_costs: Vec<f64>,
}

/// Numerical or structural failure of the solver.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    /// Row length or bound vector does not match the variable count.
    DimensionMismatch { expected: usize, found: usize },
    /// An input coefficient is NaN or infinite.
    NonFiniteInput,
    /// A variable's lower bound exceeds its upper bound.
    InconsistentBounds { var: usize },
    /// Iteration cap reached without convergence.
    IterationLimit { iterations: usize, phase: u8 },
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionMismatch { expected, found } => {
                write!(f, "row has {found} coefficients, expected {expected}")
            }
            Self::NonFiniteInput => write!(f, "problem contains NaN or infinite coefficients"),
            Self::InconsistentBounds { var } => {
                write!(f, "variable {var} has lower bound above its upper bound")
            }
            Self::IterationLimit { iterations, phase } => {
                write!(f, "simplex phase {phase} exceeded {iterations} iterations")
            }
        }
    }
}

impl std::error::Error for SolverError {}

impl LpProblem {
    /// New problem minimizing `c·x` with all variables non-negative.
    pub fn minimize(objective: &[f64]) -> Self {
        let n = objective.len();
        LpProblem {
            objective: objective.to_vec(),
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            ub_rows: Vec::new(),
            ub_rhs: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Adds `coeffs·x = rhs`.
    pub fn eq_row(mut self, coeffs: &[f64], rhs: f64) -> Self {
        assert_eq!(coeffs.len(), self.num_vars(), "eq row length");
        self.eq_rows.push(coeffs.to_vec());
        self.eq_rhs.push(rhs);
        self
    }

    /// Adds `coeffs·x <= rhs`.
    pub fn ub_row(mut self, coeffs: &[f64], rhs: f64) -> Self {
        assert_eq!(coeffs.len(), self.num_vars(), "ub row length");
        self.ub_rows.push(coeffs.to_vec());
        self.ub_rhs.push(rhs);
        self
    }

    /// Declares variable `j` free (unbounded in both directions).
    pub fn free_var(mut self, j: usize) -> Self {
        self.lower[j] = f64::NEG_INFINITY;
        self.upper[j] = f64::INFINITY;
        self
    }

    /// Sets explicit bounds for variable `j`; either side may be infinite.
    pub fn bounds(mut self, j: usize, lower: f64, upper: f64) -> Self {
        self.lower[j] = lower;
        self.upper[j] = upper;
        self
    }

    /// Plain-text tabular dump (objective, then rows) for cross-checking
    /// against other solvers.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let join = |v: &[f64]| {
            v.iter()
                .map(|c| format!("{c:>12.6}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        out.push_str(&format!("min  {}\n", join(&self.objective)));
        for (row, rhs) in self.eq_rows.iter().zip(&self.eq_rhs) {
            out.push_str(&format!("eq   {} = {rhs:.6}\n", join(row)));
        }
        for (row, rhs) in self.ub_rows.iter().zip(&self.ub_rhs) {
            out.push_str(&format!("ub   {} <= {rhs:.6}\n", join(row)));
        }
        out.push_str(&format!("lo   {}\n", join(&self.lower)));
        out.push_str(&format!("hi   {}\n", join(&self.upper)));
        out
    }

    fn validate(&self) -> Result<(), SolverError> {
        let n = self.num_vars();
        for row in self.eq_rows.iter().chain(self.ub_rows.iter()) {
            if row.len() != n {
                return Err(SolverError::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
        }
        let finite = |v: &[f64]| v.iter().all(|c| c.is_finite());
        if !finite(&self.objective)
            || !self.eq_rows.iter().all(|r| finite(r))
            || !self.ub_rows.iter().all(|r| finite(r))
            || !finite(&self.eq_rhs)
            || !finite(&self.ub_rhs)
        {
            return Err(SolverError::NonFiniteInput);
        }
        for j in 0..n {
            if self.lower[j].is_nan() || self.upper[j].is_nan() || self.lower[j] > self.upper[j] {
                return Err(SolverError::InconsistentBounds { var: j });
            }
        }
        Ok(())
    }

    /// Solves the problem.
    pub fn solve(&self) -> Result<LpSolution, SolverError> {
        self.validate()?;
        Standardized::build(self).solve()
    }
}

/// Convenience wrapper mirroring `LpProblem::solve`.
pub fn solve(problem: &LpProblem) -> Result<LpSolution, SolverError> {
    problem.solve()
}

// ---------------------------------------------------------------------------
// Standard form: min c'y  s.t.  A y = b, y >= 0
// ---------------------------------------------------------------------------

/// How an original variable maps into standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = lower + y[col]`
    Shifted { col: usize, lower: f64 },
    /// `x = y[pos] - y[neg]`
    Split { pos: usize, neg: usize },
}

struct Standardized<'a> {
    problem: &'a LpProblem,
    /// Column-major constraint matrix.
    cols: Vec<Vec<f64>>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    /// Sign applied to each row to make the rhs non-negative.
    row_sign: Vec<f64>,
    var_map: Vec<VarMap>,
    num_structural: usize,
    num_eq: usize,
}

impl<'a> Standardized<'a> {
    fn build(p: &'a LpProblem) -> Self {
        let n = p.num_vars();
        let num_eq = p.eq_rows.len();
        // Finite upper bounds become extra ub rows on the mapped variable.
        let mut extra_ub: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            if p.upper[j].is_finite() {
                extra_ub.push((j, p.upper[j]));
            }
        }
        let num_ub = p.ub_rows.len() + extra_ub.len();
        let m = num_eq + num_ub;

        // Assign standard-form columns to variables.
        let mut var_map = Vec::with_capacity(n);
        let mut next = 0usize;
        for j in 0..n {
            if p.lower[j].is_finite() {
                var_map.push(VarMap::Shifted {
                    col: next,
                    lower: p.lower[j],
                });
                next += 1;
            } else {
                var_map.push(VarMap::Split {
                    pos: next,
                    neg: next + 1,
                });
                next += 2;
            }
        }
        let num_structural = next + num_ub; // variables plus one slack per ub row
        let mut cols = vec![vec![0.0; m]; num_structural];
        let mut cost = vec![0.0; num_structural];
        let mut rhs = vec![0.0; m];

        // Lower-bound shifts move constants into the rhs.
        let fill = |row_idx: usize,
                        coeffs: &[f64],
                        b: f64,
                        rhs: &mut Vec<f64>,
                        cols: &mut Vec<Vec<f64>>| {
            let mut b_adj = b;
            for (j, &a) in coeffs.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                match var_map[j] {
                    VarMap::Shifted { col, lower } => {
                        cols[col][row_idx] += a;
                        if lower != 0.0 {
                            b_adj -= a * lower;
                        }
                    }
                    VarMap::Split { pos, neg } => {
                        cols[pos][row_idx] += a;
                        cols[neg][row_idx] -= a;
                    }
                }
            }
            rhs[row_idx] = b_adj;
        };

        for (i, (row, &b)) in p.eq_rows.iter().zip(&p.eq_rhs).enumerate() {
            fill(i, row, b, &mut rhs, &mut cols);
        }
        for (k, (row, &b)) in p.ub_rows.iter().zip(&p.ub_rhs).enumerate() {
            fill(num_eq + k, row, b, &mut rhs, &mut cols);
        }
        for (k, &(j, upper)) in extra_ub.iter().enumerate() {
            let i = num_eq + p.ub_rows.len() + k;
            match var_map[j] {
                VarMap::Shifted { col, lower } => {
                    cols[col][i] = 1.0;
                    rhs[i] = upper - lower;
                }
                VarMap::Split { pos, neg } => {
                    cols[pos][i] = 1.0;
                    cols[neg][i] = -1.0;
                    rhs[i] = upper;
                }
            }
        }
        // Slacks.
        for k in 0..num_ub {
            cols[next + k][num_eq + k] = 1.0;
        }

        for (j, &c) in p.objective.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            match var_map[j] {
                VarMap::Shifted { col, .. } => cost[col] += c,
                VarMap::Split { pos, neg } => {
                    cost[pos] += c;
                    cost[neg] -= c;
                }
            }
        }

        // Flip rows with negative rhs so the phase-1 basis is the identity.
        let mut row_sign = vec![1.0; m];
        for i in 0..m {
            if rhs[i] < 0.0 {
                row_sign[i] = -1.0;
                rhs[i] = -rhs[i];
                for col in cols.iter_mut() {
                    col[i] = -col[i];
                }
            }
        }

        Standardized {
            problem: p,
            cols,
            cost,
            rhs,
            row_sign,
            var_map,
            num_structural,
            num_eq,
        }
    }

    fn solve(self) -> Result<LpSolution, SolverError> {
        let m = self.rhs.len();
        let total = self.num_structural + m; // plus one artificial per row
        // Unflipped inequality rows start on their own slack; only equality
        // rows and flipped rows need an artificial.
        let mut basis = Vec::with_capacity(m);
        let mut need_phase1 = false;
        for i in 0..m {
            if i >= self.num_eq && self.row_sign[i] == 1.0 {
                basis.push(self.num_structural - m + i);
            } else {
                basis.push(self.num_structural + i);
                need_phase1 = true;
            }
        }
        let mut tableau = Tableau {
            std: &self,
            basis,
            binv: identity(m),
            xb: self.rhs.clone(),
            pivots: 0,
        };

        if need_phase1 {
            // Phase 1: minimize artificial mass.
            let mut c1 = vec![0.0; total];
            for c in c1.iter_mut().skip(self.num_structural) {
                *c = 1.0;
            }
            tableau.optimize(&c1, total, 1)?;
            let mass: f64 = tableau
                .basis
                .iter()
                .zip(&tableau.xb)
                .filter(|(&j, _)| j >= self.num_structural)
                .map(|(_, &v)| v)
                .sum();
            if mass > FEAS_TOL {
                return Ok(self.report(LpStatus::Infeasible, &tableau));
            }
            tableau.expel_artificials();
        }

        // Phase 2: real objective; artificials may no longer enter.
        let mut c2 = vec![0.0; total];
        c2[..self.num_structural].copy_from_slice(&self.cost);
        let status = tableau.optimize(&c2, self.num_structural, 2)?;
        if status == LpStatus::Unbounded {
            return Ok(self.report(LpStatus::Unbounded, &tableau));
        }
        Ok(self.report(LpStatus::Optimal, &tableau))
    }

    fn report(&self, status: LpStatus, t: &Tableau) -> LpSolution {
        let p = self.problem;
        let n = p.num_vars();
        if status != LpStatus::Optimal {
            return LpSolution {
                status,
                value: f64::NAN,
                x: Vec::new(),
                duals_eq: Vec::new(),
                duals_ub: Vec::new(),
                reduced_costs: Vec::new(),
            };
        }
        let m = self.rhs.len();
        let mut y_std = vec![0.0; self.num_structural];
        for (&j, &v) in t.basis.iter().zip(&t.xb) {
            if j < self.num_structural {
                y_std[j] = v;
            }
        }
        let mut x = vec![0.0; n];
        for (j, map) in self.var_map.iter().enumerate() {
            x[j] = match *map {
                VarMap::Shifted { col, lower } => lower + y_std[col],
                VarMap::Split { pos, neg } => y_std[pos] - y_std[neg],
            };
        }
        let value: f64 = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();

        // Duals: y = c_B B^{-1}, mapped back through the row sign flips.
        let mut y = vec![0.0; m];
        for (i, (yi, sign)) in y.iter_mut().zip(&self.row_sign).enumerate() {
            let mut acc = 0.0;
            for (r, &bj) in t.basis.iter().enumerate() {
                let cb = if bj < self.num_structural {
                    self.cost[bj]
                } else {
                    0.0
                };
                if cb != 0.0 {
                    acc += cb * t.binv[r][i];
                }
            }
            *yi = acc * sign;
        }
        let duals_eq = y[..self.num_eq].to_vec();
        let duals_ub = y[self.num_eq..self.num_eq + p.ub_rows.len()].to_vec();

        // Reduced costs in the original variable space.
        let mut reduced = vec![0.0; n];
        for j in 0..n {
            let mut rc = p.objective[j];
            for (i, row) in p.eq_rows.iter().enumerate() {
                rc -= duals_eq[i] * row[j];
            }
            for (i, row) in p.ub_rows.iter().enumerate() {
                rc -= duals_ub[i] * row[j];
            }
            reduced[j] = rc;
        }

        LpSolution {
            status,
            value,
            x,
            duals_eq,
            duals_ub,
            reduced_costs: reduced,
        }
    }
}

fn identity(m: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; m]; m];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    out
}

// ---------------------------------------------------------------------------
// Revised simplex core
// ---------------------------------------------------------------------------

struct Tableau<'a> {
    std: &'a Standardized<'a>,
    basis: Vec<usize>,
    binv: Vec<Vec<f64>>,
    xb: Vec<f64>,
    pivots: usize,
}

impl Tableau<'_> {
    fn num_rows(&self) -> usize {
        self.xb.len()
    }

    /// Column `j` of the full matrix (structural columns, then artificials).
    fn column(&self, j: usize, out: &mut [f64]) {
        if j < self.std.num_structural {
            out.copy_from_slice(&self.std.cols[j]);
        } else {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[j - self.std.num_structural] = 1.0;
        }
    }

    /// Runs simplex iterations for the given cost vector. Columns with index
    /// `>= enter_limit` are barred from entering the basis (used to freeze
    /// artificials out in phase 2).
    fn optimize(
        &mut self,
        cost: &[f64],
        enter_limit: usize,
        phase: u8,
    ) -> Result<LpStatus, SolverError> {
        let m = self.num_rows();
        let cap = 50 * (m + cost.len());
        let mut in_basis = vec![false; cost.len()];
        for &j in &self.basis {
            in_basis[j] = true;
        }
        let mut col_buf = vec![0.0; m];
        let mut dir = vec![0.0; m];
        let mut bland = false;
        let mut stall = 0usize;
        let mut last_obj = f64::INFINITY;

        for _iter in 0..cap {
            if self.pivots > 0 && self.pivots.is_multiple_of(REFACTOR_PERIOD) {
                self.refactorize();
            }
            // y = c_B B^{-1}
            let mut y = vec![0.0; m];
            for (r, &bj) in self.basis.iter().enumerate() {
                let cb = cost[bj];
                if cb != 0.0 {
                    for (yi, bi) in y.iter_mut().zip(&self.binv[r]) {
                        *yi += cb * bi;
                    }
                }
            }
            // Pricing.
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..enter_limit {
                if in_basis[j] {
                    continue;
                }
                let rc = if j < self.std.num_structural {
                    let col = &self.std.cols[j];
                    cost[j] - y.iter().zip(col).map(|(a, b)| a * b).sum::<f64>()
                } else {
                    cost[j] - y[j - self.std.num_structural]
                };
                if rc < -PIVOT_TOL {
                    if bland {
                        entering = Some((j, rc));
                        break;
                    }
                    match entering {
                        Some((_, best)) if rc >= best => {}
                        _ => entering = Some((j, rc)),
                    }
                }
            }
            let Some((e, _)) = entering else {
                return Ok(LpStatus::Optimal);
            };

            // Direction vector and ratio test.
            self.column(e, &mut col_buf);
            for (r, d) in dir.iter_mut().enumerate() {
                *d = self.binv[r]
                    .iter()
                    .zip(&col_buf)
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
            }
            let mut leave: Option<(usize, f64)> = None;
            for (r, &d) in dir.iter().enumerate() {
                if d > PIVOT_TOL {
                    let ratio = self.xb[r] / d;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - 1e-12
                                || (ratio < lratio + 1e-12 && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Ok(LpStatus::Unbounded);
            };

            in_basis[self.basis[r]] = false;
            in_basis[e] = true;
            self.pivot(r, e, &dir);

            let obj: f64 = self
                .basis
                .iter()
                .zip(&self.xb)
                .map(|(&j, &v)| cost[j] * v)
                .sum();
            if obj < last_obj - 1e-12 {
                last_obj = obj;
                stall = 0;
                bland = false;
            } else {
                stall += 1;
                if stall >= STALL_LIMIT {
                    bland = true;
                }
            }
        }
        Err(SolverError::IterationLimit {
            iterations: cap,
            phase,
        })
    }

    fn pivot(&mut self, r: usize, entering: usize, dir: &[f64]) {
        let m = self.num_rows();
        let pivot = dir[r];
        for i in 0..m {
            if i == r {
                continue;
            }
            let factor = dir[i] / pivot;
            if factor != 0.0 {
                let (row_i, row_r) = if i < r {
                    let (a, b) = self.binv.split_at_mut(r);
                    (&mut a[i], &b[0])
                } else {
                    let (a, b) = self.binv.split_at_mut(i);
                    (&mut b[0], &a[r])
                };
                for (vi, vr) in row_i.iter_mut().zip(row_r.iter()) {
                    *vi -= factor * vr;
                }
                self.xb[i] -= factor * self.xb[r];
                if self.xb[i].abs() < 1e-14 {
                    self.xb[i] = 0.0;
                }
            }
        }
        for v in self.binv[r].iter_mut() {
            *v /= pivot;
        }
        self.xb[r] /= pivot;
        self.basis[r] = entering;
        self.pivots += 1;
    }

    /// Recomputes the basis inverse and basic values from scratch
    /// (Gauss-Jordan with partial pivoting), bounding drift from the
    /// incremental updates. Kept only if it reproduces `B^{-1} B = I`.
    fn refactorize(&mut self) {
        let m = self.num_rows();
        let mut aug = vec![vec![0.0; 2 * m]; m];
        let mut col = vec![0.0; m];
        for (k, &j) in self.basis.iter().enumerate() {
            self.column(j, &mut col);
            for i in 0..m {
                aug[i][k] = col[i];
            }
        }
        for (i, row) in aug.iter_mut().enumerate() {
            row[m + i] = 1.0;
        }
        for k in 0..m {
            let mut best = k;
            for i in k + 1..m {
                if aug[i][k].abs() > aug[best][k].abs() {
                    best = i;
                }
            }
            aug.swap(k, best);
            let piv = aug[k][k];
            if piv.abs() < 1e-13 {
                return; // singular; keep the incremental inverse
            }
            for v in aug[k].iter_mut() {
                *v /= piv;
            }
            for i in 0..m {
                if i == k {
                    continue;
                }
                let f = aug[i][k];
                if f != 0.0 {
                    let (row_i, row_k) = if i < k {
                        let (a, b) = aug.split_at_mut(k);
                        (&mut a[i], &b[0])
                    } else {
                        let (a, b) = aug.split_at_mut(i);
                        (&mut b[0], &a[k])
                    };
                    for (vi, vk) in row_i.iter_mut().zip(row_k.iter()) {
                        *vi -= f * vk;
                    }
                }
            }
        }
        self.binv = aug.into_iter().map(|row| row[m..].to_vec()).collect();
        for i in 0..m {
            let v: f64 = self.binv[i]
                .iter()
                .zip(&self.std.rhs)
                .map(|(a, b)| a * b)
                .sum();
            self.xb[i] = if v.abs() < 1e-14 { 0.0 } else { v };
        }
    }

    /// After phase 1, pivots artificial variables out of the basis wherever a
    /// structural column has a nonzero coefficient in their row. Rows that
    /// admit no such pivot are redundant; their artificials stay basic at
    /// zero and are barred from re-entering in phase 2.
    fn expel_artificials(&mut self) {
        let m = self.num_rows();
        let ns = self.std.num_structural;
        let mut dir = vec![0.0; m];
        for r in 0..m {
            if self.basis[r] < ns {
                continue;
            }
            for j in 0..ns {
                if self.basis.contains(&j) {
                    continue;
                }
                let col = &self.std.cols[j];
                let d: f64 = self.binv[r].iter().zip(col).map(|(a, b)| a * b).sum();
                if d.abs() > 1e-7 {
                    for (i, di) in dir.iter_mut().enumerate() {
                        *di = self.binv[i].iter().zip(col).map(|(a, b)| a * b).sum();
                    }
                    let dir_copy = dir.clone();
                    self.pivot(r, j, &dir_copy);
                    break;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
