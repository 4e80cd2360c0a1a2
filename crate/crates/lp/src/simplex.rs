//! Bounded-variable primal revised simplex.
//!
//! Every row gets a slack column (`>=` rows are negated first, so slacks are
//! `[0, inf)` for inequalities and `[0, 0]` for equalities) and a potential
//! artificial column. Phase 1 drives the artificials to zero, phase 2
//! optimizes the real objective with the artificials fixed at zero.
//! Variable bounds are handled natively: a nonbasic variable sits at its
//! lower or upper bound and the ratio test includes bound flips.

use log::{debug, trace};

use crate::basis::{BasisInverse, SparseVec};
use crate::error::LpError;
use crate::problem::{check_feasibility, LinearProgram, LpSolution, LpStatus, Relation};

/// Smallest pivot magnitude accepted in the ratio test and in refactorization.
pub const PIVOT_TOL: f64 = 1e-7;
const DUAL_TOL: f64 = 1e-9;
/// Bound slack allowed by the Harris ratio test.
const HARRIS_TOL: f64 = 1e-9;
/// Phase-1 residual above which the program is declared infeasible.
const PHASE1_TOL: f64 = 1e-7;
/// Consecutive degenerate pivots before perturbing, and again before
/// switching to Bland's rule.
const STALL_THRESHOLD: usize = 50;
/// Relative size of the bound perturbation applied on a stall.
const PERTURB: f64 = 1e-6;
const REFACTOR_EVERY: usize = 100;
/// Smallest pivot accepted when rebuilding the eta file. Lower than
/// [`PIVOT_TOL`]: the rebuild eliminates in a different order than the pivots
/// that formed the basis, so its pivots can be smaller on a sound basis.
const REFACTOR_TOL: f64 = 1e-11;
const NONE: usize = usize::MAX;
/// Basic bound violation after refactorization that triggers a repair.
const REPAIR_TRIGGER: f64 = 1e-8;
/// Bound violation regarded as infeasible during a repair.
const REPAIR_TOL: f64 = 1e-9;

/// Position of a structural or slack column in a basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
}

/// Final basis of a solve: one status per variable and one per row slack.
/// Fed back to [`solve_lp_warm`] after rows have been appended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    pub vars: Vec<VarStatus>,
    pub rows: Vec<VarStatus>,
}

/// Solves `lp` to optimality or returns an infeasible/unbounded verdict.
///
/// The pivot sequence is a pure function of the input: Dantzig pricing with
/// lowest-index ties, Harris ratio test, and Bland's rule while stalled.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_lp_warm(lp, None).map(|(sol, _)| sol)
}

/// Like [`solve_lp`], starting from `start` when given. The start must have
/// one status per variable and at most one per row; rows past its end (rows
/// appended since) start with a basic slack. A start that does not lead to a
/// feasible basis falls back to a cold solve.
pub fn solve_lp_warm(lp: &LinearProgram, start: Option<&Basis>) -> Result<(LpSolution, Basis), LpError> {
    lp.validate()?;
    let cap = 50 * (lp.num_vars() + lp.num_constraints()).max(1);
    if let Some(start) = start.filter(|b| b.vars.len() == lp.num_vars() && b.rows.len() <= lp.num_constraints()) {
        let mut s = Simplex::warm(lp, start);
        s.refactor();
        match s.repair(cap) {
            Ok(()) => return phase2(s, lp, cap),
            Err(e) => debug!("warm start abandoned: {e}"),
        }
    }
    let mut s = Simplex::new(lp);

    // Phase 1.
    if s.num_artificial > 0 {
        s.cost = vec![0.0; s.ncols];
        for i in 0..s.m {
            let a = s.art(i);
            if s.up[a] > 0.0 {
                s.cost[a] = 1.0;
            }
        }
        match s.run(cap)? {
            Outcome::Optimal => {}
            Outcome::Unbounded => {
                return Err(s.breakdown("phase 1 reported an unbounded ray"));
            }
        }
        let worst = (0..s.m).map(|i| s.x[s.art(i)]).fold(0.0, f64::max);
        debug!("phase 1 done after {} iterations, max artificial {worst:e}", s.iterations);
        if worst > PHASE1_TOL {
            let basis = s.basis_status();
            return Ok((
                LpSolution {
                    status: LpStatus::Infeasible,
                    objective_value: f64::INFINITY,
                    values: s.x[..s.n].to_vec(),
                    iterations: s.iterations,
                },
                basis,
            ));
        }
        for i in 0..s.m {
            let a = s.art(i);
            s.up[a] = 0.0;
            if s.pos[a] == NONE {
                s.x[a] = 0.0;
                s.at_upper[a] = false;
            }
        }
    }
    phase2(s, lp, cap)
}

fn phase2(mut s: Simplex, lp: &LinearProgram, cap: usize) -> Result<(LpSolution, Basis), LpError> {
    s.cost = vec![0.0; s.ncols];
    s.cost[..s.n].copy_from_slice(lp.objective());
    match s.run(cap)? {
        Outcome::Unbounded => {
            let basis = s.basis_status();
            return Ok((
                LpSolution {
                    status: LpStatus::Unbounded,
                    objective_value: f64::NEG_INFINITY,
                    values: s.x[..s.n].to_vec(),
                    iterations: s.iterations,
                },
                basis,
            ));
        }
        Outcome::Optimal => {}
    }

    let values: Vec<f64> = (0..s.n)
        .map(|j| s.x[j].clamp(lp.lower()[j], lp.upper()[j]))
        .collect();
    let violations = check_feasibility(lp, &values)?;
    if let Some(v) = violations.first() {
        return Err(s.breakdown(&format!(
            "final point violates {:?} by {:e} ({} violations)",
            v.site,
            v.residual,
            violations.len()
        )));
    }
    let basis = s.basis_status();
    Ok((
        LpSolution {
            status: LpStatus::Optimal,
            objective_value: lp.objective_value(&values),
            values,
            iterations: s.iterations,
        },
        basis,
    ))
}

enum Outcome {
    Optimal,
    Unbounded,
}

enum Step {
    Flip(f64),
    Pivot { row: usize, t: f64, to_upper: bool },
    Unbounded,
}

struct Simplex {
    m: usize,
    n: usize,
    ncols: usize,
    num_artificial: usize,
    // Structural columns in compressed sparse column form.
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    art_sign: Vec<f64>,
    b: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    at_upper: Vec<bool>,
    basis: Vec<usize>,
    pos: Vec<usize>,
    inv: BasisInverse,
    /// Pivots applied since the last refactorization.
    fresh_pivots: usize,
    /// Eta file size right after the last refactorization.
    factor_nnz: usize,
    /// Original `(lo, up)` while the bounds are perturbed.
    saved_bounds: Option<(Vec<f64>, Vec<f64>)>,
    iterations: usize,
}

impl Simplex {
    fn new(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.num_constraints();
        let ncols = n + 2 * m;

        // Normalize `>=` rows to `<=` and transpose into columns.
        let mut b = Vec::with_capacity(m);
        let mut counts = vec![0usize; n + 1];
        for row in lp.constraints() {
            for &(j, _) in &row.coeffs {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let mut fill = counts;
        let nnz = col_start[n];
        let mut col_row = vec![0; nnz];
        let mut col_val = vec![0.0; nnz];
        for (i, row) in lp.constraints().iter().enumerate() {
            let sign = if row.relation == Relation::Ge { -1.0 } else { 1.0 };
            b.push(sign * row.rhs);
            for &(j, a) in &row.coeffs {
                col_row[fill[j]] = i;
                col_val[fill[j]] = sign * a;
                fill[j] += 1;
            }
        }

        let mut lo = vec![0.0; ncols];
        let mut up = vec![0.0; ncols];
        let mut x = vec![0.0; ncols];
        lo[..n].copy_from_slice(lp.lower());
        up[..n].copy_from_slice(lp.upper());
        x[..n].copy_from_slice(lp.lower());
        for (i, row) in lp.constraints().iter().enumerate() {
            up[n + i] = if row.relation == Relation::Eq { 0.0 } else { f64::INFINITY };
        }

        // Residual of each row with every structural at its lower bound.
        let mut r = b.clone();
        for j in 0..n {
            if x[j] != 0.0 {
                for k in col_start[j]..col_start[j + 1] {
                    r[col_row[k]] -= col_val[k] * x[j];
                }
            }
        }

        let mut basis = vec![NONE; m];
        let mut pos = vec![NONE; ncols];
        let mut art_sign = vec![1.0; m];
        let mut diag = vec![1.0; m];
        let mut num_artificial = 0;
        for i in 0..m {
            let slack = n + i;
            let art = n + m + i;
            if r[i] >= 0.0 && r[i] <= up[slack] {
                basis[i] = slack;
                x[slack] = r[i];
            } else {
                let sign = if r[i] > 0.0 { 1.0 } else { -1.0 };
                art_sign[i] = sign;
                diag[i] = sign;
                basis[i] = art;
                x[art] = r[i].abs();
                up[art] = f64::INFINITY;
                num_artificial += 1;
            }
            pos[basis[i]] = i;
        }

        Simplex {
            m,
            n,
            ncols,
            num_artificial,
            col_start,
            col_row,
            col_val,
            art_sign,
            b,
            lo,
            up,
            cost: vec![0.0; ncols],
            x,
            at_upper: vec![false; ncols],
            basis,
            pos,
            inv: BasisInverse::from_diagonal(diag),
            fresh_pivots: 0,
            factor_nnz: 0,
            saved_bounds: None,
            iterations: 0,
        }
    }

    /// Starts from the statuses in `start` with every artificial fixed at 0.
    /// Basic values are left for [`Self::refactor`] to compute.
    fn warm(lp: &LinearProgram, start: &Basis) -> Self {
        let mut s = Simplex::new(lp);
        let (n, m) = (s.n, s.m);
        s.num_artificial = 0;
        s.art_sign = vec![1.0; m];
        s.inv = BasisInverse::from_diagonal(vec![1.0; m]);
        s.fresh_pivots = 0;
        s.pos = vec![NONE; s.ncols];
        s.basis.clear();
        for j in 0..s.ncols {
            let status = if j < n {
                start.vars[j]
            } else if j < n + m {
                start.rows.get(j - n).copied().unwrap_or(VarStatus::Basic)
            } else {
                s.up[j] = 0.0;
                VarStatus::AtLower
            };
            s.at_upper[j] = status == VarStatus::AtUpper && s.up[j].is_finite();
            s.x[j] = if s.at_upper[j] { s.up[j] } else { s.lo[j] };
            if status == VarStatus::Basic {
                s.pos[j] = s.basis.len();
                s.basis.push(j);
            }
        }
        s
    }

    fn basis_status(&self) -> Basis {
        let status = |j: usize| {
            if self.pos[j] != NONE {
                VarStatus::Basic
            } else if self.at_upper[j] {
                VarStatus::AtUpper
            } else {
                VarStatus::AtLower
            }
        };
        Basis {
            vars: (0..self.n).map(status).collect(),
            rows: (self.n..self.n + self.m).map(status).collect(),
        }
    }

    fn art(&self, i: usize) -> usize {
        self.n + self.m + i
    }

    fn breakdown(&self, detail: &str) -> LpError {
        LpError::NumericalBreakdown {
            iterations: self.iterations,
            detail: detail.to_string(),
        }
    }

    fn for_column(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for k in self.col_start[j]..self.col_start[j + 1] {
                f(self.col_row[k], self.col_val[k]);
            }
        } else if j < self.n + self.m {
            f(j - self.n, 1.0);
        } else {
            let i = j - self.n - self.m;
            f(i, self.art_sign[i]);
        }
    }

    fn column_nnz(&self, j: usize) -> usize {
        if j < self.n {
            self.col_start[j + 1] - self.col_start[j]
        } else {
            1
        }
    }

    fn load_column(&self, j: usize, out: &mut SparseVec) {
        out.clear();
        self.for_column(j, |i, v| out.add(i, v));
    }

    fn dot_column(&self, j: usize, y: &[f64]) -> f64 {
        let mut acc = 0.0;
        self.for_column(j, |i, v| acc += v * y[i]);
        acc
    }

    /// Unit column `(row, coefficient)` for slack and artificial variables.
    fn unit_row(&self, j: usize) -> Option<(usize, f64)> {
        if j < self.n {
            None
        } else if j < self.n + self.m {
            Some((j - self.n, 1.0))
        } else {
            let i = j - self.n - self.m;
            Some((i, self.art_sign[i]))
        }
    }

    /// Rebuilds the eta file from the current basic columns and recomputes
    /// the basic values.
    fn refactor(&mut self) {
        let m = self.m;
        let mut diag = vec![1.0; m];
        let mut assigned = vec![false; m];
        let mut new_basis = vec![NONE; m];
        let mut structural = Vec::new();
        for &v in &self.basis {
            match self.unit_row(v) {
                Some((i, sign)) if !assigned[i] => {
                    assigned[i] = true;
                    diag[i] = sign;
                    new_basis[i] = v;
                }
                _ => structural.push(v),
            }
        }
        structural.sort_by_key(|&v| (self.column_nnz(v), v));

        let mut inv = BasisInverse::from_diagonal(diag);
        let mut col = SparseVec::new(m);
        for v in structural {
            self.load_column(v, &mut col);
            inv.ftran_sparse(&mut col);
            let mut best = NONE;
            let mut best_abs = REFACTOR_TOL;
            for &i in &col.nz {
                let a = col.val[i].abs();
                if !assigned[i] && (a > best_abs || (a == best_abs && i < best)) {
                    best = i;
                    best_abs = a;
                }
            }
            if best == NONE {
                // Dependent column: drop it to the nearer bound.
                debug!("refactor dropped dependent column {v}");
                self.pos[v] = NONE;
                let to_upper = self.up[v].is_finite() && (self.up[v] - self.x[v]) < (self.x[v] - self.lo[v]);
                self.at_upper[v] = to_upper;
                self.x[v] = if to_upper { self.up[v] } else { self.lo[v] };
                continue;
            }
            inv.push_sparse(best, &col);
            assigned[best] = true;
            new_basis[best] = v;
        }
        for i in 0..m {
            if !assigned[i] {
                // The identity placeholder in this row is the slack column.
                let slack = self.n + i;
                debug_assert_eq!(self.pos[slack], NONE);
                new_basis[i] = slack;
            }
        }
        for &v in &self.basis {
            self.pos[v] = NONE;
        }
        for (i, &v) in new_basis.iter().enumerate() {
            self.pos[v] = i;
        }
        self.basis = new_basis;
        self.factor_nnz = inv.nnz();
        self.inv = inv;
        self.fresh_pivots = 0;
        self.recompute_basic_values();
    }

    /// Largest bound violation among the basic variables.
    fn basic_infeasibility(&self) -> f64 {
        self.basis
            .iter()
            .map(|&v| (self.lo[v] - self.x[v]).max(self.x[v] - self.up[v]))
            .fold(0.0, f64::max)
    }

    fn recompute_basic_values(&mut self) {
        let mut rhs = self.b.clone();
        for j in 0..self.ncols {
            if self.pos[j] == NONE && self.x[j] != 0.0 {
                let xj = self.x[j];
                self.for_column(j, |i, v| rhs[i] -= v * xj);
            }
        }
        self.inv.ftran(&mut rhs);
        for (i, &v) in self.basis.iter().enumerate() {
            self.x[v] = rhs[i];
        }
    }

    /// Largest entry of `B alpha - a_q`.
    fn ftran_residual(&self, q: usize, alpha: &SparseVec) -> f64 {
        let mut res = SparseVec::new(self.m);
        self.for_column(q, |i, v| res.add(i, -v));
        for &i in &alpha.nz {
            let a = alpha.val[i];
            if a != 0.0 {
                self.for_column(self.basis[i], |r, v| res.add(r, v * a));
            }
        }
        res.nz.iter().map(|&i| res.val[i].abs()).fold(0.0, f64::max)
    }

    fn duals(&self) -> Vec<f64> {
        let mut y: Vec<f64> = self.basis.iter().map(|&v| self.cost[v]).collect();
        self.inv.btran(&mut y);
        y
    }

    /// Picks the entering column, or `None` at optimality.
    fn price(&self, y: &[f64], bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.ncols {
            if self.pos[j] != NONE || self.up[j] <= self.lo[j] {
                continue;
            }
            let d = self.cost[j] - self.dot_column(j, y);
            let eligible = if self.at_upper[j] { d > DUAL_TOL } else { d < -DUAL_TOL };
            if !eligible {
                continue;
            }
            if bland {
                return Some((j, d));
            }
            if best.is_none_or(|(_, bd)| d.abs() > bd.abs()) {
                best = Some((j, d));
            }
        }
        best
    }

    fn ratio_test(&self, q: usize, dir: f64, alpha: &SparseVec, bland: bool) -> Step {
        let flip = self.up[q] - self.lo[q];
        let mut theta_max = f64::INFINITY;
        for &i in &alpha.nz {
            let a = alpha.val[i];
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let v = self.basis[i];
            let g = dir * a;
            let ratio = if g > 0.0 {
                (self.x[v] - self.lo[v] + HARRIS_TOL) / g
            } else if self.up[v].is_finite() {
                (self.up[v] - self.x[v] + HARRIS_TOL) / -g
            } else {
                continue;
            };
            theta_max = theta_max.min(ratio);
        }
        if theta_max.is_infinite() && flip.is_infinite() {
            return Step::Unbounded;
        }
        if flip <= theta_max {
            return Step::Flip(flip);
        }

        let mut chosen: Option<(usize, f64, f64)> = None; // (row, exact ratio, |g|)
        for &i in &alpha.nz {
            let a = alpha.val[i];
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let v = self.basis[i];
            let g = dir * a;
            let exact = if g > 0.0 {
                (self.x[v] - self.lo[v]) / g
            } else if self.up[v].is_finite() {
                (self.up[v] - self.x[v]) / -g
            } else {
                continue;
            };
            let better = match chosen {
                None => exact <= theta_max,
                Some((ci, cr, cg)) => {
                    if bland {
                        exact < cr - 1e-12 || (exact <= cr + 1e-12 && v < self.basis[ci])
                    } else {
                        exact <= theta_max && (g.abs() > cg || (g.abs() == cg && v < self.basis[ci]))
                    }
                }
            };
            if better {
                chosen = Some((i, exact, g.abs()));
            }
        }
        match chosen {
            Some((row, exact, _)) => {
                let t = exact.max(0.0);
                if flip <= t {
                    return Step::Flip(flip);
                }
                let to_upper = dir * alpha.val[row] < 0.0;
                Step::Pivot { row, t, to_upper }
            }
            None => Step::Unbounded,
        }
    }

    /// Refactorizes; if round-off or dropped columns left basic variables
    /// outside their bounds, restores feasibility first.
    fn refresh(&mut self, cap: usize) -> Result<(), LpError> {
        self.refactor();
        let worst = self.basic_infeasibility();
        if worst > REPAIR_TRIGGER {
            debug!("basic infeasibility {worst:e} after refactor at iteration {}", self.iterations);
            self.repair(cap)?;
        }
        Ok(())
    }

    /// Minimizes the sum of basic bound violations until none is left.
    fn repair(&mut self, cap: usize) -> Result<(), LpError> {
        let mut alpha = SparseVec::new(self.m);
        let mut cost = vec![0.0; self.ncols];
        loop {
            if self.fresh_pivots >= REFACTOR_EVERY {
                self.refactor();
            }
            let mut any = false;
            for &v in &self.basis {
                cost[v] = if self.x[v] < self.lo[v] - REPAIR_TOL {
                    -1.0
                } else if self.x[v] > self.up[v] + REPAIR_TOL {
                    1.0
                } else {
                    0.0
                };
                any |= cost[v] != 0.0;
            }
            if !any {
                for &v in &self.basis {
                    cost[v] = 0.0;
                }
                return Ok(());
            }
            let mut y: Vec<f64> = self.basis.iter().map(|&v| cost[v]).collect();
            self.inv.btran(&mut y);
            for &v in &self.basis {
                cost[v] = 0.0;
            }
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.ncols {
                if self.pos[j] != NONE || self.up[j] <= self.lo[j] {
                    continue;
                }
                let d = -self.dot_column(j, &y);
                let eligible = if self.at_upper[j] { d > DUAL_TOL } else { d < -DUAL_TOL };
                if eligible && entering.is_none_or(|(_, bd)| d.abs() > bd.abs()) {
                    entering = Some((j, d));
                }
            }
            let Some((q, d)) = entering else {
                return Err(self.breakdown("lost feasibility after refactorization and could not restore it"));
            };
            if self.iterations >= cap {
                return Err(self.breakdown(&format!("iteration cap {cap} reached while restoring feasibility")));
            }
            self.iterations += 1;
            self.load_column(q, &mut alpha);
            self.inv.ftran_sparse(&mut alpha);
            let dir = if self.at_upper[q] { -1.0 } else { 1.0 };

            // Hard blocks end the step; breakpoints only reduce the slope.
            let mut block = (self.up[q] - self.lo[q], NONE, false);
            let mut breaks: Vec<(f64, usize, f64)> = Vec::new();
            for &i in &alpha.nz {
                let a = alpha.val[i];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let v = self.basis[i];
                let g = dir * a;
                let (x, lo, up) = (self.x[v], self.lo[v], self.up[v]);
                let hard = if x < lo - REPAIR_TOL {
                    if g < 0.0 {
                        breaks.push(((lo - x) / -g, i, -g));
                        up.is_finite().then(|| ((up - x) / -g, true))
                    } else {
                        None
                    }
                } else if x > up + REPAIR_TOL {
                    if g > 0.0 {
                        breaks.push(((x - up) / g, i, g));
                        lo.is_finite().then(|| ((x - lo) / g, false))
                    } else {
                        None
                    }
                } else if g > 0.0 {
                    Some((((x - lo) / g).max(0.0), false))
                } else if up.is_finite() {
                    Some((((up - x) / -g).max(0.0), true))
                } else {
                    None
                };
                if let Some((t, to_upper)) = hard {
                    if t < block.0 || (t == block.0 && block.1 != NONE && a.abs() > alpha.val[block.1].abs()) {
                        block = (t, i, to_upper);
                    }
                }
            }
            breaks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut slope = -d.abs();
            let mut stop = block;
            for &(t, i, g) in &breaks {
                if t >= block.0 {
                    break;
                }
                slope += g;
                if slope >= 0.0 {
                    let v = self.basis[i];
                    stop = (t, i, self.x[v] > self.up[v]);
                    break;
                }
            }
            let (t, row, to_upper) = stop;
            if t.is_infinite() {
                return Err(self.breakdown("unbounded ray while restoring feasibility"));
            }
            if t > 0.0 {
                for &i in &alpha.nz {
                    let a = alpha.val[i];
                    if a != 0.0 {
                        let v = self.basis[i];
                        self.x[v] -= dir * t * a;
                    }
                }
                self.x[q] += dir * t;
            }
            if row == NONE {
                self.at_upper[q] = !self.at_upper[q];
                self.x[q] = if self.at_upper[q] { self.up[q] } else { self.lo[q] };
                continue;
            }
            let leaving = self.basis[row];
            self.x[leaving] = if to_upper { self.up[leaving] } else { self.lo[leaving] };
            self.at_upper[leaving] = to_upper;
            self.pos[leaving] = NONE;
            self.basis[row] = q;
            self.pos[q] = row;
            self.at_upper[q] = false;
            self.inv.push_sparse(row, &alpha);
            self.fresh_pivots += 1;
        }
    }

    /// Widens the bounds of every basic variable by a small deterministic
    /// amount so that a degenerate vertex becomes non-degenerate.
    fn perturb(&mut self) {
        self.saved_bounds = Some((self.lo.clone(), self.up.clone()));
        for &v in &self.basis {
            // Fixed columns (equality slacks, artificials) stay fixed.
            if self.up[v] <= self.lo[v] {
                continue;
            }
            let h = (v as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11;
            let jitter = 1.0 + h as f64 / (1u64 << 53) as f64;
            if self.lo[v].is_finite() {
                self.lo[v] -= PERTURB * jitter * (1.0 + self.lo[v].abs());
            }
            if self.up[v].is_finite() {
                self.up[v] += PERTURB * jitter * (1.0 + self.up[v].abs());
            }
        }
    }

    /// Restores the original bounds, moves nonbasic variables back onto them
    /// and repairs any basic variable left outside.
    fn unperturb(&mut self, cap: usize) -> Result<(), LpError> {
        let Some((lo, up)) = self.saved_bounds.take() else {
            return Ok(());
        };
        self.lo = lo;
        self.up = up;
        for j in 0..self.ncols {
            if self.pos[j] == NONE {
                self.at_upper[j] &= self.up[j].is_finite();
                self.x[j] = if self.at_upper[j] { self.up[j] } else { self.lo[j] };
            }
        }
        self.refresh(cap)
    }

    fn run(&mut self, cap: usize) -> Result<Outcome, LpError> {
        let mut stall = 0usize;
        let mut bland = false;
        let mut perturbed_once = false;
        let mut alpha = SparseVec::new(self.m);
        loop {
            if self.fresh_pivots >= REFACTOR_EVERY {
                self.refresh(cap)?;
            }
            let y = self.duals();
            let Some((q, d)) = self.price(&y, bland) else {
                if self.saved_bounds.is_some() {
                    debug!("removing bound perturbation at iteration {}", self.iterations);
                    self.unperturb(cap)?;
                    continue;
                }
                if self.fresh_pivots > 0 {
                    self.refresh(cap)?;
                    continue;
                }
                return Ok(Outcome::Optimal);
            };
            if self.iterations >= cap {
                return Err(self.breakdown(&format!("iteration cap {cap} reached")));
            }
            self.iterations += 1;

            self.load_column(q, &mut alpha);
            self.inv.ftran_sparse(&mut alpha);
            let scale = alpha.nz.iter().map(|&i| alpha.val[i].abs()).fold(1.0, f64::max);
            if self.fresh_pivots > 0 && self.ftran_residual(q, &alpha) > 1e-9 * scale {
                debug!("refactor on FTRAN residual at iteration {}", self.iterations);
                self.iterations -= 1;
                self.refresh(cap)?;
                continue;
            }
            let dir = if self.at_upper[q] { -1.0 } else { 1.0 };
            let step = self.ratio_test(q, dir, &alpha, bland);
            let t = match step {
                Step::Unbounded => {
                    if self.saved_bounds.is_some() {
                        self.unperturb(cap)?;
                        continue;
                    }
                    return Ok(Outcome::Unbounded);
                }
                Step::Flip(t) => t,
                Step::Pivot { t, .. } => t,
            };
            trace!("iter {} enter {q} (d={d:e}) step {t:e}", self.iterations);

            if t > 0.0 {
                for &i in &alpha.nz {
                    let a = alpha.val[i];
                    if a != 0.0 {
                        let v = self.basis[i];
                        self.x[v] -= dir * t * a;
                    }
                }
                self.x[q] += dir * t;
            }
            match step {
                Step::Flip(_) => {
                    self.at_upper[q] = !self.at_upper[q];
                    self.x[q] = if self.at_upper[q] { self.up[q] } else { self.lo[q] };
                }
                Step::Pivot { row, to_upper, .. } => {
                    let leaving = self.basis[row];
                    self.x[leaving] = if to_upper { self.up[leaving] } else { self.lo[leaving] };
                    self.at_upper[leaving] = to_upper;
                    self.pos[leaving] = NONE;
                    self.basis[row] = q;
                    self.pos[q] = row;
                    self.at_upper[q] = false;
                    self.inv.push_sparse(row, &alpha);
                    self.fresh_pivots += 1;
                }
                Step::Unbounded => unreachable!(),
            }

            if t <= 1e-12 {
                stall += 1;
                if stall > STALL_THRESHOLD && !perturbed_once {
                    debug!("degeneracy stall at iteration {}, perturbing bounds", self.iterations);
                    self.perturb();
                    perturbed_once = true;
                    stall = 0;
                } else if stall > STALL_THRESHOLD && !bland {
                    debug!("degeneracy stall at iteration {}, using Bland's rule", self.iterations);
                    bland = true;
                }
            } else {
                stall = 0;
                bland = false;
            }
            if self.inv.nnz() > self.factor_nnz + 40 * (self.m + 1) {
                self.refresh(cap)?;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Var;

    fn kmedian_line_lp() -> LinearProgram {
        // Points {0, 1, 2} on a line, every point a candidate, k = 1.
        let pts = [0.0f64, 1.0, 2.0];
        let mut lp = LinearProgram::new();
        let mut z = vec![vec![Var(0); 3]; 3];
        for u in 0..3 {
            for v in 0..3 {
                z[u][v] = lp.add_var(format!("z_{u}_{v}"), (pts[u] - pts[v]).abs(), 0.0, 1.0);
            }
        }
        let y: Vec<Var> = (0..3).map(|v| lp.add_var(format!("y_{v}"), 0.0, 0.0, 1.0)).collect();
        for u in 0..3 {
            lp.add_constraint(format!("assign_{u}"), (0..3).map(|v| (z[u][v], 1.0)), Relation::Eq, 1.0);
        }
        for u in 0..3 {
            for v in 0..3 {
                lp.add_constraint(format!("link_{u}_{v}"), [(z[u][v], 1.0), (y[v], -1.0)], Relation::Le, 0.0);
            }
        }
        lp.add_constraint("open", y.iter().map(|&v| (v, 1.0)), Relation::Le, 1.0);
        lp
    }

    #[test]
    fn single_variable_lower_bound_row() {
        let mut lp = LinearProgram::new();
        let l = lp.add_var("lambda", 1.0, 0.0, f64::INFINITY);
        lp.add_constraint("floor", [(l, 1.0)], Relation::Ge, 2.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn kmedian_on_three_collinear_points() {
        let sol = solve_lp(&kmedian_line_lp()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value - 2.0).abs() < 1e-9, "{}", sol.objective_value);
    }

    #[test]
    fn zero_opening_budget_is_infeasible() {
        let lp = kmedian_line_lp();
        let last = lp.num_constraints() - 1;
        let row = lp.constraint(last).clone();
        let mut keep = vec![true; lp.num_constraints()];
        keep[last] = false;
        let mut lp = lp.with_rows(&keep);
        lp.add_constraint("open", row.coeffs.iter().map(|&(j, a)| (Var(j), a)), Relation::Le, 0.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray_is_detected() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", -1.0, 0.0, f64::INFINITY);
        let y = lp.add_var("y", 0.0, 0.0, f64::INFINITY);
        lp.add_constraint("r", [(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn bound_flips_reach_upper_bounds() {
        // max x + y with x, y in [0, 1] and no rows binding.
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", -1.0, 0.0, 1.0);
        let y = lp.add_var("y", -1.0, 0.0, 1.0);
        lp.add_constraint("cap", [(x, 1.0), (y, 1.0)], Relation::Le, 5.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.values, vec![1.0, 1.0]);
    }

    #[test]
    fn nonzero_lower_bounds_and_ge_rows() {
        // min 2a + 3b s.t. a + b >= 4, a - b <= 1, a in [1, 10], b in [0.5, inf)
        let mut lp = LinearProgram::new();
        let a = lp.add_var("a", 2.0, 1.0, 10.0);
        let b = lp.add_var("b", 3.0, 0.5, f64::INFINITY);
        lp.add_constraint("sum", [(a, 1.0), (b, 1.0)], Relation::Ge, 4.0);
        lp.add_constraint("gap", [(a, 1.0), (b, -1.0)], Relation::Le, 1.0);
        let sol = solve_lp(&lp).unwrap();
        // Optimum at a = 2.5, b = 1.5.
        assert!((sol.values[0] - 2.5).abs() < 1e-9);
        assert!((sol.values[1] - 1.5).abs() < 1e-9);
        assert!((sol.objective_value - 9.5).abs() < 1e-9);
    }
}
