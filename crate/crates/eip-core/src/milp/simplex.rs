//! Two-phase primal simplex over bounded variables.
//!
//! Constraints are brought to equality form with slack variables; phase 1
//! drives artificial variables to zero, phase 2 minimizes the real
//! objective. Nonbasic variables sit at a finite bound (or at zero when
//! free); bound flips are handled inside the ratio test. Entering variables
//! follow Dantzig pricing with a Bland's-rule fallback that guarantees
//! termination under degeneracy. The dense tableau is acceptable at the
//! model sizes this crate produces (a few hundred columns).

use super::{MipModel, Relation};

/// Primal feasibility tolerance.
const TOL_FEAS: f64 = 1e-7;
/// Reduced-cost optimality tolerance.
const TOL_DJ: f64 = 1e-9;
/// Smallest pivot element admitted in the ratio test.
const TOL_PIV: f64 = 1e-9;
/// Step sizes at or below this count as degenerate.
const TOL_DEGEN: f64 = 1e-10;
/// Consecutive degenerate pivots before switching to Bland's rule.
const BLAND_AFTER: u32 = 400;
/// Pivots between exact refreshes of basic values and reduced costs.
const REFRESH_EVERY: u32 = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The solver could not certify a result; never reported as optimal.
    Numerical,
}

/// Outcome of an LP solve. `x` and `reduced_costs` cover the structural
/// variables (in model order) and are empty unless the status is optimal.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Objective of the dual solution at the final basis; equals the primal
    /// objective at optimality up to round-off (weak duality check).
    pub dual_objective: f64,
    pub reduced_costs: Vec<f64>,
    pub iterations: u64,
}

impl LpSolution {
    fn failed(status: LpStatus, iterations: u64) -> Self {
        LpSolution {
            status,
            x: Vec::new(),
            objective: f64::NAN,
            dual_objective: f64::NAN,
            reduced_costs: Vec::new(),
            iterations,
        }
    }
}

/// Solves the LP relaxation of the model (binaries relaxed to their bounds).
pub fn solve_lp(model: &MipModel) -> LpSolution {
    let lower: Vec<f64> = model.variables().iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = model.variables().iter().map(|v| v.upper).collect();
    solve_lp_with_bounds(model, &lower, &upper)
}

/// Solves the LP relaxation with overridden variable bounds (used by
/// branch-and-bound node subproblems).
pub fn solve_lp_with_bounds(model: &MipModel, lower: &[f64], upper: &[f64]) -> LpSolution {
    Tableau::build(model, lower, upper).solve()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColState {
    Basic,
    AtLower,
    AtUpper,
    /// Free nonbasic variable parked at zero.
    FreeAtZero,
}

struct Tableau<'a> {
    model: &'a MipModel,
    m: usize,
    n_struct: usize,
    n_cols: usize,
    width: usize,
    /// Row-major `B^{-1} A` with one extra column holding `B^{-1} b`.
    rows: Vec<f64>,
    rhs: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    x: Vec<f64>,
    state: Vec<ColState>,
    cost: Vec<f64>,
    dj: Vec<f64>,
    basis: Vec<usize>,
    /// Per-row unit column and its original coefficient, for dual recovery.
    row_unit: Vec<(usize, f64)>,
    artificials: Vec<usize>,
    infeasible_bounds: bool,
    bland: bool,
    degenerate_run: u32,
    iterations: u64,
}

impl<'a> Tableau<'a> {
    fn build(model: &'a MipModel, lower: &[f64], upper: &[f64]) -> Self {
        let m = model.num_constraints();
        let n_struct = model.num_variables();
        // slack for every inequality row
        let n_slack =
            model.constraints().iter().filter(|c| c.relation != Relation::Eq).count();
        let capacity = n_struct + n_slack + m;

        let mut lb = Vec::with_capacity(capacity);
        let mut ub = Vec::with_capacity(capacity);
        let mut x = Vec::with_capacity(capacity);
        let mut state = Vec::with_capacity(capacity);
        let mut infeasible_bounds = false;

        for j in 0..n_struct {
            let (lo, hi) = (lower[j], upper[j]);
            if lo > hi + TOL_FEAS {
                infeasible_bounds = true;
            }
            lb.push(lo);
            ub.push(hi);
            if lo.is_finite() {
                x.push(lo);
                state.push(ColState::AtLower);
            } else if hi.is_finite() {
                x.push(hi);
                state.push(ColState::AtUpper);
            } else {
                x.push(0.0);
                state.push(ColState::FreeAtZero);
            }
        }

        let mut tab = Tableau {
            model,
            m,
            n_struct,
            n_cols: n_struct,
            width: 0,
            rows: Vec::new(),
            rhs: Vec::with_capacity(m),
            lb,
            ub,
            x,
            state,
            cost: Vec::new(),
            dj: Vec::new(),
            basis: Vec::with_capacity(m),
            row_unit: Vec::with_capacity(m),
            artificials: Vec::new(),
            infeasible_bounds,
            bland: false,
            degenerate_run: 0,
            iterations: 0,
        };
        if infeasible_bounds {
            return tab;
        }

        // Dense rows over structural + slack columns; artificials appended.
        let n_total = n_struct + n_slack + m; // upper bound on columns
        let width = n_total + 1;
        tab.width = width;
        tab.rows = vec![0.0; m * width];
        let mut slack_cursor = n_struct;

        // First pass: structural coefficients, slack columns, residuals.
        let mut slack_of_row = vec![usize::MAX; m];
        let mut sigma_of_row = vec![0.0_f64; m];
        for (r, c) in model.constraints().iter().enumerate() {
            let row = &mut tab.rows[r * width..(r + 1) * width];
            for &(var, coeff) in &c.terms {
                row[var.0] += coeff;
            }
            let sigma = match c.relation {
                Relation::Le => 1.0,
                Relation::Ge => -1.0,
                Relation::Eq => 0.0,
            };
            if sigma != 0.0 {
                let s = slack_cursor;
                slack_cursor += 1;
                row[s] = sigma;
                slack_of_row[r] = s;
                sigma_of_row[r] = sigma;
                tab.lb.push(0.0);
                tab.ub.push(f64::INFINITY);
                tab.x.push(0.0);
                tab.state.push(ColState::AtLower);
            }
            tab.rhs.push(c.rhs);
        }
        tab.n_cols = slack_cursor;

        // Second pass: pick an initial basic column per row, adding an
        // artificial when the slack cannot start feasible.
        for r in 0..m {
            let residual = {
                let row = &tab.rows[r * width..(r + 1) * width];
                let mut acc = tab.rhs[r];
                for j in 0..n_struct {
                    if row[j] != 0.0 && tab.x[j] != 0.0 {
                        acc -= row[j] * tab.x[j];
                    }
                }
                acc
            };
            let slack = slack_of_row[r];
            let sigma = sigma_of_row[r];
            let use_slack = slack != usize::MAX && sigma * residual >= 0.0;
            if use_slack {
                let value = sigma * residual;
                tab.x[slack] = value;
                tab.state[slack] = ColState::Basic;
                tab.basis.push(slack);
                tab.row_unit.push((slack, sigma));
                if sigma < 0.0 {
                    // Normalize so the basic column carries +1.
                    let row = &mut tab.rows[r * width..(r + 1) * width];
                    for v in row.iter_mut() {
                        *v = -*v;
                    }
                }
                tab.rows[r * width + width - 1] = sigma * tab.rhs[r];
            } else {
                let tau = if residual >= 0.0 { 1.0 } else { -1.0 };
                let a = tab.n_cols;
                tab.n_cols += 1;
                tab.lb.push(0.0);
                tab.ub.push(f64::INFINITY);
                tab.x.push(residual.abs());
                tab.state.push(ColState::Basic);
                tab.artificials.push(a);
                tab.basis.push(a);
                if slack == usize::MAX {
                    tab.row_unit.push((a, tau));
                } else {
                    tab.row_unit.push((slack, sigma));
                }
                if tau < 0.0 {
                    let row = &mut tab.rows[r * width..(r + 1) * width];
                    for v in row.iter_mut() {
                        *v = -*v;
                    }
                }
                tab.rows[r * width + a] = 1.0;
                tab.rows[r * width + width - 1] = tau * tab.rhs[r];
            }
        }

        tab.cost = vec![0.0; tab.n_cols];
        tab.dj = vec![0.0; tab.n_cols];
        tab
    }

    fn solve(mut self) -> LpSolution {
        if self.infeasible_bounds {
            return LpSolution::failed(LpStatus::Infeasible, 0);
        }
        let cap = 10_000 + 50 * (self.m as u64 + self.n_cols as u64);

        // Phase 1: minimize the sum of artificial values.
        if !self.artificials.is_empty() {
            for c in self.cost.iter_mut() {
                *c = 0.0;
            }
            for &a in &self.artificials {
                self.cost[a] = 1.0;
            }
            self.recompute_dj();
            match self.iterate(cap) {
                Phase::Optimal => {}
                Phase::Unbounded => return LpSolution::failed(LpStatus::Numerical, self.iterations),
                Phase::IterationCap => return LpSolution::failed(LpStatus::Numerical, self.iterations),
            }
            self.refresh_basics();
            let scale = 1.0 + self.rhs.iter().fold(0.0_f64, |acc, b| acc.max(b.abs()));
            let infeasibility: f64 = self.artificials.iter().map(|&a| self.x[a].max(0.0)).sum();
            if infeasibility > TOL_FEAS * scale {
                return LpSolution::failed(LpStatus::Infeasible, self.iterations);
            }
            // Pin artificials at zero for phase 2.
            for &a in &self.artificials {
                self.lb[a] = 0.0;
                self.ub[a] = 0.0;
                if self.state[a] != ColState::Basic {
                    self.state[a] = ColState::AtLower;
                    self.x[a] = 0.0;
                }
            }
        }

        // Phase 2: the real objective.
        for c in self.cost.iter_mut() {
            *c = 0.0;
        }
        for &(var, coeff) in self.model.objective() {
            self.cost[var.0] += coeff;
        }
        self.recompute_dj();
        match self.iterate(cap) {
            Phase::Optimal => {}
            Phase::Unbounded => return LpSolution::failed(LpStatus::Unbounded, self.iterations),
            Phase::IterationCap => return LpSolution::failed(LpStatus::Numerical, self.iterations),
        }

        self.refresh_basics();
        self.recompute_dj();
        let x: Vec<f64> = self.x[..self.n_struct].to_vec();
        let objective = self.model.objective_value(&x);

        // Duals from the unit column of each row, then the bounded-variable
        // dual objective.
        let mut dual = self.model.objective_offset();
        for r in 0..self.m {
            let (col, sign) = self.row_unit[r];
            let y_r = -self.dj[col] / sign;
            dual += y_r * self.rhs[r];
        }
        for j in 0..self.n_cols {
            if self.artificials.binary_search(&j).is_ok() {
                continue;
            }
            match self.state[j] {
                ColState::AtLower if self.lb[j] != 0.0 && self.lb[j].is_finite() => {
                    dual += self.dj[j] * self.lb[j];
                }
                ColState::AtUpper if self.ub[j] != 0.0 && self.ub[j].is_finite() => {
                    dual += self.dj[j] * self.ub[j];
                }
                _ => {}
            }
        }

        LpSolution {
            status: LpStatus::Optimal,
            x,
            objective,
            dual_objective: dual,
            reduced_costs: self.dj[..self.n_struct].to_vec(),
            iterations: self.iterations,
        }
    }

    fn recompute_dj(&mut self) {
        // dj = cost - cost_B * B^{-1} A, column by column.
        self.dj.copy_from_slice(&self.cost[..self.n_cols]);
        for r in 0..self.m {
            let cb = self.cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.rows[r * self.width..r * self.width + self.n_cols];
                for (d, &a) in self.dj.iter_mut().zip(row.iter()) {
                    *d -= cb * a;
                }
            }
        }
        for r in 0..self.m {
            self.dj[self.basis[r]] = 0.0;
        }
    }

    /// Recomputes basic values exactly from `B^{-1} b` and the nonbasic
    /// bound values, undoing accumulated update drift.
    fn refresh_basics(&mut self) {
        let mut vals: Vec<f64> = (0..self.m).map(|r| self.rows[r * self.width + self.width - 1]).collect();
        for j in 0..self.n_cols {
            if self.state[j] != ColState::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                for r in 0..self.m {
                    let a = self.rows[r * self.width + j];
                    if a != 0.0 {
                        vals[r] -= a * xj;
                    }
                }
            }
        }
        for r in 0..self.m {
            self.x[self.basis[r]] = vals[r];
        }
    }

    fn iterate(&mut self, cap: u64) -> Phase {
        let mut since_refresh = 0u32;
        loop {
            self.iterations += 1;
            if self.iterations > cap {
                return Phase::IterationCap;
            }
            if since_refresh >= REFRESH_EVERY {
                self.refresh_basics();
                self.recompute_dj();
                since_refresh = 0;
            }

            let Some((q, dir)) = self.choose_entering() else {
                return Phase::Optimal;
            };

            match self.ratio_test(q, dir) {
                Step::Unbounded => return Phase::Unbounded,
                Step::Flip(theta) => {
                    self.apply_step(q, dir, theta);
                    self.state[q] = if dir > 0.0 { ColState::AtUpper } else { ColState::AtLower };
                    self.x[q] = if dir > 0.0 { self.ub[q] } else { self.lb[q] };
                    self.track_degeneracy(theta);
                }
                Step::Pivot(r, theta) => {
                    self.apply_step(q, dir, theta);
                    let leaving = self.basis[r];
                    let delta = dir * self.rows[r * self.width + q];
                    if delta > 0.0 {
                        self.state[leaving] = ColState::AtLower;
                        self.x[leaving] = self.lb[leaving];
                    } else {
                        self.state[leaving] = ColState::AtUpper;
                        self.x[leaving] = self.ub[leaving];
                    }
                    self.pivot(r, q);
                    self.basis[r] = q;
                    self.state[q] = ColState::Basic;
                    self.track_degeneracy(theta);
                    since_refresh += 1;
                }
            }
        }
    }

    fn track_degeneracy(&mut self, theta: f64) {
        if theta <= TOL_DEGEN {
            self.degenerate_run += 1;
            if self.degenerate_run > BLAND_AFTER {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
        }
    }

    fn choose_entering(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None; // (col, dir, score)
        for j in 0..self.n_cols {
            if self.state[j] == ColState::Basic || self.ub[j] - self.lb[j] <= 0.0 {
                continue;
            }
            let d = self.dj[j];
            let dir = match self.state[j] {
                ColState::AtLower if d < -TOL_DJ => 1.0,
                ColState::AtUpper if d > TOL_DJ => -1.0,
                ColState::FreeAtZero if d.abs() > TOL_DJ => -d.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            let score = d.abs();
            if best.map_or(true, |(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn ratio_test(&self, q: usize, dir: f64) -> Step {
        let span = self.ub[q] - self.lb[q];
        let mut theta = if span.is_finite() { span } else { f64::INFINITY };
        let mut bound_flip = theta.is_finite();
        let mut row_choice: Option<(usize, f64)> = None; // (row, |pivot|)

        for r in 0..self.m {
            let a = self.rows[r * self.width + q];
            if a.abs() <= TOL_PIV {
                continue;
            }
            let delta = dir * a;
            let b = self.basis[r];
            let v = self.x[b];
            let room = if delta > 0.0 {
                if self.lb[b].is_finite() {
                    v - self.lb[b]
                } else {
                    continue;
                }
            } else if self.ub[b].is_finite() {
                self.ub[b] - v
            } else {
                continue;
            };
            let ratio = (room.max(0.0)) / delta.abs();
            let better = match row_choice {
                _ if ratio < theta - 1e-12 => true,
                Some((rr, pa)) if (ratio - theta).abs() <= 1e-12 => {
                    // Tie: prefer the larger pivot, then the lower basic index.
                    a.abs() > pa || (a.abs() == pa && b < self.basis[rr])
                }
                None if ratio <= theta => true,
                _ => false,
            };
            if better {
                theta = ratio.min(theta);
                row_choice = Some((r, a.abs()));
                bound_flip = false;
            }
        }

        match row_choice {
            Some((r, _)) => Step::Pivot(r, theta),
            None if bound_flip => Step::Flip(theta),
            None if theta.is_infinite() => Step::Unbounded,
            None => Step::Flip(theta),
        }
    }

    /// Moves the entering variable by `theta` along `dir`, updating the
    /// basic values through the entering column.
    fn apply_step(&mut self, q: usize, dir: f64, theta: f64) {
        if theta > 0.0 {
            for r in 0..self.m {
                let a = self.rows[r * self.width + q];
                if a != 0.0 {
                    let b = self.basis[r];
                    self.x[b] -= dir * theta * a;
                }
            }
            self.x[q] += dir * theta;
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let width = self.width;
        let piv = self.rows[r * width + q];
        let inv = 1.0 / piv;
        {
            let row = &mut self.rows[r * width..(r + 1) * width];
            for v in row.iter_mut() {
                *v *= inv;
            }
            row[q] = 1.0;
        }
        // Split borrows: copy the pivot row once, then eliminate.
        let pivot_row: Vec<f64> = self.rows[r * width..(r + 1) * width].to_vec();
        for rr in 0..self.m {
            if rr == r {
                continue;
            }
            let f = self.rows[rr * width + q];
            if f != 0.0 {
                let row = &mut self.rows[rr * width..(rr + 1) * width];
                for (v, &p) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * p;
                }
                row[q] = 0.0;
            }
        }
        let f = self.dj[q];
        if f != 0.0 {
            for (d, &p) in self.dj.iter_mut().zip(pivot_row.iter()) {
                *d -= f * p;
            }
            self.dj[q] = 0.0;
        }
    }
}

enum Phase {
    Optimal,
    Unbounded,
    IterationCap,
}

enum Step {
    Flip(f64),
    Pivot(usize, f64),
    Unbounded,
}
