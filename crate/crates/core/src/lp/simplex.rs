//! Bounded-variable revised simplex.
//!
//! Every row `i` gets a logical variable `r_i = a_i·x` whose bounds encode the
//! row sense, so the working system is `A x - r = 0` with box constraints on
//! all columns. Phase 1 minimises the sum of bound violations of the basic
//! variables; its final duals are the infeasibility certificate. A dual
//! simplex pass re-optimises after bound changes (branch-and-bound).

use serde::{Deserialize, Serialize};

use super::lu::BasisFactor;
use super::problem::{LpOutcome, LpProblem, LpStatus, Sense};
use super::LpError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpOptions {
    /// Primal feasibility tolerance on (row-scaled) bounds.
    pub feas_tol: f64,
    /// Reduced-cost tolerance.
    pub opt_tol: f64,
    /// Smallest pivot magnitude accepted in ratio tests.
    pub pivot_tol: f64,
    /// Iterations without objective progress before switching to Bland's rule.
    pub bland_after: usize,
    /// Eta columns accumulated before refactorising.
    pub refactor_every: usize,
    /// Override of the default cap `50 * (rows + cols)`.
    pub max_iter: Option<usize>,
    /// Verify strong duality on every optimal outcome.
    pub verify: bool,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            opt_tol: 1e-9,
            pivot_tol: 1e-9,
            bland_after: 1000,
            refactor_every: 64,
            max_iter: None,
            verify: false,
        }
    }
}

/// A compact description of a basis, sufficient to warm-start a solver built
/// from the same problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    basic: Vec<u32>,
    at_upper: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PhaseEnd {
    Optimal,
    Unbounded,
    Infeasible,
}

const NOT_BASIC: usize = usize::MAX;

/// Revised simplex solver holding its factorised basis between solves.
#[derive(Debug, Clone)]
pub struct SimplexSolver {
    m: usize,
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
    row_scale: Vec<f64>,
    cost: Vec<f64>,
    obj_offset: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    pos_of: Vec<usize>,
    factor: BasisFactor,
    logical_cols: Vec<[(usize, f64); 1]>,
    opts: LpOptions,
    /// total pivots over every `solve` call
    iterations: usize,
    /// value of `iterations` when the current `solve` began
    solve_start: usize,
    iter_cap: usize,
}

fn pow2_scale(max_abs: f64) -> f64 {
    if max_abs == 0.0 || !max_abs.is_finite() {
        return 1.0;
    }
    let e = max_abs.log2().round() as i32;
    2f64.powi(-e)
}

impl SimplexSolver {
    pub fn new(problem: &LpProblem, opts: LpOptions) -> Result<Self, LpError> {
        problem.validate()?;
        let n = problem.num_vars();
        let m = problem.num_rows();
        let mut row_scale = Vec::with_capacity(m);
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut lower = problem.lower.clone();
        let mut upper = problem.upper.clone();
        for (i, row) in problem.rows.iter().enumerate() {
            let max_abs = row
                .coeffs
                .iter()
                .fold(0.0f64, |acc, &(_, a)| acc.max(a.abs()));
            let s = pow2_scale(max_abs);
            row_scale.push(s);
            for &(j, a) in &row.coeffs {
                if a != 0.0 {
                    cols[j].push((i, a * s));
                }
            }
            let b = row.rhs * s;
            let (lo, hi) = match row.sense {
                Sense::Le => (f64::NEG_INFINITY, b),
                Sense::Ge => (b, f64::INFINITY),
                Sense::Eq => (b, b),
            };
            lower.push(lo);
            upper.push(hi);
        }
        let mut cost = problem.obj.clone();
        cost.resize(n + m, 0.0);

        let mut x = vec![0.0; n + m];
        for j in 0..n {
            x[j] = initial_value(lower[j], upper[j], cost[j]);
        }
        for (j, col) in cols.iter().enumerate() {
            for &(i, a) in col {
                x[n + i] += a * x[j];
            }
        }
        let basis: Vec<usize> = (n..n + m).collect();
        let mut pos_of = vec![NOT_BASIC; n + m];
        for (p, &j) in basis.iter().enumerate() {
            pos_of[j] = p;
        }
        let logical_cols: Vec<[(usize, f64); 1]> = (0..m).map(|i| [(i, -1.0)]).collect();
        let refs: Vec<&[(usize, f64)]> = logical_cols.iter().map(|c| c.as_slice()).collect();
        let (factor, _) = BasisFactor::factorize(m, &refs);
        let iter_cap = opts.max_iter.unwrap_or(50 * (m + n).max(1));
        Ok(Self {
            m,
            n,
            cols,
            row_scale,
            cost,
            obj_offset: problem.obj_offset,
            lower,
            upper,
            x,
            basis,
            pos_of,
            factor,
            logical_cols,
            opts,
            iterations: 0,
            solve_start: 0,
            iter_cap,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn var_bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    /// Change the bounds of structural variable `j`. Takes effect on the next solve.
    pub fn set_var_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        assert!(j < self.n);
        let at_upper = self.upper[j].is_finite()
            && self.x[j] == self.upper[j]
            && self.lower[j] != self.upper[j];
        self.lower[j] = lower;
        self.upper[j] = upper;
        if self.pos_of[j] == NOT_BASIC {
            self.x[j] = if at_upper && upper.is_finite() {
                upper
            } else if lower.is_finite() {
                lower
            } else if upper.is_finite() {
                upper
            } else {
                0.0
            };
        }
    }

    pub fn basis(&self) -> Basis {
        Basis {
            basic: self.basis.iter().map(|&j| j as u32).collect(),
            at_upper: (0..self.n + self.m)
                .filter(|&j| {
                    self.pos_of[j] == NOT_BASIC
                        && self.upper[j].is_finite()
                        && self.x[j] == self.upper[j]
                        && self.lower[j] != self.upper[j]
                })
                .map(|j| j as u32)
                .collect(),
        }
    }

    /// Install a basis previously taken from a solver over the same problem.
    pub fn load_basis(&mut self, basis: &Basis) {
        assert_eq!(basis.basic.len(), self.m);
        self.pos_of.iter_mut().for_each(|p| *p = NOT_BASIC);
        for (p, &j) in basis.basic.iter().enumerate() {
            self.basis[p] = j as usize;
            self.pos_of[j as usize] = p;
        }
        let mut upper_flag = vec![false; self.n + self.m];
        for &j in &basis.at_upper {
            upper_flag[j as usize] = true;
        }
        for j in 0..self.n + self.m {
            if self.pos_of[j] != NOT_BASIC {
                continue;
            }
            let (lo, hi) = (self.lower[j], self.upper[j]);
            self.x[j] = if upper_flag[j] && hi.is_finite() {
                hi
            } else if lo.is_finite() {
                lo
            } else if hi.is_finite() {
                hi
            } else {
                0.0
            };
        }
        self.refactor();
    }

    fn col(&self, j: usize) -> &[(usize, f64)] {
        if j < self.n {
            &self.cols[j]
        } else {
            &self.logical_cols[j - self.n]
        }
    }

    fn refactor(&mut self) {
        let refs: Vec<&[(usize, f64)]> = self.basis.iter().map(|&j| self.col(j)).collect();
        let (factor, replacements) = BasisFactor::factorize(self.m, &refs);
        self.factor = factor;
        for (p, r) in replacements {
            let old = self.basis[p];
            self.pos_of[old] = NOT_BASIC;
            let (lo, hi) = (self.lower[old], self.upper[old]);
            let v = self.x[old];
            self.x[old] = if lo.is_finite() && (!hi.is_finite() || (v - lo).abs() <= (hi - v).abs())
            {
                lo
            } else if hi.is_finite() {
                hi
            } else {
                0.0
            };
            let logical = self.n + r;
            if self.pos_of[logical] != NOT_BASIC {
                // cannot happen: a logical already in the basis pins its row
                continue;
            }
            self.basis[p] = logical;
            self.pos_of[logical] = p;
        }
        self.recompute_basics();
    }

    /// Recompute basic values from the nonbasic ones: `x_B = -B^{-1} N x_N`.
    fn recompute_basics(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.n + self.m {
            if self.pos_of[j] != NOT_BASIC {
                continue;
            }
            let v = self.x[j];
            if v == 0.0 {
                continue;
            }
            for &(i, a) in self.col(j) {
                rhs[i] -= a * v;
            }
        }
        let xb = self.factor.ftran(&mut rhs);
        for (p, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[p];
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        (self.lower[j] - v).max(v - self.upper[j]).max(0.0)
    }

    fn primal_infeasibility(&self) -> f64 {
        self.basis.iter().map(|&j| self.infeasibility(j)).sum()
    }

    fn is_primal_feasible(&self) -> bool {
        self.basis
            .iter()
            .all(|&j| self.infeasibility(j) <= self.opts.feas_tol)
    }

    fn phase_costs(&self, phase: Phase) -> Vec<f64> {
        self.basis
            .iter()
            .map(|&j| match phase {
                Phase::Two => self.cost[j],
                Phase::One => {
                    let v = self.x[j];
                    if v < self.lower[j] - self.opts.feas_tol {
                        -1.0
                    } else if v > self.upper[j] + self.opts.feas_tol {
                        1.0
                    } else {
                        0.0
                    }
                }
            })
            .collect()
    }

    fn duals(&self, cb: &[f64]) -> Vec<f64> {
        let mut c = cb.to_vec();
        self.factor.btran(&mut c)
    }

    fn reduced_cost(&self, j: usize, y: &[f64], phase: Phase) -> f64 {
        let c = match phase {
            Phase::Two => self.cost[j],
            Phase::One => 0.0,
        };
        c - self.col(j).iter().map(|&(i, a)| a * y[i]).sum::<f64>()
    }

    fn phase_objective(&self, phase: Phase) -> f64 {
        match phase {
            Phase::One => self.primal_infeasibility(),
            Phase::Two => (0..self.n).map(|j| self.cost[j] * self.x[j]).sum(),
        }
    }

    fn ftran_col(&self, j: usize) -> Vec<f64> {
        let mut a = vec![0.0; self.m];
        for &(i, v) in self.col(j) {
            a[i] = v;
        }
        self.factor.ftran(&mut a)
    }

    fn pivot(&mut self, pos: usize, entering: usize, w: &[f64]) {
        let leaving = self.basis[pos];
        self.pos_of[leaving] = NOT_BASIC;
        self.basis[pos] = entering;
        self.pos_of[entering] = pos;
        self.factor.update(pos, w);
        if self.factor.num_etas() >= self.opts.refactor_every {
            self.refactor();
        }
    }

    fn tick(&mut self) -> Result<(), LpError> {
        self.iterations += 1;
        if self.iterations - self.solve_start > self.iter_cap {
            return Err(LpError::NumericalFailure(format!(
                "iteration cap {} exceeded",
                self.iter_cap
            )));
        }
        Ok(())
    }

    fn run_primal(&mut self, phase: Phase) -> Result<PhaseEnd, LpError> {
        let tol = self.opts.feas_tol;
        let mut best = self.phase_objective(phase);
        let mut stall = 0usize;
        loop {
            if phase == Phase::One && self.is_primal_feasible() {
                return Ok(PhaseEnd::Optimal);
            }
            let cb = self.phase_costs(phase);
            let y = self.duals(&cb);
            let bland = stall >= self.opts.bland_after;

            let mut entering = NOT_BASIC;
            let mut best_score = 0.0;
            let mut dir = 0.0;
            for j in 0..self.n + self.m {
                if self.pos_of[j] != NOT_BASIC {
                    continue;
                }
                let (lo, hi) = (self.lower[j], self.upper[j]);
                if lo == hi {
                    continue;
                }
                let d = self.reduced_cost(j, &y, phase);
                let v = self.x[j];
                let score = if d < -self.opts.opt_tol && v < hi {
                    -d
                } else if d > self.opts.opt_tol && v > lo {
                    d
                } else {
                    continue;
                };
                if bland {
                    entering = j;
                    dir = if d < 0.0 { 1.0 } else { -1.0 };
                    break;
                }
                if score > best_score {
                    best_score = score;
                    entering = j;
                    dir = if d < 0.0 { 1.0 } else { -1.0 };
                }
            }
            if entering == NOT_BASIC {
                return Ok(match phase {
                    Phase::Two => PhaseEnd::Optimal,
                    Phase::One => PhaseEnd::Infeasible,
                });
            }
            self.tick()?;

            let w = self.ftran_col(entering);
            // Harris pass 1: largest step keeping every basic within relaxed bounds.
            let range = self.upper[entering] - self.lower[entering];
            let mut t_max = range;
            for (p, &wp) in w.iter().enumerate() {
                if wp.abs() <= self.opts.pivot_tol {
                    continue;
                }
                let j = self.basis[p];
                let delta = -dir * wp;
                let (lo, hi, v) = (self.lower[j], self.upper[j], self.x[j]);
                let t = if v < lo - tol {
                    if delta > 0.0 {
                        (lo - v) / delta
                    } else {
                        continue;
                    }
                } else if v > hi + tol {
                    if delta < 0.0 {
                        (hi - v) / delta
                    } else {
                        continue;
                    }
                } else if delta < 0.0 {
                    if lo.is_finite() {
                        (v - lo + tol) / -delta
                    } else {
                        continue;
                    }
                } else if hi.is_finite() {
                    (hi + tol - v) / delta
                } else {
                    continue;
                };
                if t < t_max {
                    t_max = t;
                }
            }
            if t_max.is_infinite() {
                if phase == Phase::Two {
                    return Ok(PhaseEnd::Unbounded);
                }
                return Err(LpError::NumericalFailure("unbounded ray in phase 1".into()));
            }
            // Pass 2: among blocking rows within t_max take the largest pivot.
            let mut leave = NOT_BASIC;
            let mut leave_abs = 0.0;
            let mut leave_t = 0.0;
            let mut leave_target = 0.0;
            for (p, &wp) in w.iter().enumerate() {
                if wp.abs() <= self.opts.pivot_tol {
                    continue;
                }
                let j = self.basis[p];
                let delta = -dir * wp;
                let (lo, hi, v) = (self.lower[j], self.upper[j], self.x[j]);
                let (t, target) = if v < lo - tol {
                    if delta > 0.0 {
                        ((lo - v) / delta, lo)
                    } else {
                        continue;
                    }
                } else if v > hi + tol {
                    if delta < 0.0 {
                        ((hi - v) / delta, hi)
                    } else {
                        continue;
                    }
                } else if delta < 0.0 {
                    if lo.is_finite() {
                        ((v - lo).max(0.0) / -delta, lo)
                    } else {
                        continue;
                    }
                } else if hi.is_finite() {
                    ((hi - v).max(0.0) / delta, hi)
                } else {
                    continue;
                };
                if t <= t_max {
                    let better = if bland {
                        leave == NOT_BASIC || j < self.basis[leave]
                    } else {
                        wp.abs() > leave_abs
                    };
                    if better {
                        leave = p;
                        leave_abs = wp.abs();
                        leave_t = t;
                        leave_target = target;
                    }
                }
            }

            if leave == NOT_BASIC || range <= leave_t {
                // bound flip of the entering variable
                let t = range;
                self.x[entering] = if dir > 0.0 {
                    self.upper[entering]
                } else {
                    self.lower[entering]
                };
                for (p, &wp) in w.iter().enumerate() {
                    if wp != 0.0 {
                        let j = self.basis[p];
                        self.x[j] -= dir * wp * t;
                    }
                }
            } else {
                let t = leave_t;
                self.x[entering] += dir * t;
                for (p, &wp) in w.iter().enumerate() {
                    if wp != 0.0 {
                        let j = self.basis[p];
                        self.x[j] -= dir * wp * t;
                    }
                }
                let leaving = self.basis[leave];
                self.x[leaving] = leave_target;
                self.pivot(leave, entering, &w);
            }

            let obj = self.phase_objective(phase);
            if obj < best - 1e-12 * (1.0 + best.abs()) {
                best = obj;
                stall = 0;
            } else {
                stall += 1;
            }
        }
    }

    fn is_dual_feasible(&self, y: &[f64]) -> bool {
        (0..self.n + self.m).all(|j| {
            if self.pos_of[j] != NOT_BASIC || self.lower[j] == self.upper[j] {
                return true;
            }
            let d = self.reduced_cost(j, y, Phase::Two);
            let v = self.x[j];
            !((d < -self.opts.opt_tol && v < self.upper[j])
                || (d > self.opts.opt_tol && v > self.lower[j]))
        })
    }

    /// Dual simplex from a dual feasible basis. Returns `Infeasible` with the
    /// certificate stored in `ray` when the primal has no solution.
    fn run_dual(&mut self, ray: &mut Option<Vec<f64>>) -> Result<PhaseEnd, LpError> {
        let tol = self.opts.feas_tol;
        loop {
            let mut leave = NOT_BASIC;
            let mut worst = tol;
            for (p, &j) in self.basis.iter().enumerate() {
                let inf = self.infeasibility(j);
                if inf > worst {
                    worst = inf;
                    leave = p;
                }
            }
            if leave == NOT_BASIC {
                return Ok(PhaseEnd::Optimal);
            }
            self.tick()?;
            let jl = self.basis[leave];
            let below = self.x[jl] < self.lower[jl];
            let target = if below {
                self.lower[jl]
            } else {
                self.upper[jl]
            };

            let mut e = vec![0.0; self.m];
            e[leave] = 1.0;
            let rho = self.factor.btran(&mut e);
            let cb = self.phase_costs(Phase::Two);
            let y = self.duals(&cb);

            let dtol = self.opts.opt_tol;
            let mut cands: Vec<(usize, f64, f64)> = Vec::new(); // (col, |alpha|, ratio)
            let mut t_max = f64::INFINITY;
            for j in 0..self.n + self.m {
                if self.pos_of[j] != NOT_BASIC || self.lower[j] == self.upper[j] {
                    continue;
                }
                let alpha: f64 = self.col(j).iter().map(|&(i, a)| a * rho[i]).sum();
                if alpha.abs() <= self.opts.pivot_tol {
                    continue;
                }
                let v = self.x[j];
                let can_inc = v < self.upper[j];
                let can_dec = v > self.lower[j];
                // x_leave changes by -alpha per unit increase of x_j
                let inc_ok = if below { alpha < 0.0 } else { alpha > 0.0 };
                let eligible = (inc_ok && can_inc) || (!inc_ok && can_dec);
                if !eligible {
                    continue;
                }
                let d = self.reduced_cost(j, &y, Phase::Two);
                let dd = if inc_ok { d.max(0.0) } else { (-d).max(0.0) };
                let ratio = dd / alpha.abs();
                let relaxed = (dd + dtol) / alpha.abs();
                if relaxed < t_max {
                    t_max = relaxed;
                }
                cands.push((j, alpha.abs(), ratio));
            }
            if cands.is_empty() {
                let sign = if below { -1.0 } else { 1.0 };
                *ray = Some(rho.iter().map(|v| sign * v).collect());
                return Ok(PhaseEnd::Infeasible);
            }
            let mut entering = NOT_BASIC;
            let mut best_alpha = 0.0;
            for &(j, a, ratio) in &cands {
                if ratio <= t_max && a > best_alpha {
                    best_alpha = a;
                    entering = j;
                }
            }
            let w = self.ftran_col(entering);
            let wp = w[leave];
            if wp.abs() <= self.opts.pivot_tol {
                // inconsistent row/column images; rebuild and retry
                self.refactor();
                continue;
            }
            let step = (self.x[jl] - target) / wp;
            self.x[entering] += step;
            for (p, &wv) in w.iter().enumerate() {
                if wv != 0.0 {
                    let j = self.basis[p];
                    self.x[j] -= wv * step;
                }
            }
            self.x[jl] = target;
            self.pivot(leave, entering, &w);
        }
    }

    /// Solve (or re-solve after bound changes) from the current basis.
    pub fn solve(&mut self) -> Result<LpOutcome, LpError> {
        for j in 0..self.n {
            if self.lower[j] > self.upper[j] {
                return Err(LpError::InvalidBounds {
                    var: j,
                    lower: self.lower[j],
                    upper: self.upper[j],
                });
            }
        }
        self.solve_start = self.iterations;
        self.refactor();
        let mut ray = None;
        let mut attempts = 0;
        let status = loop {
            attempts += 1;
            if !self.is_primal_feasible() {
                let y = self.duals(&self.phase_costs(Phase::Two));
                let mut end = None;
                if self.is_dual_feasible(&y) {
                    match self.run_dual(&mut ray)? {
                        PhaseEnd::Infeasible => end = Some(PhaseEnd::Infeasible),
                        _ => {}
                    }
                }
                if end.is_none() && !self.is_primal_feasible() {
                    ray = None;
                    if self.run_primal(Phase::One)? == PhaseEnd::Infeasible {
                        let cb = self.phase_costs(Phase::One);
                        ray = Some(self.duals(&cb));
                        end = Some(PhaseEnd::Infeasible);
                    }
                }
                if let Some(PhaseEnd::Infeasible) = end {
                    break LpStatus::Infeasible;
                }
            }
            let end = self.run_primal(Phase::Two)?;
            // guard against drift accumulated in the eta file
            self.refactor();
            if !self.is_primal_feasible() && attempts < 4 {
                continue;
            }
            break match end {
                PhaseEnd::Unbounded => LpStatus::Unbounded,
                _ => LpStatus::Optimal,
            };
        };
        Ok(self.outcome(status, ray))
    }

    fn outcome(&self, status: LpStatus, ray: Option<Vec<f64>>) -> LpOutcome {
        let x: Vec<f64> = self.x[..self.n].to_vec();
        let cb = self.phase_costs(Phase::Two);
        let ys = self.duals(&cb);
        let duals: Vec<f64> = ys.iter().zip(&self.row_scale).map(|(y, s)| y * s).collect();
        let reduced_costs = (0..self.n)
            .map(|j| self.reduced_cost(j, &ys, Phase::Two))
            .collect();
        let ray = ray.map(|r| {
            let scale = r.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
            r.iter()
                .zip(&self.row_scale)
                .map(|(v, s)| if v.abs() <= 1e-12 * scale { 0.0 } else { v * s })
                .collect()
        });
        let objective = self.obj_offset + (0..self.n).map(|j| self.cost[j] * x[j]).sum::<f64>();
        LpOutcome {
            status,
            x,
            objective,
            duals: if status == LpStatus::Optimal {
                duals
            } else {
                vec![0.0; self.m]
            },
            reduced_costs,
            ray,
            iterations: self.iterations,
        }
    }
}

fn initial_value(lo: f64, hi: f64, cost: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            if cost < 0.0 {
                hi
            } else {
                lo
            }
        }
        (true, false) => lo,
        (false, true) => hi,
        (false, false) => 0.0,
    }
}
