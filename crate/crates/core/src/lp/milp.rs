//! Best-first branch-and-bound over LP relaxations.
//!
//! Children are solved eagerly with a dual simplex warm start from the parent
//! basis, so every queued node carries its own relaxation bound. Branching
//! picks the most fractional integer variable (lowest index on ties); the
//! queue pops the lowest bound, deeper nodes first on equal bounds.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::problem::{LpProblem, LpStatus};
use super::simplex::{Basis, LpOptions, SimplexSolver};
use super::LpError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpProblem {
    pub lp: LpProblem,
    pub integer: Vec<bool>,
    /// Branching priority per variable; fractional variables of the highest
    /// priority present are branched on first. Empty means all equal.
    #[serde(default)]
    pub priority: Vec<u8>,
}

impl MilpProblem {
    pub fn new(lp: LpProblem, integer: Vec<bool>) -> Self {
        Self {
            lp,
            integer,
            priority: Vec::new(),
        }
    }

    pub fn with_priority(mut self, priority: Vec<u8>) -> Self {
        self.priority = priority;
        self
    }

    /// The continuous relaxation.
    pub fn relaxation(&self) -> &LpProblem {
        &self.lp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MilpOptions {
    pub int_tol: f64,
    /// Nodes whose bound is within this absolute gap of the incumbent are pruned.
    pub abs_gap: f64,
    /// Relative part of the pruning gap.
    pub rel_gap: f64,
    pub node_limit: usize,
    pub lp: LpOptions,
}

impl Default for MilpOptions {
    fn default() -> Self {
        Self {
            int_tol: 1e-6,
            abs_gap: 1e-9,
            rel_gap: 1e-11,
            node_limit: 500_000,
            lp: LpOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NodeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpOutcome {
    pub status: MilpStatus,
    /// Incumbent, empty when none was found.
    pub x: Vec<f64>,
    pub objective: f64,
    pub nodes: usize,
    /// Incumbent minus best open bound (0 when proven optimal).
    pub gap: f64,
    pub root_bound: f64,
    pub lp_iterations: usize,
}

impl MilpOutcome {
    pub fn has_incumbent(&self) -> bool {
        !self.x.is_empty()
    }
}

struct Node {
    bound: f64,
    depth: usize,
    id: usize,
    changes: Vec<(u32, f64, f64)>,
    basis: Basis,
    branch_var: usize,
    branch_value: f64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: the "greatest" node is the one to explore next.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

enum Evaluated {
    Pruned,
    Unbounded,
    Integral(Vec<f64>, f64),
    Fractional { var: usize, value: f64, bound: f64 },
}

struct Search<'a> {
    problem: &'a MilpProblem,
    opts: MilpOptions,
    solver: SimplexSolver,
    root_lower: Vec<f64>,
    root_upper: Vec<f64>,
    applied: Vec<usize>,
    incumbent: Option<(Vec<f64>, f64)>,
}

impl<'a> Search<'a> {
    fn prune_tol(&self, inc: f64) -> f64 {
        self.opts.abs_gap + self.opts.rel_gap * inc.abs()
    }

    fn dominated(&self, bound: f64) -> bool {
        match &self.incumbent {
            Some((_, inc)) => bound >= inc - self.prune_tol(*inc),
            None => false,
        }
    }

    fn apply(&mut self, changes: &[(u32, f64, f64)]) {
        for &j in &self.applied {
            self.solver
                .set_var_bounds(j, self.root_lower[j], self.root_upper[j]);
        }
        self.applied.clear();
        for &(j, lo, hi) in changes {
            let j = j as usize;
            let (cur_lo, cur_hi) = self.solver.var_bounds(j);
            self.solver
                .set_var_bounds(j, lo.max(cur_lo), hi.min(cur_hi));
            self.applied.push(j);
        }
    }

    fn most_fractional(&self, x: &[f64]) -> Option<(usize, f64, f64)> {
        let prio = |j: usize| self.problem.priority.get(j).copied().unwrap_or(0);
        let mut best: Option<(usize, f64, f64)> = None;
        for (j, &v) in x.iter().enumerate() {
            if !self.problem.integer[j] {
                continue;
            }
            let frac = (v - v.round()).abs();
            if frac == 0.0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((b, _, f)) => (prio(j), frac) > (prio(b), f),
            };
            if better {
                best = Some((j, v, frac));
            }
        }
        best
    }

    /// Fix every integer variable at its rounded value and re-solve for the
    /// continuous part; the resulting objective is exact for that assignment.
    fn polish(&mut self, x: &[f64]) -> Result<Option<(Vec<f64>, f64)>, LpError> {
        let mut saved = Vec::new();
        for (j, &v) in x.iter().enumerate() {
            if self.problem.integer[j] {
                let r = v.round();
                saved.push((j, self.solver.var_bounds(j)));
                self.solver.set_var_bounds(j, r, r);
            }
        }
        let basis = self.solver.basis();
        let out = self.solver.solve();
        for &(j, (lo, hi)) in &saved {
            self.solver.set_var_bounds(j, lo, hi);
        }
        self.solver.load_basis(&basis);
        let out = out?;
        if out.status != LpStatus::Optimal {
            return Ok(None);
        }
        let mut xs = out.x;
        for (j, v) in xs.iter_mut().enumerate() {
            if self.problem.integer[j] {
                *v = v.round();
            }
        }
        let obj = self.problem.lp.objective_value(&xs);
        Ok(Some((xs, obj)))
    }

    fn evaluate(&mut self) -> Result<Evaluated, LpError> {
        let out = self.solver.solve()?;
        match out.status {
            LpStatus::Infeasible => return Ok(Evaluated::Pruned),
            LpStatus::Unbounded => return Ok(Evaluated::Unbounded),
            LpStatus::Optimal => {}
        }
        if self.dominated(out.objective) {
            return Ok(Evaluated::Pruned);
        }
        match self.most_fractional(&out.x) {
            Some((var, value, frac)) if frac > self.opts.int_tol => Ok(Evaluated::Fractional {
                var,
                value,
                bound: out.objective,
            }),
            near => match self.polish(&out.x)? {
                Some((x, obj)) => Ok(Evaluated::Integral(x, obj)),
                None => match near {
                    Some((var, value, _)) => Ok(Evaluated::Fractional {
                        var,
                        value,
                        bound: out.objective,
                    }),
                    None => Ok(Evaluated::Pruned),
                },
            },
        }
    }

    fn least_fractional(&self, x: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for (j, &v) in x.iter().enumerate() {
            if !self.problem.integer[j] {
                continue;
            }
            let frac = (v - v.round()).abs();
            if frac <= self.opts.int_tol {
                continue;
            }
            if best.map_or(true, |(_, _, f)| frac < f) {
                best = Some((j, v, frac));
            }
        }
        best.map(|(j, v, _)| (j, v))
    }

    /// Fractional diving from the root: repeatedly fix the integer variable
    /// closest to integrality and re-solve, trying the other value once on
    /// failure. Any integral point reached becomes the incumbent.
    fn dive(&mut self, root_x: &[f64], root_basis: &Basis) -> Result<(), LpError> {
        let mut changes: Vec<(u32, f64, f64)> = Vec::new();
        let mut x = root_x.to_vec();
        let limit = self.problem.integer.iter().filter(|&&b| b).count();
        for _ in 0..limit {
            let Some((j, v)) = self.least_fractional(&x) else {
                if let Some((xs, obj)) = self.polish(&x)? {
                    self.offer(xs, obj);
                }
                break;
            };
            let first = v.round();
            let mut moved = false;
            for value in [first, if first > v { v.floor() } else { v.ceil() }] {
                changes.push((j as u32, value, value));
                self.apply(&changes);
                let out = self.solver.solve()?;
                if out.status == LpStatus::Optimal && !self.dominated(out.objective) {
                    x = out.x;
                    moved = true;
                    break;
                }
                changes.pop();
            }
            if !moved {
                break;
            }
        }
        self.apply(&[]);
        self.solver.load_basis(root_basis);
        Ok(())
    }

    fn offer(&mut self, x: Vec<f64>, obj: f64) {
        let better = match &self.incumbent {
            Some((_, inc)) => obj < *inc - 1e-12 * (1.0 + inc.abs()),
            None => true,
        };
        if better {
            log::trace!("new incumbent {obj}");
            self.incumbent = Some((x, obj));
        }
    }
}

/// Solve a mixed-integer program to proven optimality (or the node limit).
pub fn solve_milp(problem: &MilpProblem, opts: MilpOptions) -> Result<MilpOutcome, LpError> {
    if problem.integer.len() != problem.lp.num_vars() {
        return Err(LpError::Dimension(format!(
            "{} integrality flags for {} variables",
            problem.integer.len(),
            problem.lp.num_vars()
        )));
    }
    let mut lower = problem.lp.lower.clone();
    let mut upper = problem.lp.upper.clone();
    for j in 0..lower.len() {
        if problem.integer[j] {
            lower[j] = lower[j].ceil();
            upper[j] = upper[j].floor();
        }
    }
    let mut solver = SimplexSolver::new(&problem.lp, opts.lp)?;
    for j in 0..lower.len() {
        if problem.integer[j] {
            if lower[j] > upper[j] {
                return Ok(infeasible(0, f64::INFINITY, 0));
            }
            solver.set_var_bounds(j, lower[j], upper[j]);
        }
    }
    let mut search = Search {
        problem,
        opts,
        solver,
        root_lower: lower,
        root_upper: upper,
        applied: Vec::new(),
        incumbent: None,
    };

    let mut nodes = 1usize;
    let mut next_id = 0usize;
    let mut heap = BinaryHeap::new();
    let root_bound;
    match search.evaluate()? {
        Evaluated::Pruned => {
            let it = search.solver.iterations();
            return Ok(infeasible(nodes, f64::INFINITY, it));
        }
        Evaluated::Unbounded => return unbounded_verdict(problem, opts),
        Evaluated::Integral(x, obj) => {
            root_bound = obj;
            search.offer(x, obj);
        }
        Evaluated::Fractional { var, value, bound } => {
            root_bound = bound;
            let basis = search.solver.basis();
            let root_x = search.solver.solve()?.x;
            search.dive(&root_x, &basis)?;
            heap.push(Node {
                bound,
                depth: 0,
                id: next_id,
                changes: Vec::new(),
                basis: search.solver.basis(),
                branch_var: var,
                branch_value: value,
            });
            next_id += 1;
        }
    }

    let mut hit_limit = false;
    while let Some(node) = heap.pop() {
        if search.dominated(node.bound) {
            continue;
        }
        if nodes >= opts.node_limit {
            heap.push(node);
            hit_limit = true;
            break;
        }
        let j = node.branch_var;
        let (lo, hi) = (search.root_lower[j], search.root_upper[j]);
        let down = (j as u32, lo, node.branch_value.floor());
        let up = (j as u32, node.branch_value.ceil(), hi);
        for change in [down, up] {
            let mut changes = node.changes.clone();
            changes.push(change);
            search.apply(&changes);
            search.solver.load_basis(&node.basis);
            nodes += 1;
            match search.evaluate()? {
                Evaluated::Pruned => {}
                Evaluated::Unbounded => {
                    return Err(LpError::NumericalFailure(
                        "unbounded relaxation below a bounded root".into(),
                    ))
                }
                Evaluated::Integral(x, obj) => search.offer(x, obj),
                Evaluated::Fractional { var, value, bound } => {
                    heap.push(Node {
                        bound,
                        depth: node.depth + 1,
                        id: next_id,
                        changes,
                        basis: search.solver.basis(),
                        branch_var: var,
                        branch_value: value,
                    });
                    next_id += 1;
                }
            }
        }
    }

    let iterations = search.solver.iterations();
    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    match search.incumbent {
        Some((x, obj)) => {
            let gap = if hit_limit {
                (obj - open_bound).max(0.0)
            } else {
                0.0
            };
            Ok(MilpOutcome {
                status: if hit_limit {
                    MilpStatus::NodeLimit
                } else {
                    MilpStatus::Optimal
                },
                x,
                objective: obj,
                nodes,
                gap,
                root_bound,
                lp_iterations: iterations,
            })
        }
        None if hit_limit => Ok(MilpOutcome {
            status: MilpStatus::NodeLimit,
            x: Vec::new(),
            objective: f64::INFINITY,
            nodes,
            gap: f64::INFINITY,
            root_bound,
            lp_iterations: iterations,
        }),
        None => Ok(infeasible(nodes, root_bound, iterations)),
    }
}

/// With every integer variable bounded, a recession direction of the
/// relaxation moves only continuous variables, so the program is unbounded
/// exactly when some integer point is feasible.
fn unbounded_verdict(problem: &MilpProblem, opts: MilpOptions) -> Result<MilpOutcome, LpError> {
    let bounded = (0..problem.lp.num_vars()).all(|j| {
        !problem.integer[j] || (problem.lp.lower[j].is_finite() && problem.lp.upper[j].is_finite())
    });
    if !bounded {
        return Err(LpError::NumericalFailure(
            "unbounded relaxation with unbounded integer variables".into(),
        ));
    }
    let mut feas = problem.clone();
    feas.lp.obj.iter_mut().for_each(|c| *c = 0.0);
    let probe = solve_milp(&feas, opts)?;
    Ok(match probe.status {
        MilpStatus::Optimal => MilpOutcome {
            status: MilpStatus::Unbounded,
            x: probe.x,
            objective: f64::NEG_INFINITY,
            nodes: probe.nodes,
            gap: f64::INFINITY,
            root_bound: f64::NEG_INFINITY,
            lp_iterations: probe.lp_iterations,
        },
        _ => MilpOutcome {
            root_bound: f64::NEG_INFINITY,
            ..probe
        },
    })
}

fn infeasible(nodes: usize, root_bound: f64, iterations: usize) -> MilpOutcome {
    MilpOutcome {
        status: MilpStatus::Infeasible,
        x: Vec::new(),
        objective: f64::INFINITY,
        nodes,
        gap: f64::INFINITY,
        root_bound,
        lp_iterations: iterations,
    }
}
