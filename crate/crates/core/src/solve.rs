//! One entry point over the three solution methods.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::benders::{self, BendersOptions, BendersStatus, IterationLog};
use crate::instance::{Instance, Solution};
use crate::lp::{solve_milp, MilpOptions, MilpStatus};
use crate::model::{build_monolithic, ModelOptions};
use crate::oracle::{self, OracleOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Benders,
    Milp,
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Benders => "benders",
            Method::Milp => "milp",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "benders" => Ok(Method::Benders),
            "milp" => Ok(Method::Milp),
            "oracle" => Ok(Method::Oracle),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    IterLimit,
    TooLarge,
    Error(String),
}

impl SolveStatus {
    pub fn name(&self) -> &str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::IterLimit => "iter_limit",
            SolveStatus::TooLarge => "too_large",
            SolveStatus::Error(_) => "error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub model: ModelOptions,
    pub epsilon: f64,
    pub max_iter: usize,
    pub oracle_cap: u64,
    pub milp: MilpOptions,
    pub seed_cuts: bool,
}

impl SolveOptions {
    pub fn for_instance(inst: &Instance) -> Self {
        SolveOptions {
            model: ModelOptions::default(),
            epsilon: inst.epsilon,
            max_iter: inst.max_iter,
            oracle_cap: oracle::DEFAULT_CAP,
            milp: MilpOptions::default(),
            seed_cuts: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub method: Method,
    pub status: SolveStatus,
    pub solution: Option<Solution>,
    /// Benders iterations or branch-and-bound nodes; configurations for the oracle
    pub iterations: u64,
    pub trace: Option<IterationLog>,
    pub wall_ms: f64,
}

impl SolveReport {
    pub fn objective(&self) -> Option<f64> {
        self.solution.as_ref().map(|s| s.objective)
    }
}

pub fn solve(inst: &Instance, method: Method, opts: &SolveOptions) -> SolveReport {
    let start = Instant::now();
    let mut report = SolveReport {
        method,
        status: SolveStatus::Optimal,
        solution: None,
        iterations: 0,
        trace: None,
        wall_ms: 0.0,
    };
    match method {
        Method::Benders => {
            let bo = BendersOptions {
                epsilon: opts.epsilon,
                max_iter: opts.max_iter,
                model: opts.model,
                milp: opts.milp,
                seed_cuts: opts.seed_cuts,
            };
            match benders::run(inst, &bo) {
                Ok(r) => {
                    report.iterations = r.iterations() as u64;
                    if r.status == BendersStatus::IterLimit {
                        report.status = SolveStatus::IterLimit;
                    }
                    report.solution = r.solution;
                    report.trace = Some(r.log);
                }
                Err(benders::BendersError::InfeasibleInstance) => {
                    report.status = SolveStatus::Infeasible
                }
                Err(e) => report.status = SolveStatus::Error(e.to_string()),
            }
        }
        Method::Milp => match solve_monolithic(inst, &opts.model, opts.milp) {
            Ok((status, sol, nodes)) => {
                report.status = status;
                report.solution = sol;
                report.iterations = nodes as u64;
            }
            Err(e) => report.status = SolveStatus::Error(e),
        },
        Method::Oracle => {
            let oo = OracleOptions {
                cap: opts.oracle_cap,
                model: opts.model,
            };
            match oracle::brute_force(inst, &oo) {
                Ok(r) => {
                    report.iterations = r.enumerated;
                    if r.solution.is_none() {
                        report.status = SolveStatus::Infeasible;
                    }
                    report.solution = r.solution;
                }
                Err(oracle::OracleError::TooLarge { .. }) => report.status = SolveStatus::TooLarge,
                Err(e) => report.status = SolveStatus::Error(e.to_string()),
            }
        }
    }
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    report
}

/// Solve the linearised model in one branch-and-bound run.
pub fn solve_monolithic(
    inst: &Instance,
    model: &ModelOptions,
    milp: MilpOptions,
) -> Result<(SolveStatus, Option<Solution>, usize), String> {
    let m = build_monolithic(inst, model).map_err(|e| e.to_string())?;
    let out = solve_milp(&m.to_problem(), milp).map_err(|e| e.to_string())?;
    let status = match out.status {
        MilpStatus::Optimal => SolveStatus::Optimal,
        MilpStatus::Infeasible => return Ok((SolveStatus::Infeasible, None, out.nodes)),
        MilpStatus::NodeLimit if out.has_incumbent() => SolveStatus::IterLimit,
        other => return Err(format!("branch-and-bound ended with {other:?}")),
    };
    let b = m.vars.binaries(&out.x);
    let flows = (0..m.vars.num_paths).map(|k| out.x[m.vars.r(k)].max(0.0)).collect();
    Ok((status, Some(Solution::evaluate(b, flows, inst)), out.nodes))
}
