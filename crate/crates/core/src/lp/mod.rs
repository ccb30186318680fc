//! Linear and mixed-integer programming core.
//!
//! [`solve_lp`] runs a bounded-variable revised simplex and returns duals on
//! optimality or a Farkas certificate on infeasibility. [`solve_milp`] wraps
//! it in best-first branch-and-bound.

mod lpfile;
mod lu;
mod milp;
mod problem;
mod simplex;

pub use lpfile::{read_lp, write_lp, LpFile, LpFileError};
pub use milp::{solve_milp, MilpOptions, MilpOutcome, MilpProblem, MilpStatus};
pub use problem::{dual_objective, farkas_margin, LpOutcome, LpProblem, LpRow, LpStatus, Sense};
pub use simplex::{Basis, LpOptions, SimplexSolver};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite data in {0}")]
    NonFinite(String),
    #[error("variable {var} has lower bound {lower} above upper bound {upper}")]
    InvalidBounds { var: usize, lower: f64, upper: f64 },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

/// Solve `problem` from scratch with default options.
pub fn solve_lp(problem: &LpProblem) -> Result<LpOutcome, LpError> {
    solve_lp_with(problem, LpOptions::default())
}

pub fn solve_lp_with(problem: &LpProblem, opts: LpOptions) -> Result<LpOutcome, LpError> {
    let mut solver = SimplexSolver::new(problem, opts)?;
    let outcome = solver.solve()?;
    check_outcome(problem, &outcome, opts.verify)?;
    Ok(outcome)
}

/// Relative agreement used by the certificate checks.
fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

pub(crate) fn check_outcome(
    problem: &LpProblem,
    outcome: &LpOutcome,
    verify_optimal: bool,
) -> Result<(), LpError> {
    match outcome.status {
        LpStatus::Infeasible => {
            let ray = outcome.ray.as_ref().ok_or_else(|| {
                LpError::NumericalFailure("infeasible outcome without certificate".into())
            })?;
            let margin = farkas_margin(problem, ray);
            if !(margin > 0.0) {
                return Err(LpError::NumericalFailure(format!(
                    "infeasibility certificate failed verification (margin {margin})"
                )));
            }
        }
        LpStatus::Optimal if verify_optimal => {
            let dual = dual_objective(problem, &outcome.duals);
            if !close(dual, outcome.objective, 1e-7) {
                return Err(LpError::NumericalFailure(format!(
                    "duality gap: primal {} dual {}",
                    outcome.objective, dual
                )));
            }
        }
        _ => {}
    }
    Ok(())
}
