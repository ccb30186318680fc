//! Seeded random LPs and an outcome audit shared by the LP test targets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vran_core::lp::{dual_objective, farkas_margin, LpOutcome, LpProblem, LpStatus, Sense};

pub fn random_lp(seed: u64, max_rows: usize, max_cols: usize) -> LpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(1..=max_rows);
    let n = rng.gen_range(1..=max_cols);
    let mut lp = LpProblem::new();
    for _ in 0..n {
        let c = f64::from(rng.gen_range(-6i32..=6)) / 2.0;
        let lo = if rng.gen_bool(0.2) {
            -f64::from(rng.gen_range(0i32..=3))
        } else {
            0.0
        };
        let hi = if rng.gen_bool(0.6) {
            lo + f64::from(rng.gen_range(1i32..=10))
        } else {
            f64::INFINITY
        };
        lp.add_var(c, lo, hi);
    }
    for _ in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.45) {
                let v = f64::from(rng.gen_range(-8i32..=8)) / 4.0;
                if v != 0.0 {
                    coeffs.push((j, v));
                }
            }
        }
        let sense = match rng.gen_range(0..6) {
            0 => Sense::Eq,
            1 | 2 => Sense::Ge,
            _ => Sense::Le,
        };
        let rhs = f64::from(rng.gen_range(-10i32..=20)) / 2.0;
        lp.add_row(coeffs, sense, rhs);
    }
    lp
}

/// Returns a description of the first certificate property that fails.
pub fn audit(problem: &LpProblem, out: &LpOutcome) -> Result<(), String> {
    match out.status {
        LpStatus::Optimal => {
            let viol = problem.max_violation(&out.x);
            if viol > 1e-7 {
                return Err(format!("primal violation {viol}"));
            }
            for (i, (row, &y)) in problem.rows.iter().zip(&out.duals).enumerate() {
                let bad = match row.sense {
                    Sense::Le => y > 1e-7,
                    Sense::Ge => y < -1e-7,
                    Sense::Eq => false,
                };
                if bad {
                    return Err(format!("dual sign on row {i}: {y}"));
                }
                let slack = row.activity(&out.x) - row.rhs;
                if (y * slack).abs() > 1e-6 {
                    return Err(format!("complementary slackness on row {i}"));
                }
            }
            let dual = dual_objective(problem, &out.duals);
            let primal = problem.objective_value(&out.x);
            if (dual - primal).abs() > 1e-6 * (1.0 + primal.abs()) {
                return Err(format!("primal {primal} vs dual {dual}"));
            }
            if (primal - out.objective).abs() > 1e-9 * (1.0 + primal.abs()) {
                return Err("reported objective differs from x".into());
            }
            Ok(())
        }
        LpStatus::Infeasible => {
            let ray = out.ray.as_ref().ok_or("infeasible without ray")?;
            let margin = farkas_margin(problem, ray);
            if margin > 1e-9 {
                Ok(())
            } else {
                Err(format!("Farkas margin {margin}"))
            }
        }
        LpStatus::Unbounded => Ok(()),
    }
}
