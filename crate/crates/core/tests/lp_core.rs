mod support;

use support::dense::{self, DenseStatus};
use support::random_lp::{audit, random_lp};
use vran_core::lp::{
    farkas_margin, solve_lp, solve_lp_with, LpOptions, LpProblem, LpStatus, Sense,
};

#[test]
fn two_variable_textbook_lp() {
    let mut lp = LpProblem::new();
    let x = lp.add_var(-1.0, 0.0, f64::INFINITY);
    let y = lp.add_var(-1.0, 0.0, f64::INFINITY);
    lp.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Le, 1.0);
    let out = solve_lp(&lp).unwrap();
    assert_eq!(out.status, LpStatus::Optimal);
    assert!((out.objective + 1.0).abs() < 1e-12);
    assert!((out.x[0] + out.x[1] - 1.0).abs() < 1e-12);
    assert!((out.duals[0] + 1.0).abs() < 1e-12);
}

#[test]
fn contradictory_bounds_give_a_verified_ray() {
    let mut lp = LpProblem::new();
    let x = lp.add_var(0.0, f64::NEG_INFINITY, f64::INFINITY);
    lp.add_row(vec![(x, 1.0)], Sense::Le, -1.0);
    lp.add_row(vec![(x, -1.0)], Sense::Le, 0.0);
    let out = solve_lp(&lp).unwrap();
    assert_eq!(out.status, LpStatus::Infeasible);
    let ray = out.ray.unwrap();
    // Nonpositive multipliers on <= rows: the certificate is -(1, 1).
    let scale = -ray[0];
    assert!(scale > 0.0);
    assert!((ray[1] / scale + 1.0).abs() < 1e-12);
    assert!((farkas_margin(&lp, &ray) / scale - 1.0).abs() < 1e-12);
}

#[test]
fn unbounded_direction_is_reported() {
    let mut lp = LpProblem::new();
    let x = lp.add_var(-1.0, 0.0, f64::INFINITY);
    let y = lp.add_var(0.0, 0.0, f64::INFINITY);
    lp.add_row(vec![(x, 1.0), (y, -1.0)], Sense::Le, 2.0);
    assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
}

#[test]
fn random_ten_by_ten_match_dense_reference() {
    let mut statuses = [0usize; 3];
    for seed in 0..150 {
        let lp = random_lp(seed, 10, 10);
        let out = solve_lp(&lp).unwrap();
        audit(&lp, &out).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        match (dense::solve(&lp), out.status) {
            (DenseStatus::Optimal(v), LpStatus::Optimal) => {
                statuses[0] += 1;
                assert!(
                    (v - out.objective).abs() <= 1e-6,
                    "seed {seed}: {v} vs {}",
                    out.objective
                )
            }
            (DenseStatus::Infeasible, LpStatus::Infeasible) => statuses[1] += 1,
            (DenseStatus::Unbounded, LpStatus::Unbounded) => statuses[2] += 1,
            (d, s) => panic!("seed {seed}: reference {d:?}, solver {s:?}"),
        }
    }
    // the generator must exercise every outcome
    assert!(statuses.iter().all(|&c| c > 5), "{statuses:?}");
}

#[test]
fn verify_flag_accepts_sound_outcomes() {
    let opts = LpOptions {
        verify: true,
        ..LpOptions::default()
    };
    for seed in 1000..1050 {
        let lp = random_lp(seed, 20, 20);
        solve_lp_with(&lp, opts).unwrap();
    }
}

#[test]
fn solving_is_deterministic() {
    let lp = random_lp(77, 20, 20);
    let a = solve_lp(&lp).unwrap();
    let b = solve_lp(&lp).unwrap();
    assert_eq!(a, b);
}
