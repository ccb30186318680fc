mod support;

use support::fixtures::{random_small, two_path};
use vran_core::benders::{CutKind, CutPool, Cut};
use vran_core::instance::{check_feasibility, Binaries, Choice, Split};
use vran_core::lp::{read_lp, solve_lp, solve_milp, LpStatus, MilpOptions, MilpStatus, Sense};
use vran_core::model::{
    build_master, build_monolithic, build_slave, mccormick, Affine, DelayMode, ModelOptions, RowTag,
};
use vran_core::solve::solve_monolithic;

#[test]
fn single_pair_counts() {
    let inst = two_path(1e5, |c| c.paths.k = 1);
    let model = build_monolithic(&inst, &ModelOptions::default()).unwrap();
    assert_eq!(model.vars.num_binaries(), 7);
    assert_eq!(model.vars.len() - model.vars.num_binaries(), 2);
    for tag in [
        RowTag::CuChain,
        RowTag::DuChain,
        RowTag::UniqueF1,
        RowTag::UniqueF2,
        RowTag::DuCapacity,
        RowTag::CuCapacity,
        RowTag::SingleCu,
        RowTag::Ordering,
        RowTag::LinkCapacity,
        RowTag::Coupling,
        RowTag::CoreRouting,
        RowTag::DelayS1,
        RowTag::DelayS2,
        RowTag::DelayS3,
    ] {
        assert!(model.count_rows(tag) >= 1, "missing {tag}");
    }
    assert_eq!(model.count_rows(RowTag::Envelope), 6);
    assert!(model.integer[..7].iter().all(|&b| b));
    assert!((0..7).all(|j| model.lower[j] == 0.0 && model.upper[j] == 1.0));
}

#[test]
fn mccormick_truth_table() {
    for x in [0.0, 1.0] {
        for z in [0.0, 1.0] {
            let feasible: Vec<f64> = [0.0, 1.0]
                .into_iter()
                .filter(|&v| {
                    let point = [x, z, v];
                    mccormick(0, 1, 2).iter().all(|(coeffs, sense, rhs)| {
                        let lhs: f64 = coeffs.iter().map(|&(j, c)| c * point[j]).sum();
                        assert_eq!(*sense, Sense::Le);
                        lhs <= *rhs
                    })
                })
                .collect();
            assert_eq!(feasible, vec![x * z], "x={x} z={z}");
        }
    }
}

#[test]
fn coupling_is_zero_without_assignment() {
    let inst = two_path(1e5, |_| {});
    let model = build_monolithic(&inst, &ModelOptions::default()).unwrap();
    let b = Binaries::from_choices(&[Choice::DRan], 1);
    let point = model.vars.point(&b);
    let row = model.rows.iter().find(|r| r.tag == RowTag::Coupling).unwrap();
    let affine_part: f64 = row
        .coeffs
        .iter()
        .filter(|&&(j, _)| j < model.vars.num_binaries())
        .map(|&(j, c)| c * point[j])
        .sum();
    assert_eq!(affine_part, 0.0);
    assert_eq!(row.rhs, 0.0);
}

#[test]
fn slave_prefers_the_cheaper_path() {
    let s1 = Binaries::from_choices(
        &[Choice::Split {
            split: Split::S1,
            cu: 0,
        }],
        1,
    );
    let ample = two_path(1e5, |_| {});
    let slave = build_slave(&ample, &ModelOptions::default(), &s1).unwrap();
    let out = solve_lp(&slave.lp).unwrap();
    assert_eq!(out.status, LpStatus::Optimal);
    assert!((out.objective - 150.0).abs() < 1e-9);
    let direct = ample.paths.to_cu(0, 0)[0];
    assert!((out.x[direct] - 150.0).abs() < 1e-9);

    let tight = two_path(100.0, |_| {});
    let out = solve_lp(&build_slave(&tight, &ModelOptions::default(), &s1).unwrap().lp).unwrap();
    let ids = tight.paths.to_cu(0, 0);
    assert!((out.objective - 200.0).abs() < 1e-9);
    assert!((out.x[ids[0]] - 100.0).abs() < 1e-9);
    assert!((out.x[ids[1]] - 50.0).abs() < 1e-9);
}

#[test]
fn distributed_slave_is_shortest_paths() {
    let inst = random_small(11, 3, 2, 2);
    let b = Binaries::from_choices(&[Choice::DRan; 3], 2);
    let out = solve_lp(&build_slave(&inst, &ModelOptions::default(), &b).unwrap().lp).unwrap();
    let expect: f64 = (0..3)
        .map(|n| {
            let cheapest = inst
                .paths
                .to_core(n)
                .iter()
                .map(|&k| inst.paths.paths[k].path.cost)
                .fold(f64::INFINITY, f64::min);
            inst.lambda[n] * cheapest
        })
        .sum();
    // ample capacity relative to demand makes every DU use its cheapest path
    if out.status == LpStatus::Optimal && inst.lambda.iter().sum::<f64>() < 1000.0 {
        assert!((out.objective - expect).abs() <= 1e-6 * (1.0 + expect));
    }
}

#[test]
fn empty_master_ignores_routing() {
    let inst = two_path(1e5, |_| {});
    let opts = ModelOptions::default();
    let master = build_master(&inst, &opts, &CutPool::new()).unwrap();
    let out = solve_milp(&master.to_problem(), MilpOptions::default()).unwrap();
    assert_eq!(out.status, MilpStatus::Optimal);
    assert_eq!(out.x[master.vars.theta()], 0.0);

    let mut pool = CutPool::new();
    pool.insert(Cut {
        kind: CutKind::Optimality,
        h: Affine::constant(5.0),
        source: vec![],
        iteration: 1,
    });
    let master = build_master(&inst, &opts, &pool).unwrap();
    let with_cut = solve_milp(&master.to_problem(), MilpOptions::default()).unwrap();
    assert!((with_cut.x[master.vars.theta()] - 5.0).abs() < 1e-9);
    assert!((with_cut.objective - out.objective - 5.0).abs() < 1e-9);
}

#[test]
fn lp_export_is_stable_and_parses() {
    let inst = random_small(5, 3, 2, 2);
    let model = build_monolithic(&inst, &ModelOptions::default()).unwrap();
    let text = model.to_lp_string();
    assert_eq!(text, build_monolithic(&inst, &ModelOptions::default()).unwrap().to_lp_string());
    let parsed = read_lp(&text).unwrap();
    assert_eq!(parsed.problem.lp.num_vars(), model.vars.len());
    assert_eq!(parsed.problem.lp.num_rows(), model.rows.len());
    let a = solve_milp(&parsed.problem, MilpOptions::default()).unwrap();
    let b = solve_milp(&model.to_problem(), MilpOptions::default()).unwrap();
    assert_eq!(a.status, b.status);
    if b.status == MilpStatus::Optimal {
        assert!((a.objective - b.objective).abs() < 1e-6);
    }
}

#[test]
fn delay_modes_agree_and_ignore_relaxes() {
    for seed in 0..12 {
        let inst = random_small(100 + seed, 3, 2, 2);
        let obj = |mode| {
            let opts = ModelOptions {
                delay_mode: mode,
                ..ModelOptions::default()
            };
            solve_monolithic(&inst, &opts, MilpOptions::default()).unwrap().1.map(|s| s.objective)
        };
        let corrected = obj(DelayMode::Corrected);
        let prefilter = obj(DelayMode::Prefilter);
        match (corrected, prefilter) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-6, "seed {seed}: {a} vs {b}"),
            (None, None) => {}
            other => panic!("seed {seed}: status mismatch {other:?}"),
        }
        if let (Some(c), Some(i)) = (corrected, obj(DelayMode::Ignore)) {
            assert!(i <= c + 1e-6);
        }
        if let (Some(c), Some(p)) = (corrected, obj(DelayMode::AsPrinted)) {
            assert!(p <= c + 1e-6);
        }
    }
}

#[test]
fn relaxation_bounds_the_optimum() {
    for seed in 0..8 {
        let inst = random_small(200 + seed, 3, 2, 1);
        let p = build_monolithic(&inst, &ModelOptions::default()).unwrap().to_problem();
        let out = solve_milp(&p, MilpOptions::default()).unwrap();
        if out.status == MilpStatus::Optimal {
            let relaxed = solve_lp(p.relaxation()).unwrap();
            assert!(relaxed.objective <= out.objective + 1e-6);
        }
    }
}

#[test]
fn monolithic_solutions_pass_the_checker() {
    for seed in 0..10 {
        let inst = random_small(300 + seed, 3, 2, 2);
        if let (_, Some(sol), _) = solve_monolithic(&inst, &ModelOptions::default(), MilpOptions::default()).unwrap() {
            let report = check_feasibility(&sol, &inst);
            assert!(report.is_feasible(), "seed {seed}: {report}");
        }
    }
}
