mod support;

use proptest::prelude::*;
use support::fixtures::{instance, link, node, random_small, two_path};
use vran_core::benders::{self, dual_value_h, make_cut, BendersOptions, BendersStatus, CutKind};
use vran_core::instance::{check_feasibility, Binaries, Choice, Instance, Split};
use vran_core::lp::{solve_lp, LpStatus};
use vran_core::model::{build_slave, ModelOptions};
use vran_core::net::NodeKind;
use vran_core::model::DelayMode;
use vran_core::oracle::{brute_force, choice_menu, route_choices, OracleOptions};

fn exact(inst: &Instance) -> BendersOptions {
    BendersOptions {
        epsilon: 0.0,
        ..BendersOptions::for_instance(inst)
    }
}

fn plain(inst: &Instance) -> BendersOptions {
    BendersOptions {
        seed_cuts: false,
        ..exact(inst)
    }
}

fn s(split: Split, cu: usize) -> Choice {
    Choice::Split { split, cu }
}

#[test]
fn zero_duals_give_zero() {
    let inst = two_path(1e5, |_| {});
    let b = Binaries::from_choices(&[s(Split::S2, 0)], 1);
    let slave = build_slave(&inst, &ModelOptions::default(), &b).unwrap();
    let zeros = vec![0.0; slave.lp.num_rows()];
    assert_eq!(dual_value_h(&zeros, &slave, &b).unwrap(), 0.0);
    assert!(dual_value_h(&[0.0], &slave, &b).is_err());
}

#[test]
fn optimality_cut_is_tight_at_its_point() {
    for seed in 0..15 {
        let inst = random_small(seed, 3, 2, 2);
        let menu = vran_core::oracle::choice_menu(2);
        let choices: Vec<Choice> = (0..3).map(|n| menu[(seed as usize * 3 + n * 5) % menu.len()]).collect();
        let b = Binaries::from_choices(&choices, 2);
        let slave = build_slave(&inst, &ModelOptions::default(), &b).unwrap();
        let out = solve_lp(&slave.lp).unwrap();
        let cut = make_cut(&out, &slave, 1).unwrap();
        let h = cut.h.eval(&slave.vars.point(&b));
        match out.status {
            LpStatus::Optimal => {
                assert_eq!(cut.kind, CutKind::Optimality);
                assert!((h - out.objective).abs() <= 1e-6 * (1.0 + out.objective.abs()), "seed {seed}");
            }
            LpStatus::Infeasible => {
                assert_eq!(cut.kind, CutKind::Feasibility);
                assert!(h > 0.0, "seed {seed}: ray value {h}");
            }
            LpStatus::Unbounded => panic!("unbounded slave"),
        }
    }
}

#[test]
fn bottleneck_yields_a_violated_feasibility_cut() {
    let nodes = vec![node(0, NodeKind::Core), node(1, NodeKind::Du), node(2, NodeKind::CuSite)];
    let links = vec![link(1, 2, 100.0, 1.0, 10.0), link(2, 0, 1e5, 1.0, 10.0), link(1, 0, 1e5, 1.0, 10.0)];
    let inst = instance(nodes, links, |c| c.paths.k = 1);
    let b = Binaries::from_choices(&[s(Split::S3, 0)], 1);
    let slave = build_slave(&inst, &ModelOptions::default(), &b).unwrap();
    let out = solve_lp(&slave.lp).unwrap();
    assert_eq!(out.status, LpStatus::Infeasible);
    let cut = make_cut(&out, &slave, 1).unwrap();
    assert_eq!(cut.kind, CutKind::Feasibility);
    assert!(cut.h.eval(&slave.vars.point(&b)) > 0.0);
    // the distributed placement satisfies the cut
    let dran = Binaries::from_choices(&[Choice::DRan], 1);
    assert!(cut.h.eval(&slave.vars.point(&dran)) <= 1e-9);
}

#[test]
fn distributed_cut_prices_shortest_paths() {
    let inst = two_path(1e5, |_| {});
    let b = Binaries::from_choices(&[Choice::DRan], 1);
    let slave = build_slave(&inst, &ModelOptions::default(), &b).unwrap();
    let out = solve_lp(&slave.lp).unwrap();
    let h = dual_value_h(&out.duals, &slave, &b).unwrap();
    let cheapest = inst
        .paths
        .to_core(0)
        .iter()
        .map(|&k| inst.paths.paths[k].path.cost)
        .fold(f64::INFINITY, f64::min);
    assert!((h - 150.0 * cheapest).abs() < 1e-9);
}

#[test]
fn cheap_routing_centralises_fully() {
    let inst = two_path(1e5, |c| c.costs.c_d = 0.001);
    let r = benders::run(&inst, &plain(&inst)).unwrap();
    assert_eq!(r.status, BendersStatus::Optimal);
    let sol = r.solution.unwrap();
    assert_eq!(sol.binaries.choice(0), Some(s(Split::S3, 0)));
    let oracle = brute_force(&inst, &OracleOptions::default()).unwrap();
    assert!((sol.objective - oracle.solution.unwrap().objective).abs() <= 1e-6);
}

#[test]
fn slow_paths_exclude_the_deepest_split() {
    // 300 us on every route to the CU: within S1 and S2 bounds only
    let nodes = vec![node(0, NodeKind::Core), node(1, NodeKind::Du), node(2, NodeKind::CuSite), node(3, NodeKind::Router)];
    let links = vec![
        link(1, 2, 1e5, 0.1, 300.0),
        link(1, 3, 1e5, 0.1, 200.0),
        link(3, 2, 1e5, 0.1, 200.0),
        link(2, 0, 1e5, 0.1, 10.0),
        link(1, 0, 1e5, 50.0, 10.0),
    ];
    let inst = instance(nodes, links, |c| {
        c.paths.k = 2;
        c.costs.c_d = 0.001;
    });
    let r = benders::run(&inst, &exact(&inst)).unwrap();
    let sol = r.solution.unwrap();
    assert!(!matches!(sol.binaries.choice(0), Some(Choice::Split { split: Split::S3, .. })));
    let oracle = brute_force(&inst, &OracleOptions::default()).unwrap();
    assert!((sol.objective - oracle.solution.unwrap().objective).abs() <= 1e-6);
    // without the limits the deepest split wins
    let mut opts = exact(&inst);
    opts.model.delay_mode = vran_core::model::DelayMode::Ignore;
    let free = benders::run(&inst, &opts).unwrap().solution.unwrap();
    assert_eq!(free.binaries.choice(0), Some(s(Split::S3, 0)));
}

#[test]
fn trace_csv_has_the_documented_columns() {
    let inst = random_small(3, 2, 1, 1);
    let r = benders::run(&inst, &plain(&inst)).unwrap();
    assert!(r.iterations() > 1);
    let csv = r.log.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iter,lb,ub,gap,cut_kind,master_ms,slave_ms"));
    assert_eq!(lines.count(), r.iterations());
}

#[test]
fn the_routing_floor_is_a_valid_bound() {
    for seed in 0..25 {
        let inst = random_small(700 + seed, 2, 2, 2);
        let cuts = benders::seed_cuts(&inst, &ModelOptions::default()).unwrap();
        let vars = build_slave(&inst, &ModelOptions::default(), &Binaries::zeros(2, 2)).unwrap().vars;
        for a in choice_menu(2) {
            for b in choice_menu(2) {
                let bins = Binaries::from_choices(&[a, b], 2);
                let point = vars.point(&bins);
                let routed = route_choices(&inst, DelayMode::Corrected, &[a, b]).unwrap();
                for cut in &cuts {
                    let h = cut.h.eval(&point);
                    match (cut.kind, &routed) {
                        (CutKind::Optimality, Some((cost, _))) => {
                            assert!(h <= cost + 1e-6, "seed {seed} {a} {b}: floor {h} above {cost}")
                        }
                        (CutKind::Feasibility, Some(_)) => assert!(h <= 1e-9, "seed {seed}: excludes a routable point"),
                        _ => {}
                    }
                }
            }
        }
    }
}

#[test]
fn seeding_does_not_change_the_answer() {
    for seed in 0..10 {
        let inst = random_small(800 + seed, 3, 2, 2);
        let a = benders::run(&inst, &exact(&inst)).ok().and_then(|r| r.solution);
        let b = benders::run(&inst, &plain(&inst)).ok().and_then(|r| r.solution);
        match (a, b) {
            (Some(a), Some(b)) => assert!((a.objective - b.objective).abs() <= 1e-6, "seed {seed}"),
            (None, None) => {}
            _ => panic!("seed {seed}: verdicts differ"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn bounds_sandwich_the_optimum(seed in 0u64..10_000, n in 2usize..=3, m in 1usize..=2, seeded: bool) {
        let inst = random_small(seed, n, m, 2);
        let oracle = brute_force(&inst, &OracleOptions::default()).unwrap();
        let opts = if seeded { exact(&inst) } else { plain(&inst) };
        match benders::run(&inst, &opts) {
            Err(benders::BendersError::InfeasibleInstance) => prop_assert!(oracle.solution.is_none()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
            Ok(r) => {
                let opt = oracle.solution.as_ref().expect("feasible").objective;
                prop_assert_eq!(r.status, BendersStatus::Optimal);
                prop_assert!(r.log.lb_nondecreasing());
                prop_assert!(r.log.ub_nonincreasing());
                prop_assert!(!r.log.has_repeat());
                for rec in &r.log.records {
                    prop_assert!(rec.lb <= opt + 1e-6);
                    prop_assert!(rec.ub >= opt - 1e-6);
                }
                let sol = r.solution.unwrap();
                prop_assert!((sol.objective - r.ub).abs() <= 1e-6 * (1.0 + r.ub.abs()));
                prop_assert!((sol.objective - opt).abs() <= 1e-6);
                prop_assert!(check_feasibility(&sol, &inst).is_feasible());
            }
        }
    }
}
