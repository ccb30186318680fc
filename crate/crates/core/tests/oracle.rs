mod support;

use support::fixtures::{random_small, two_path};
use vran_core::instance::{check_feasibility, Binaries, Choice, Family, Solution, Split};
use vran_core::lp::MilpOptions;
use vran_core::model::ModelOptions;
use vran_core::oracle::{brute_force, choice_menu, config_count, config_to_binaries, OracleError, OracleOptions};
use vran_core::solve::solve_monolithic;

#[test]
fn s2_maps_to_its_tuple() {
    let b = config_to_binaries(&[Choice::Split { split: Split::S2, cu: 1 }], 2);
    assert_eq!((b.x1[0], b.x2[0]), (1, 0));
    assert_eq!((b.y1[0][1], b.y2[0][1], b.z[0][1]), (0, 1, 1));
    assert_eq!((b.v1[0][1], b.v2[0][1]), (1, 0));
    assert_eq!(b.z[0][0], 0);
}

#[test]
fn every_choice_tuple_passes_placement_families() {
    let inst = two_path(1e5, |_| {});
    for c in choice_menu(1) {
        let b = config_to_binaries(&[c], 1);
        let sol = Solution::evaluate(b, vec![0.0; inst.paths.paths.len()], &inst);
        let report = check_feasibility(&sol, &inst);
        for fam in [
            Family::Domain,
            Family::CuChain,
            Family::DuChain,
            Family::Uniqueness,
            Family::SingleCu,
            Family::Ordering,
            Family::Linearization,
        ] {
            assert!(report.passes(fam), "{c}: {fam:?}");
        }
    }
}

#[test]
fn free_routing_compares_placement_only() {
    let inst = two_path(1e5, |c| c.costs.c_d = 0.0);
    let r = brute_force(&inst, &OracleOptions::default()).unwrap();
    let best = r.solution.unwrap().objective;
    let placement = |c: Choice| {
        let b = Binaries::from_choices(&[c], 1);
        vran_core::instance::total_cost(&b, &vec![0.0; inst.paths.paths.len()], &inst).total
    };
    let expect = choice_menu(1).into_iter().map(placement).fold(f64::INFINITY, f64::min);
    assert!((best - expect).abs() < 1e-9);
    assert_eq!(r.enumerated, 4);
}

#[test]
fn zero_cu_capacity_leaves_only_distributed() {
    let inst = random_small(4, 3, 2, 2);
    let mut zeroed = inst.clone();
    zeroed.h_cu = vec![0.0; 2];
    let r = brute_force(&zeroed, &OracleOptions::default()).unwrap();
    if let Some(choices) = r.choices {
        assert!(choices.iter().all(|&c| c == Choice::DRan));
    }
}

#[test]
fn cap_is_enforced() {
    let inst = random_small(1, 4, 2, 1);
    assert_eq!(config_count(4, 2), 2401);
    let opts = OracleOptions { cap: 100, ..OracleOptions::default() };
    assert!(matches!(brute_force(&inst, &opts), Err(OracleError::TooLarge { count: 2401, cap: 100 })));
}

#[test]
fn agrees_with_the_monolithic_model() {
    for seed in 0..20 {
        let inst = random_small(500 + seed, 3, 2, 2);
        let oracle = brute_force(&inst, &OracleOptions::default()).unwrap();
        let (_, milp, _) = solve_monolithic(&inst, &ModelOptions::default(), MilpOptions::default()).unwrap();
        match (&oracle.solution, &milp) {
            (Some(a), Some(b)) => assert!((a.objective - b.objective).abs() <= 1e-6, "seed {seed}"),
            (None, None) => {}
            _ => panic!("seed {seed}: feasibility verdicts differ"),
        }
        if let Some(sol) = &oracle.solution {
            assert!(check_feasibility(sol, &inst).is_feasible());
        }
    }
}
