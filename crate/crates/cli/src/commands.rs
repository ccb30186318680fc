use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use vran_core::benders::IterationLog;
use vran_core::instance::{check_feasibility, InstanceConfig};
use vran_core::model::DelayMode;
use vran_core::oracle::{config_count, diagnose};
use vran_core::scenario::{
    base_config, generate, gnuplot_script, results_csv, run_sweep, GenSpec, SweepSettings, SweepSpec,
};
use vran_core::{solve as run_solver, Instance, Method, Solution, SolveOptions, SolveReport, SolveStatus, Topology};

use crate::args::{GenArgs, InputArgs, SolveArgs, SolverArgs, SweepArgs, VerifyArgs};

pub const MALFORMED: u8 = 2;
pub const INFEASIBLE: u8 = 3;
pub const ITER_LIMIT: u8 = 4;
pub const DISAGREEMENT: u8 = 5;
const SOLVER_ERROR: u8 = 1;

/// Agreement tolerance between methods.
const TOL: f64 = 1e-6;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

fn fail(code: u8, message: impl Display) -> Failure {
    Failure {
        code,
        message: message.to_string(),
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(MALFORMED, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| fail(SOLVER_ERROR, format!("{}: {e}", path.display())))
}

fn out_dir(dir: &Path) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| fail(SOLVER_ERROR, format!("{}: {e}", dir.display())))?;
    Ok(dir.to_path_buf())
}

/// Resolve the instance from `--instance` and/or `--topology`.
fn load(input: &InputArgs) -> Result<Option<Instance>, Failure> {
    let (config, topo_path) = match (&input.instance, &input.topology) {
        (None, None) => return Ok(None),
        (Some(inst), topo) => {
            let config = InstanceConfig::from_json(&read(inst)?).map_err(|e| fail(MALFORMED, e))?;
            let topo_path = match (topo, &config.topology) {
                (Some(t), _) => t.clone(),
                (None, Some(name)) => inst.parent().unwrap_or(Path::new(".")).join(name),
                (None, None) => return Err(fail(MALFORMED, "instance names no topology; pass --topology")),
            };
            (Some(config), topo_path)
        }
        (None, Some(topo)) => (None, topo.clone()),
    };
    let delay_model = config.as_ref().map(|c| c.delay_model).unwrap_or_default();
    let topology = Topology::from_json(&read(&topo_path)?, delay_model).map_err(|e| fail(MALFORMED, e))?;
    let config = config.unwrap_or_else(|| base_config(&topology));
    Instance::build(config, topology).map(Some).map_err(|e| fail(MALFORMED, e))
}

fn require(input: &InputArgs) -> Result<Instance, Failure> {
    load(input)?.ok_or_else(|| fail(MALFORMED, "pass --instance or --topology"))
}

fn solve_options(inst: &Instance, s: &SolverArgs) -> SolveOptions {
    let mut opts = SolveOptions::for_instance(inst);
    if let Some(e) = s.epsilon {
        opts.epsilon = e;
    }
    if let Some(k) = s.max_iter {
        opts.max_iter = k;
    }
    opts.model.delay_mode = s.delay_mode.into();
    opts
}

pub fn gen(a: &GenArgs) -> CmdResult {
    let mut spec = GenSpec {
        seed: a.seed,
        dus: a.dus,
        cus: a.cus,
        routers: a.routers,
        ..GenSpec::default()
    };
    if let Some(s) = a.side_km {
        spec.side_km = s;
    }
    if let Some(r) = a.radius_km {
        spec.radius_km = r;
    }
    let topology = generate(&spec).map_err(|e| fail(MALFORMED, e))?;
    let mut config = base_config(&topology);
    config.topology = Some("topology.json".into());
    config.delay_model = spec.delay_model;

    let dir = out_dir(&a.out_dir)?;
    let (topo_path, inst_path) = (dir.join("topology.json"), dir.join("instance.json"));
    write(&topo_path, &topology.to_json())?;
    write(&inst_path, &config.to_json())?;
    // reload what was written so that a broken file never leaves here
    let inst = Instance::load(&inst_path).map_err(|e| fail(SOLVER_ERROR, format!("reload failed: {e}")))?;
    println!(
        "wrote {} and {}: {} nodes, {} links, {} DUs, {} CU sites, {} paths",
        topo_path.display(),
        inst_path.display(),
        inst.topology.nodes().len(),
        inst.topology.links().len(),
        inst.num_dus(),
        inst.num_cus(),
        inst.paths.paths.len()
    );
    Ok(())
}

fn print_solution(sol: &Solution) {
    let b = &sol.breakdown;
    println!("objective    {:.6}", sol.objective);
    println!(
        "breakdown    du {:.6}  cu {:.6}  omega {:.6}  routing {:.6}",
        b.du, b.cu, b.omega, b.routing
    );
    println!("assignment   {}", sol.assignment.join(" "));
    println!(
        "deployed     {} CUs, centralization {:.4}",
        sol.binaries.deployed_cus(),
        sol.binaries.centralization()
    );
}

fn infeasible_diagnostic(inst: &Instance, mode: DelayMode) -> String {
    match diagnose(inst, mode) {
        Ok(found) if !found.is_empty() => found
            .iter()
            .map(|(fam, why)| format!("{}: {why}", fam.name()))
            .collect::<Vec<_>>()
            .join("; "),
        Ok(_) => "cu_capacity or link_capacity: each DU fits alone, but not all together".into(),
        Err(e) => format!("diagnosis failed: {e}"),
    }
}

pub fn solve(a: &SolveArgs) -> CmdResult {
    let inst = require(&a.input)?;
    let opts = solve_options(&inst, &a.solver);
    let method: Method = a.method.into();
    let report = run_solver(&inst, method, &opts);
    let dir = out_dir(&a.out_dir)?;
    let trace = report.trace.clone().unwrap_or_default();
    write(&dir.join("trace.csv"), &trace.to_csv())?;
    println!(
        "method {method}  status {}  iterations {}  wall {:.1} ms",
        report.status.name(),
        report.iterations,
        report.wall_ms
    );
    if let Some(sol) = &report.solution {
        write(&dir.join("solution.json"), &sol.to_json())?;
        print_solution(sol);
    }
    match &report.status {
        SolveStatus::Optimal => Ok(()),
        SolveStatus::Infeasible => Err(fail(
            INFEASIBLE,
            format!("instance is infeasible ({})", infeasible_diagnostic(&inst, opts.model.delay_mode)),
        )),
        SolveStatus::IterLimit => Err(fail(ITER_LIMIT, "stopped at the iteration limit")),
        SolveStatus::TooLarge => Err(fail(
            MALFORMED,
            format!(
                "{} configurations exceed the oracle cap of {}",
                config_count(inst.num_dus(), inst.num_cus()),
                opts.oracle_cap
            ),
        )),
        SolveStatus::Error(e) => Err(fail(SOLVER_ERROR, e)),
    }
}

fn sweep_spec(a: &SweepArgs) -> Result<SweepSpec, Failure> {
    let mut spec = match &a.spec {
        Some(path) => serde_json::from_str(&read(path)?).map_err(|e| fail(MALFORMED, format!("{}: {e}", path.display())))?,
        None => SweepSpec::new(a.kind.expect("clap requires --kind").into(), a.grid.clone()),
    };
    if let Some(t) = a.trials {
        spec.trials = t;
    }
    if let Some(k) = a.m_deploy {
        spec.m_deploy = k;
    }
    if let Some(rc) = a.total_rc {
        spec.total_rc = rc;
    }
    spec.hypothetical |= a.hypothetical;
    spec.shared_capacity |= a.shared_capacity;
    if !a.m_grid.is_empty() {
        spec.m_grid = a.m_grid.clone();
    }
    spec.validate().map_err(|e| fail(MALFORMED, e))?;
    Ok(spec)
}

pub fn sweep(a: &SweepArgs) -> CmdResult {
    let spec = sweep_spec(a)?;
    let inst = match load(&a.input)? {
        Some(inst) => inst,
        None => {
            let gen = GenSpec {
                seed: a.seed,
                dus: a.dus,
                cus: a.cus,
                routers: a.routers,
                ..GenSpec::default()
            };
            let topo = generate(&gen).map_err(|e| fail(MALFORMED, e))?;
            Instance::build(base_config(&topo), topo).map_err(|e| fail(MALFORMED, e))?
        }
    };
    let settings = SweepSettings {
        method: a.method.into(),
        solve: solve_options(&inst, &a.solver),
        seed: a.seed,
    };
    let rows = run_sweep(&inst, &spec, &settings).map_err(|e| fail(MALFORMED, e))?;
    let dir = out_dir(&a.out_dir)?;
    let csv_path = dir.join("results.csv");
    write(&csv_path, &results_csv(&rows))?;
    if a.gnuplot {
        let script = gnuplot_script("results.csv", spec.kind.name());
        write(&dir.join(format!("{}.gp", spec.kind.name())), &script)?;
    }
    println!("{:<6} {:<18} {:>4} {:>8} {:>10} {:>16} {:>8}  status", "point", "mode", "M", "c_d", "lambda", "cost", "central");
    for r in &rows {
        let cost = r.cost.map_or_else(|| "-".into(), |c| format!("{c:.6}"));
        let central = r.centralization.map_or_else(|| "-".into(), |c| format!("{c:.4}"));
        println!(
            "{:<6} {:<18} {:>4} {:>8} {:>10} {:>16} {:>8}  {}",
            r.point, r.mode, r.m, r.c_d, r.lambda, cost, central, r.status
        );
    }
    println!("wrote {} ({} rows)", csv_path.display(), rows.len());
    Ok(())
}

fn trace_checks(log: &IterationLog, epsilon: f64, lb: f64, ub: f64) -> Vec<(&'static str, bool)> {
    vec![
        ("LB nondecreasing", log.lb_nondecreasing()),
        ("UB nonincreasing", log.ub_nonincreasing()),
        ("UB - LB <= epsilon", ub - lb <= epsilon + 1e-9 * ub.abs().max(1.0)),
        ("no repeated master point", epsilon > 0.0 || !log.has_repeat()),
    ]
}

fn describe(r: &SolveReport) -> String {
    match r.objective() {
        Some(v) => format!("{:<10} {:>18.6}", r.status.name(), v),
        None => format!("{:<10} {:>18}", r.status.name(), "-"),
    }
}

fn same(a: &SolveReport, b: &SolveReport) -> bool {
    match (a.objective(), b.objective()) {
        (Some(x), Some(y)) => (x - y).abs() <= TOL,
        (None, None) => a.status == b.status,
        _ => false,
    }
}

/// Audit a claimed solution; returns the problems found.
fn audit_solution(sol: &Solution, inst: &Instance, optimum: Option<f64>) -> Vec<String> {
    let mut issues = Vec::new();
    let report = check_feasibility(sol, inst);
    for fam in report.failed() {
        issues.push(format!("violates {}", fam.name()));
    }
    if sol.flows.len() == inst.paths.paths.len() {
        let recomputed = Solution::evaluate(sol.binaries.clone(), sol.flows.clone(), inst).objective;
        if (recomputed - sol.objective).abs() > TOL * recomputed.abs().max(1.0) {
            issues.push(format!("claims objective {} but evaluates to {recomputed}", sol.objective));
        }
    }
    match optimum {
        Some(opt) if (sol.objective - opt).abs() > TOL => {
            issues.push(format!("objective {} differs from the optimum {opt}", sol.objective))
        }
        None => issues.push("the reference solvers found no feasible solution".into()),
        _ => {}
    }
    issues
}

/// Small network used when verify is given no instance.
fn tiny_instance() -> Result<Instance, Failure> {
    let spec = GenSpec {
        seed: 1,
        dus: 3,
        cus: 2,
        routers: 2,
        ..GenSpec::default()
    };
    let topo = generate(&spec).map_err(|e| fail(SOLVER_ERROR, e))?;
    Instance::build(base_config(&topo), topo).map_err(|e| fail(SOLVER_ERROR, e))
}

pub fn verify(a: &VerifyArgs) -> CmdResult {
    let inst = match load(&a.input)? {
        Some(inst) => inst,
        None => {
            println!("no instance given; using the built-in 3-DU, 2-site network");
            tiny_instance()?
        }
    };
    let mut opts = SolveOptions::for_instance(&inst);
    opts.epsilon = a.epsilon;
    if let Some(k) = a.max_iter {
        opts.max_iter = k;
    }
    if let Some(cap) = a.oracle_cap {
        opts.oracle_cap = cap;
    }
    opts.model.delay_mode = a.delay_mode.into();

    let benders = run_solver(&inst, Method::Benders, &opts);
    let milp = run_solver(&inst, Method::Milp, &opts);
    let count = config_count(inst.num_dus(), inst.num_cus());
    let oracle = (count <= u128::from(opts.oracle_cap)).then(|| run_solver(&inst, Method::Oracle, &opts));

    println!("{:<8} {:<10} {:>18} {:>10}", "method", "status", "objective", "wall_ms");
    for r in [Some(&benders), Some(&milp), oracle.as_ref()].into_iter().flatten() {
        println!("{:<8} {} {:>10.1}", r.method.name(), describe(r), r.wall_ms);
    }
    if oracle.is_none() {
        println!("oracle   skipped: {count} configurations exceed the cap of {}", opts.oracle_cap);
    }

    let mut ok = true;
    let mut pairs = vec![("benders", "milp", same(&benders, &milp))];
    if let Some(o) = &oracle {
        pairs.push(("benders", "oracle", same(&benders, o)));
        pairs.push(("milp", "oracle", same(&milp, o)));
    }
    for (x, y, agree) in &pairs {
        println!("agree {x:<8} {y:<8} {}", if *agree { "yes" } else { "NO" });
        ok &= agree;
    }
    for r in [Some(&benders), Some(&milp), oracle.as_ref()].into_iter().flatten() {
        if let SolveStatus::Error(e) = &r.status {
            println!("{} failed: {e}", r.method.name());
            ok = false;
        }
    }

    if let Some(log) = &benders.trace {
        println!("benders trace: {} iterations", log.records.len());
        for rec in &log.records {
            let cut = rec.cut_kind.map_or("none", |k| k.name());
            println!("  iter {:>3}  lb {:>18.6}  ub {:>18.6}  cut {cut}", rec.iter, rec.lb, rec.ub);
        }
        let (lb, ub) = log.records.last().map_or((f64::NEG_INFINITY, f64::INFINITY), |r| (r.lb, r.ub));
        let converged = benders.status == SolveStatus::Optimal;
        for (name, pass) in trace_checks(log, opts.epsilon, lb, ub) {
            let pass = pass || (!converged && name == "UB - LB <= epsilon");
            println!("  {name:<26} {}", if pass { "ok" } else { "FAIL" });
            ok &= pass;
        }
    }

    if let Some(path) = &a.check_solution {
        let sol = Solution::from_json(&read(path)?).map_err(|e| fail(MALFORMED, format!("{}: {e}", path.display())))?;
        let reference = oracle.as_ref().unwrap_or(&milp).objective();
        let issues = audit_solution(&sol, &inst, reference);
        if issues.is_empty() {
            println!("checked {}: matches the reference", path.display());
        } else {
            println!("checked {}: mismatch", path.display());
            for i in &issues {
                println!("  {i}");
            }
            ok = false;
        }
    }

    if ok {
        println!("verdict: agreement");
        Ok(())
    } else {
        Err(fail(DISAGREEMENT, "methods disagree or a check failed"))
    }
}
