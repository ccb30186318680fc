use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::instance::Instance;
use crate::model::Force;
use crate::model::DelayMode;
use crate::solve::{solve, Method, SolveOptions, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub method: Method,
    pub solve: SolveOptions,
    pub seed: u64,
}

/// One line of `results.csv`; missing values are written as empty fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub sweep: String,
    pub point: usize,
    pub seed: u64,
    pub mode: String,
    #[serde(rename = "M")]
    pub m: usize,
    pub c_d: f64,
    pub lambda: f64,
    pub cost: Option<f64>,
    pub cost_du: Option<f64>,
    pub cost_cu: Option<f64>,
    pub cost_omega: Option<f64>,
    pub cost_routing: Option<f64>,
    pub deployed_cus: Option<usize>,
    pub centralization: Option<f64>,
    pub status: String,
    pub iters: u64,
    pub wall_ms: f64,
}

impl SweepRow {
    fn new(sweep: &str, point: usize, seed: u64, mode: &str, inst: &Instance, r: &SolveReport) -> Self {
        let sol = r.solution.as_ref();
        let mean_lambda = inst.lambda.iter().sum::<f64>() / inst.lambda.len().max(1) as f64;
        SweepRow {
            sweep: sweep.to_string(),
            point,
            seed,
            mode: mode.to_string(),
            m: inst.num_cus(),
            c_d: inst.c_d,
            lambda: mean_lambda,
            cost: sol.map(|s| s.objective),
            cost_du: sol.map(|s| s.breakdown.du),
            cost_cu: sol.map(|s| s.breakdown.cu),
            cost_omega: sol.map(|s| s.breakdown.omega),
            cost_routing: sol.map(|s| s.breakdown.routing),
            deployed_cus: sol.map(|s| s.binaries.deployed_cus()),
            centralization: sol.map(|s| s.binaries.centralization()),
            status: r.status.name().to_string(),
            iters: r.iterations,
            wall_ms: (r.wall_ms * 1e3).round() / 1e3,
        }
    }
}

fn run(inst: &Instance, settings: &SweepSettings, tweak: impl FnOnce(&mut SolveOptions)) -> SolveReport {
    let mut opts = settings.solve;
    tweak(&mut opts);
    let report = solve(inst, settings.method, &opts);
    log::info!(
        "M={} c_d={} -> {} {:?}",
        inst.num_cus(),
        inst.c_d,
        report.status.name(),
        report.objective()
    );
    report
}

/// Optimise with the first `M` candidate sites for each `M` in `grid`.
pub fn sweep_cu_count(base: &Instance, grid: &[usize], settings: &SweepSettings) -> Vec<SweepRow> {
    grid.iter()
        .enumerate()
        .map(|(point, &m)| {
            let keep: Vec<usize> = (0..m.min(base.num_cus())).collect();
            let inst = base.restrict_cus(&keep);
            let r = run(&inst, settings, |_| {});
            SweepRow::new("cu_count", point, settings.seed, "optimized", &inst, &r)
        })
        .collect()
}

/// Optimised, forced C-RAN and forced D-RAN cost per routing price.
///
/// With `hypothetical` the forced C-RAN runs drop the delay limits.
pub fn sweep_routing_cost(
    base: &Instance,
    grid: &[f64],
    hypothetical: bool,
    settings: &SweepSettings,
) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for (point, &c_d) in grid.iter().enumerate() {
        let inst = base.with_c_d(c_d);
        let r = run(&inst, settings, |_| {});
        rows.push(SweepRow::new("routing_cost", point, settings.seed, "optimized", &inst, &r));
        let r = run(&inst, settings, |o| {
            o.model.force = Force::CRan;
            if hypothetical {
                o.model.delay_mode = DelayMode::Ignore;
            }
        });
        let mode = if hypothetical { "cran_hypothetical" } else { "cran" };
        rows.push(SweepRow::new("routing_cost", point, settings.seed, mode, &inst, &r));
        let mut dran = inst.clone();
        dran.omega.iter_mut().for_each(|w| *w = 0.0);
        let r = run(&dran, settings, |o| o.model.force = Force::DRan);
        rows.push(SweepRow::new("routing_cost", point, settings.seed, "dran", &dran, &r));
    }
    rows
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CapacityMode {
    /// every site keeps its configured capacity
    FixedPerCu,
    /// `total_rc` reference cores divided evenly over the sites
    SharedTotal { total_rc: f64 },
}

impl CapacityMode {
    pub fn name(self) -> &'static str {
        match self {
            CapacityMode::FixedPerCu => "fixed_per_cu",
            CapacityMode::SharedTotal { .. } => "shared_total",
        }
    }
}

/// Cost per demand level `λ` and candidate count `M`.
pub fn sweep_du_load(
    base: &Instance,
    lambda_grid: &[f64],
    m_grid: &[usize],
    capacity: CapacityMode,
    settings: &SweepSettings,
) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    let mut point = 0;
    for &lambda in lambda_grid {
        for &m in m_grid {
            let keep: Vec<usize> = (0..m.min(base.num_cus())).collect();
            let mut inst = base.restrict_cus(&keep).with_lambda(lambda);
            if let CapacityMode::SharedTotal { total_rc } = capacity {
                inst = inst.with_shared_cu_capacity(total_rc);
            }
            let r = run(&inst, settings, |_| {});
            rows.push(SweepRow::new("du_load", point, settings.seed, capacity.name(), &inst, &r));
            point += 1;
        }
    }
    rows
}

/// Per routing price: `trials` runs on `m_deploy` sites drawn at random,
/// then one run over all sites limited to `m_deploy` deployed CUs.
pub fn random_vs_optimized(
    base: &Instance,
    m_deploy: usize,
    trials: usize,
    c_grid: &[f64],
    settings: &SweepSettings,
) -> Vec<SweepRow> {
    let m_total = base.num_cus();
    let m_deploy = m_deploy.min(m_total);
    let mut rows = Vec::new();
    for (point, &c_d) in c_grid.iter().enumerate() {
        let priced = base.with_c_d(c_d);
        for trial in 0..trials {
            let seed = settings.seed.wrapping_add(trial as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let keep = sample(&mut rng, m_total, m_deploy).into_vec();
            let inst = priced.restrict_cus(&keep);
            let r = run(&inst, settings, |_| {});
            rows.push(SweepRow::new("random_vs_opt", point, seed, "random", &inst, &r));
        }
        let r = run(&priced, settings, |o| o.model.max_deployed = Some(m_deploy));
        rows.push(SweepRow::new("random_vs_opt", point, settings.seed, "optimized", &priced, &r));
    }
    rows
}

pub fn results_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("in-memory write");
    }
    if rows.is_empty() {
        w.write_record([
            "sweep", "point", "seed", "mode", "M", "c_d", "lambda", "cost", "cost_du", "cost_cu",
            "cost_omega", "cost_routing", "deployed_cus", "centralization", "status", "iters",
            "wall_ms",
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

/// Gnuplot commands plotting `cost` per mode from `csv_path`.
pub fn gnuplot_script(csv_path: &str, sweep: &str) -> String {
    let (x_col, x_label, logscale) = match sweep {
        "cu_count" | "capacity_split" => (5, "candidate CU sites M", ""),
        "routing_cost" | "random_vs_opt" => (6, "routing cost per km c_d", "set logscale x\n"),
        _ => (7, "DU load lambda (Mb/s)", ""),
    };
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel '{x_label}'\n\
         set ylabel 'total cost'\n\
         {logscale}\
         modes = system(\"awk -F, 'NR>1 && $1==\\\"{sweep}\\\" {{print $4}}' {csv_path} | sort -u\")\n\
         plot for [m in modes] \"< awk -F, 'NR==1 || ($1==\\\"{sweep}\\\" && $4==\\\"\".m.\"\\\")' {csv_path}\" \
         using {x_col}:8 with linespoints title m\n"
    )
}
