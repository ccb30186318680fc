use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vran_core::model::DelayMode;
use vran_core::scenario::SweepKind;
use vran_core::Method;

#[derive(Debug, Parser)]
#[command(name = "vran", version, about = "Plan CU placement, functional splits and routing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic topology and a matching instance file
    Gen(GenArgs),
    /// Solve an instance and write solution.json and trace.csv
    Solve(SolveArgs),
    /// Run a parameter sweep and write results.csv
    Sweep(SweepArgs),
    /// Cross-check Benders, the monolithic model and the oracle
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Benders,
    Milp,
    Oracle,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Benders => Method::Benders,
            MethodArg::Milp => Method::Milp,
            MethodArg::Oracle => Method::Oracle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DelayModeArg {
    Corrected,
    AsPrinted,
    Prefilter,
    Ignore,
}

impl From<DelayModeArg> for DelayMode {
    fn from(m: DelayModeArg) -> DelayMode {
        match m {
            DelayModeArg::Corrected => DelayMode::Corrected,
            DelayModeArg::AsPrinted => DelayMode::AsPrinted,
            DelayModeArg::Prefilter => DelayMode::Prefilter,
            DelayModeArg::Ignore => DelayMode::Ignore,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKindArg {
    CuCount,
    RoutingCost,
    DuLoad,
    RandomVsOpt,
    CapacitySplit,
}

impl From<SweepKindArg> for SweepKind {
    fn from(k: SweepKindArg) -> SweepKind {
        match k {
            SweepKindArg::CuCount => SweepKind::CuCount,
            SweepKindArg::RoutingCost => SweepKind::RoutingCost,
            SweepKindArg::DuLoad => SweepKind::DuLoad,
            SweepKindArg::RandomVsOpt => SweepKind::RandomVsOpt,
            SweepKindArg::CapacitySplit => SweepKind::CapacitySplit,
        }
    }
}

/// Where the instance comes from.
#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// instance.json; its topology path is resolved relative to it
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// topology.json, overriding the one named in the instance
    #[arg(long)]
    pub topology: Option<PathBuf>,
}

/// Overrides applied on top of the instance's solver settings.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_enum, default_value = "corrected")]
    pub delay_mode: DelayModeArg,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub dus: usize,
    #[arg(long)]
    pub cus: usize,
    #[arg(long)]
    pub routers: usize,
    #[arg(long)]
    pub side_km: Option<f64>,
    #[arg(long)]
    pub radius_km: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "benders")]
    pub method: MethodArg,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// sweep description as JSON; replaces --kind and --grid
    #[arg(long, conflicts_with_all = ["kind", "grid"])]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "spec")]
    pub kind: Option<SweepKindArg>,
    /// comma-separated, ascending
    #[arg(long, value_delimiter = ',', required_unless_present = "spec")]
    pub grid: Vec<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub m_deploy: Option<usize>,
    /// forced C-RAN runs ignore the delay limits
    #[arg(long)]
    pub hypothetical: bool,
    /// divide --total-rc evenly over the sites (du_load)
    #[arg(long)]
    pub shared_capacity: bool,
    #[arg(long)]
    pub total_rc: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub m_grid: Vec<usize>,
    #[arg(long, value_enum, default_value = "benders")]
    pub method: MethodArg,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// seed for random placements, and for the generated network without --instance
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub dus: usize,
    #[arg(long, default_value_t = 8)]
    pub cus: usize,
    #[arg(long, default_value_t = 6)]
    pub routers: usize,
    /// also write a gnuplot script next to results.csv
    #[arg(long)]
    pub gnuplot: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// a solution to audit against the reference optimum
    #[arg(long)]
    pub check_solution: Option<PathBuf>,
    /// Benders stopping gap; exact by default
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_enum, default_value = "corrected")]
    pub delay_mode: DelayModeArg,
    /// oracle enumeration cap
    #[arg(long)]
    pub oracle_cap: Option<u64>,
}
