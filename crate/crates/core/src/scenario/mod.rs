//! Synthetic networks and the parameter sweeps run on them.

mod gen;
mod spec;
mod sweep;

pub use gen::{generate, GenError, GenSpec};
pub use spec::{run_sweep, SweepKind, SweepSpec, SweepSpecError};
pub use sweep::{
    gnuplot_script, random_vs_optimized, results_csv, sweep_cu_count, sweep_du_load,
    sweep_routing_cost, CapacityMode, SweepRow, SweepSettings,
};

use crate::instance::{Instance, InstanceConfig, InstanceError, PerNode};
use crate::net::Topology;

/// Default instance on `topo` with CU usage prices rising in site order, so
/// that earlier candidates are the cheaper ones.
pub fn base_config(topo: &Topology) -> InstanceConfig {
    let mut config = InstanceConfig::default();
    let m = topo.num_cu_sites();
    let base = config.costs.omega.mean();
    let omega = (0..m)
        .map(|k| base * (1.0 + 0.1 * k as f64 / (m.max(2) - 1) as f64))
        .collect();
    config.costs.omega = PerNode::Values(omega);
    config
}

pub fn base_instance(topo: Topology) -> Result<Instance, InstanceError> {
    let config = base_config(&topo);
    Instance::build(config, topo)
}
