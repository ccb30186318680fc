//! Problem parameters, solutions and the cost and feasibility evaluators.

mod cost;
mod feasibility;
mod solution;

pub use cost::{
    cu_cost, cu_cost_parts, du_cost, routing_cost, total_cost, traffic_flow, CostBreakdown,
    InvalidSplit, S3_FLOW_MBPS,
};
pub use feasibility::{check_feasibility, Family, FamilyReport, FeasibilityReport};
pub use solution::{Binaries, Choice, Solution, Split};

use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{
    build_pathsets, DelayBounds, DelayModel, PathSet, Ranking, Topology, TopologyError,
};

/// Cycles per second of one reference core.
pub const REFERENCE_CORE_HZ: f64 = 3.4e9;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("{field}: expected {expected} values, found {found}")]
    Length {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{field}: {reason}")]
    Value { field: &'static str, reason: String },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Paths(#[from] crate::net::InfeasibleTopology),
    #[error("invalid instance JSON: {0}")]
    Json(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("instance does not name a topology file")]
    NoTopology,
}

/// A scalar broadcast to every node, or one value per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerNode {
    Scalar(f64),
    Values(Vec<f64>),
}

impl From<f64> for PerNode {
    fn from(v: f64) -> Self {
        PerNode::Scalar(v)
    }
}

impl PerNode {
    fn resolve(&self, field: &'static str, count: usize) -> Result<Vec<f64>, InstanceError> {
        match self {
            PerNode::Scalar(v) => Ok(vec![*v; count]),
            PerNode::Values(vs) if vs.len() == count => Ok(vs.clone()),
            PerNode::Values(vs) => Err(InstanceError::Length {
                field,
                expected: count,
                found: vs.len(),
            }),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            PerNode::Scalar(v) => *v,
            PerNode::Values(vs) if vs.is_empty() => 0.0,
            PerNode::Values(vs) => vs.iter().sum::<f64>() / vs.len() as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemandConfig {
    /// Mb/s per DU
    pub lambda: PerNode,
}

impl Default for DemandConfig {
    fn default() -> Self {
        DemandConfig {
            lambda: 150.0.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComputeConfig {
    /// DU capacity in reference cores
    pub h_du_rc: PerNode,
    /// CU capacity in reference cores
    pub h_cu_rc: PerNode,
    /// cycles per Mb/s for f1, f2, f3
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
}

impl Default for ComputeConfig {
    fn default() -> Self {
        ComputeConfig {
            h_du_rc: 2.0.into(),
            h_cu_rc: 75.0.into(),
            rho1: 2.0e7,
            rho2: 0.8e7,
            rho3: 0.6e7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConfig {
    /// per DU VM instance
    pub alpha: PerNode,
    /// per DU cycle
    pub beta: PerNode,
    /// per CU VM instance; defaults to alpha / 2
    pub a: Option<PerNode>,
    /// per CU cycle; defaults to 0.017 beta
    pub b: Option<PerNode>,
    /// per Mb/s of traffic a CU carries to the core
    pub omega: PerNode,
    /// routing cost per km and Mb/s
    pub c_d: f64,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig {
            alpha: 100.0.into(),
            beta: 2e-8.into(),
            a: None,
            b: None,
            omega: 0.4.into(),
            c_d: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathConfig {
    pub k: usize,
    pub ranking: Ranking,
    pub delay_bounds: DelayBounds,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig {
            k: 3,
            ranking: Ranking::Delay,
            delay_bounds: DelayBounds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub epsilon: f64,
    /// big constant of the delay constraints; defaults to N x 5000 Mb/s
    #[serde(rename = "T")]
    pub big_t: Option<f64>,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 1e-6,
            big_t: None,
            max_iter: 500,
        }
    }
}

/// On-disk form of `instance.json`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceConfig {
    /// topology file, relative to the instance file
    pub topology: Option<String>,
    pub delay_model: DelayModel,
    pub demand: DemandConfig,
    pub compute: ComputeConfig,
    pub costs: CostConfig,
    pub paths: PathConfig,
    pub solver: SolverConfig,
}

impl InstanceConfig {
    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        serde_json::from_str(text).map_err(|e| InstanceError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rho {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
}

impl Rho {
    pub fn total(&self) -> f64 {
        self.rho1 + self.rho2 + self.rho3
    }
}

/// Fully resolved planning instance. Per-DU vectors have length N, per-CU
/// vectors length M; capacities are in cycles per second.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub config: InstanceConfig,
    pub topology: Topology,
    pub paths: PathSet,
    pub lambda: Vec<f64>,
    pub h_du: Vec<f64>,
    pub h_cu: Vec<f64>,
    pub rho: Rho,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub omega: Vec<f64>,
    pub c_d: f64,
    pub big_t: f64,
    pub epsilon: f64,
    pub max_iter: usize,
}

fn nonneg(field: &'static str, vs: &[f64]) -> Result<(), InstanceError> {
    match vs.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        Some(v) => Err(InstanceError::Value {
            field,
            reason: format!("{v} is not a nonnegative finite number"),
        }),
        None => Ok(()),
    }
}

fn positive(field: &'static str, vs: &[f64]) -> Result<(), InstanceError> {
    match vs.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        Some(v) => Err(InstanceError::Value {
            field,
            reason: format!("{v} is not a positive finite number"),
        }),
        None => Ok(()),
    }
}

impl Instance {
    pub fn build(config: InstanceConfig, topology: Topology) -> Result<Self, InstanceError> {
        let n = topology.num_dus();
        let m = topology.num_cu_sites();
        let c = &config;
        let lambda = c.demand.lambda.resolve("demand.lambda", n)?;
        positive("demand.lambda", &lambda)?;
        let h_du: Vec<f64> = c
            .compute
            .h_du_rc
            .resolve("compute.h_du_rc", n)?
            .into_iter()
            .map(|v| v * REFERENCE_CORE_HZ)
            .collect();
        let h_cu: Vec<f64> = c
            .compute
            .h_cu_rc
            .resolve("compute.h_cu_rc", m)?
            .into_iter()
            .map(|v| v * REFERENCE_CORE_HZ)
            .collect();
        nonneg("compute.h_du_rc", &h_du)?;
        nonneg("compute.h_cu_rc", &h_cu)?;
        let rho = Rho {
            rho1: c.compute.rho1,
            rho2: c.compute.rho2,
            rho3: c.compute.rho3,
        };
        positive("compute.rho", &[rho.rho1, rho.rho2, rho.rho3])?;
        let alpha = c.costs.alpha.resolve("costs.alpha", n)?;
        let beta = c.costs.beta.resolve("costs.beta", n)?;
        let a = match &c.costs.a {
            Some(v) => v.resolve("costs.a", m)?,
            None => vec![c.costs.alpha.mean() / 2.0; m],
        };
        let b = match &c.costs.b {
            Some(v) => v.resolve("costs.b", m)?,
            None => vec![0.017 * c.costs.beta.mean(); m],
        };
        let omega = c.costs.omega.resolve("costs.omega", m)?;
        for (field, vs) in [
            ("costs.alpha", &alpha),
            ("costs.beta", &beta),
            ("costs.a", &a),
            ("costs.b", &b),
            ("costs.omega", &omega),
        ] {
            nonneg(field, vs)?;
        }
        nonneg("costs.c_d", &[c.costs.c_d])?;
        if c.paths.k == 0 {
            return Err(InstanceError::Value {
                field: "paths.k",
                reason: "must be at least 1".into(),
            });
        }
        let floor_t = n as f64 * S3_FLOW_MBPS;
        let big_t = c.solver.big_t.unwrap_or(2.0 * floor_t);
        if !(big_t >= floor_t) || !big_t.is_finite() {
            return Err(InstanceError::Value {
                field: "solver.T",
                reason: format!("{big_t} is below N x 2500 = {floor_t}"),
            });
        }
        nonneg("solver.epsilon", &[c.solver.epsilon])?;
        let paths = build_pathsets(
            &topology,
            c.paths.k,
            c.costs.c_d,
            c.paths.ranking,
            c.paths.delay_bounds,
        )?;
        Ok(Instance {
            paths,
            lambda,
            h_du,
            h_cu,
            rho,
            alpha,
            beta,
            a,
            b,
            omega,
            c_d: c.costs.c_d,
            big_t,
            epsilon: c.solver.epsilon,
            max_iter: c.solver.max_iter,
            config,
            topology,
        })
    }

    /// Load `instance.json`, resolving its topology file relative to it.
    pub fn load(path: &FsPath) -> Result<Self, InstanceError> {
        let read = |p: &FsPath| {
            std::fs::read_to_string(p).map_err(|source| InstanceError::Io {
                path: p.display().to_string(),
                source,
            })
        };
        let config = InstanceConfig::from_json(&read(path)?)?;
        let topo_name = config.topology.clone().ok_or(InstanceError::NoTopology)?;
        let topo_path = path.parent().unwrap_or(FsPath::new(".")).join(topo_name);
        let topology = Topology::from_json(&read(&topo_path)?, config.delay_model)?;
        Instance::build(config, topology)
    }

    pub fn num_dus(&self) -> usize {
        self.lambda.len()
    }

    pub fn num_cus(&self) -> usize {
        self.h_cu.len()
    }

    /// Same instance priced at a different routing cost per km.
    pub fn with_c_d(&self, c_d: f64) -> Instance {
        let mut inst = self.clone();
        inst.c_d = c_d;
        inst.config.costs.c_d = c_d;
        inst.paths.reprice(c_d);
        inst
    }

    /// Keep only the listed CU sites (indices into the current CU order).
    pub fn restrict_cus(&self, keep: &[usize]) -> Instance {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let topology = self.topology.restrict_cu_sites(&keep);
        let pick = |v: &[f64]| keep.iter().map(|&m| v[m]).collect::<Vec<_>>();
        let mut config = self.config.clone();
        config.compute.h_cu_rc = PerNode::Values(
            pick(&self.h_cu)
                .iter()
                .map(|h| h / REFERENCE_CORE_HZ)
                .collect(),
        );
        config.costs.a = Some(PerNode::Values(pick(&self.a)));
        config.costs.b = Some(PerNode::Values(pick(&self.b)));
        config.costs.omega = PerNode::Values(pick(&self.omega));
        config.solver.big_t = Some(self.big_t);
        Instance::build(config, topology).expect("restriction of a valid instance is valid")
    }

    /// Every CU gets `total_rc / M` reference cores.
    pub fn with_shared_cu_capacity(&self, total_rc: f64) -> Instance {
        let mut inst = self.clone();
        let m = inst.num_cus().max(1) as f64;
        let each = total_rc / m;
        inst.h_cu = vec![each * REFERENCE_CORE_HZ; inst.num_cus()];
        inst.config.compute.h_cu_rc = each.into();
        inst
    }

    /// Same instance with demand `lambda` at every DU.
    pub fn with_lambda(&self, lambda: f64) -> Instance {
        let mut inst = self.clone();
        inst.lambda = vec![lambda; inst.num_dus()];
        inst.config.demand.lambda = lambda.into();
        inst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_node_accepts_scalar_or_array() {
        let c: CostConfig = serde_json::from_str(r#"{"alpha": 3, "omega": [1, 2]}"#).unwrap();
        assert_eq!(c.alpha, PerNode::Scalar(3.0));
        assert_eq!(c.omega.resolve("omega", 2).unwrap(), vec![1.0, 2.0]);
        assert!(c.omega.resolve("omega", 3).is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(InstanceConfig::from_json(r#"{"costs": {"gamma": 1}}"#).is_err());
    }

    #[test]
    fn config_round_trips() {
        let mut c = InstanceConfig::default();
        c.topology = Some("topology.json".into());
        c.solver.big_t = Some(12345.0);
        assert_eq!(InstanceConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
