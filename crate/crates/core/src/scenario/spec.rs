use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::sweep::{
    random_vs_optimized, sweep_cu_count, sweep_du_load, sweep_routing_cost, CapacityMode, SweepRow,
    SweepSettings,
};
use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// grid: candidate counts M
    CuCount,
    /// grid: routing prices c_d
    RoutingCost,
    /// grid: per-DU demand λ, crossed with `m_grid`
    DuLoad,
    /// grid: routing prices c_d
    RandomVsOpt,
    /// grid: candidate counts M sharing `total_rc` reference cores
    CapacitySplit,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::CuCount => "cu_count",
            SweepKind::RoutingCost => "routing_cost",
            SweepKind::DuLoad => "du_load",
            SweepKind::RandomVsOpt => "random_vs_opt",
            SweepKind::CapacitySplit => "capacity_split",
        }
    }
}

fn default_trials() -> usize {
    10
}

fn default_m_deploy() -> usize {
    3
}

fn default_total_rc() -> f64 {
    75.0
}

/// On-disk description of one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub grid: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_m_deploy")]
    pub m_deploy: usize,
    #[serde(default)]
    pub hypothetical: bool,
    #[serde(default)]
    pub shared_capacity: bool,
    #[serde(default = "default_total_rc")]
    pub total_rc: f64,
    #[serde(default)]
    pub m_grid: Vec<usize>,
}

#[derive(Debug, Error, PartialEq)]
pub enum SweepSpecError {
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("sweep grid must be sorted ascending")]
    Unsorted,
    #[error("grid value {0} is not valid for this sweep")]
    BadValue(f64),
    #[error("{0}")]
    Invalid(String),
}

fn counts(values: &[f64]) -> Result<Vec<usize>, SweepSpecError> {
    values
        .iter()
        .map(|&v| {
            if v >= 1.0 && v.fract() == 0.0 && v.is_finite() {
                Ok(v as usize)
            } else {
                Err(SweepSpecError::BadValue(v))
            }
        })
        .collect()
}

impl SweepSpec {
    pub fn new(kind: SweepKind, grid: Vec<f64>) -> Self {
        SweepSpec {
            kind,
            grid,
            trials: default_trials(),
            m_deploy: default_m_deploy(),
            hypothetical: false,
            shared_capacity: false,
            total_rc: default_total_rc(),
            m_grid: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), SweepSpecError> {
        if self.grid.is_empty() {
            return Err(SweepSpecError::EmptyGrid);
        }
        if self.grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(SweepSpecError::Unsorted);
        }
        match self.kind {
            SweepKind::CuCount | SweepKind::CapacitySplit => {
                counts(&self.grid)?;
            }
            SweepKind::RoutingCost | SweepKind::RandomVsOpt | SweepKind::DuLoad => {
                if let Some(&v) = self.grid.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
                    return Err(SweepSpecError::BadValue(v));
                }
            }
        }
        if self.kind == SweepKind::DuLoad && self.grid.iter().any(|&v| v <= 0.0) {
            return Err(SweepSpecError::BadValue(0.0));
        }
        if self.kind == SweepKind::RandomVsOpt && (self.trials == 0 || self.m_deploy == 0) {
            return Err(SweepSpecError::Invalid("trials and m_deploy must be positive".into()));
        }
        if self.m_grid.windows(2).any(|w| w[0] >= w[1]) || self.m_grid.contains(&0) {
            return Err(SweepSpecError::Invalid("m_grid must be positive and ascending".into()));
        }
        if !(self.total_rc >= 0.0) || !self.total_rc.is_finite() {
            return Err(SweepSpecError::Invalid(format!("total_rc {} is invalid", self.total_rc)));
        }
        Ok(())
    }

    fn capacity(&self) -> CapacityMode {
        if self.shared_capacity {
            CapacityMode::SharedTotal {
                total_rc: self.total_rc,
            }
        } else {
            CapacityMode::FixedPerCu
        }
    }
}

/// Run the sweep described by `spec` on `base`.
pub fn run_sweep(base: &Instance, spec: &SweepSpec, settings: &SweepSettings) -> Result<Vec<SweepRow>, SweepSpecError> {
    spec.validate()?;
    Ok(match spec.kind {
        SweepKind::CuCount => sweep_cu_count(base, &counts(&spec.grid)?, settings),
        SweepKind::RoutingCost => sweep_routing_cost(base, &spec.grid, spec.hypothetical, settings),
        SweepKind::DuLoad => {
            let m_grid = if spec.m_grid.is_empty() {
                vec![base.num_cus()]
            } else {
                spec.m_grid.clone()
            };
            sweep_du_load(base, &spec.grid, &m_grid, spec.capacity(), settings)
        }
        SweepKind::RandomVsOpt => {
            if spec.m_deploy > base.num_cus() {
                return Err(SweepSpecError::Invalid(format!(
                    "m_deploy {} exceeds the {} candidate sites",
                    spec.m_deploy,
                    base.num_cus()
                )));
            }
            random_vs_optimized(base, spec.m_deploy, spec.trials, &spec.grid, settings)
        }
        SweepKind::CapacitySplit => {
            let lambda = base.lambda.iter().sum::<f64>() / base.lambda.len() as f64;
            let capacity = CapacityMode::SharedTotal {
                total_rc: spec.total_rc,
            };
            let mut rows = sweep_du_load(base, &[lambda], &counts(&spec.grid)?, capacity, settings);
            for r in &mut rows {
                r.sweep = SweepKind::CapacitySplit.name().to_string();
            }
            rows
        }
    })
}
