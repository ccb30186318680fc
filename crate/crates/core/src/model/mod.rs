//! Linear models of the planning problem: the monolithic mixed-integer form,
//! the Benders master over the placement binaries, and the routing slave.

mod build;

pub use build::{build_master, build_monolithic, build_slave, mccormick, routing_floor, RoutingFloor, SlaveModel};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Binaries, Split};
use crate::lp::{write_lp, LpProblem, MilpProblem, Sense};
use crate::net::DelayBounds;

/// How delay eligibility of DU→CU paths enters the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayMode {
    /// big-T caps on the class sums, zero exactly under the split they exclude
    #[default]
    Corrected,
    /// S2/S3 caps with the other sign pattern, under which they never bind
    AsPrinted,
    /// paths slower than every split removed, remaining ones capped per path
    Prefilter,
    /// no delay restriction at all (hypothetical what-if runs)
    Ignore,
}

impl DelayMode {
    /// Whether a DU→CU path of `delay_s` may carry `split` traffic.
    pub fn admits(self, bounds: DelayBounds, split: Split, delay_s: f64) -> bool {
        let limit = match split {
            Split::S1 => bounds.s1,
            Split::S2 => bounds.s2,
            Split::S3 => bounds.s3,
        };
        match self {
            DelayMode::Corrected | DelayMode::Prefilter => delay_s <= limit,
            // with this sign pattern only the S1 cap ever binds
            DelayMode::AsPrinted => split != Split::S1 || delay_s <= bounds.s1,
            DelayMode::Ignore => true,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DelayMode::Corrected => "corrected",
            DelayMode::AsPrinted => "as_printed",
            DelayMode::Prefilter => "prefilter",
            DelayMode::Ignore => "ignore",
        }
    }
}

impl std::str::FromStr for DelayMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "corrected" => Ok(DelayMode::Corrected),
            "as_printed" => Ok(DelayMode::AsPrinted),
            "prefilter" => Ok(DelayMode::Prefilter),
            "ignore" => Ok(DelayMode::Ignore),
            other => Err(format!("unknown delay mode `{other}`")),
        }
    }
}

/// Restrictions on the placement used by the benchmark modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Force {
    #[default]
    None,
    /// every DU at split S3
    CRan,
    /// no DU uses a CU
    DRan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ModelOptions {
    pub delay_mode: DelayMode,
    pub force: Force,
    /// at most this many CU sites may serve DUs
    pub max_deployed: Option<usize>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelBuildError {
    #[error("path set covers {found} DUs x {found_cus} CUs, instance has {n} x {m}")]
    Dimensions {
        n: usize,
        m: usize,
        found: usize,
        found_cus: usize,
    },
}

/// Dense index layout. Binaries come first (x1, x2, y1, y2, z, v1, v2, then
/// the optional activation flags u), followed by θ and the flows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarSpace {
    pub n: usize,
    pub m: usize,
    pub num_paths: usize,
    pub activation: bool,
    pub theta: bool,
    pub flows: bool,
}

impl VarSpace {
    pub fn x1(&self, n: usize) -> usize {
        n
    }
    pub fn x2(&self, n: usize) -> usize {
        self.n + n
    }
    fn grid(&self, block: usize, n: usize, m: usize) -> usize {
        2 * self.n + block * self.n * self.m + n * self.m + m
    }
    pub fn y1(&self, n: usize, m: usize) -> usize {
        self.grid(0, n, m)
    }
    pub fn y2(&self, n: usize, m: usize) -> usize {
        self.grid(1, n, m)
    }
    pub fn z(&self, n: usize, m: usize) -> usize {
        self.grid(2, n, m)
    }
    pub fn v1(&self, n: usize, m: usize) -> usize {
        self.grid(3, n, m)
    }
    pub fn v2(&self, n: usize, m: usize) -> usize {
        self.grid(4, n, m)
    }
    /// Number of placement binaries (x, y, z, v).
    pub fn num_placement(&self) -> usize {
        2 * self.n + 5 * self.n * self.m
    }
    pub fn u(&self, m: usize) -> usize {
        debug_assert!(self.activation);
        self.num_placement() + m
    }
    pub fn num_binaries(&self) -> usize {
        self.num_placement() + if self.activation { self.m } else { 0 }
    }
    pub fn theta(&self) -> usize {
        debug_assert!(self.theta);
        self.num_binaries()
    }
    pub fn r(&self, k: usize) -> usize {
        debug_assert!(self.flows);
        self.num_binaries() + usize::from(self.theta) + k
    }
    pub fn len(&self) -> usize {
        self.num_binaries() + usize::from(self.theta) + if self.flows { self.num_paths } else { 0 }
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn name(&self, j: usize) -> String {
        let p = self.num_placement();
        let (n, m) = (self.n, self.m);
        if j < n {
            format!("x1_{j}")
        } else if j < 2 * n {
            format!("x2_{}", j - n)
        } else if j < p {
            let off = j - 2 * n;
            let (block, rest) = (off / (n * m), off % (n * m));
            let fam = ["y1", "y2", "z", "v1", "v2"][block];
            format!("{fam}_{}_{}", rest / m, rest % m)
        } else if j < self.num_binaries() {
            format!("u_{}", j - p)
        } else if self.theta && j == self.num_binaries() {
            "theta".to_string()
        } else {
            format!("r_{}", j - self.num_binaries() - usize::from(self.theta))
        }
    }

    /// Point over this space holding `b` in the placement block, zero elsewhere.
    pub fn point(&self, b: &Binaries) -> Vec<f64> {
        let mut x = vec![0.0; self.len()];
        for n in 0..self.n {
            x[self.x1(n)] = f64::from(b.x1[n]);
            x[self.x2(n)] = f64::from(b.x2[n]);
            for m in 0..self.m {
                x[self.y1(n, m)] = f64::from(b.y1[n][m]);
                x[self.y2(n, m)] = f64::from(b.y2[n][m]);
                x[self.z(n, m)] = f64::from(b.z[n][m]);
                x[self.v1(n, m)] = f64::from(b.v1[n][m]);
                x[self.v2(n, m)] = f64::from(b.v2[n][m]);
            }
        }
        x
    }

    /// Read rounded placement binaries out of a solution vector.
    pub fn binaries(&self, x: &[f64]) -> Binaries {
        let bit = |v: f64| u8::from(v > 0.5);
        let mut b = Binaries::zeros(self.n, self.m);
        for n in 0..self.n {
            b.x1[n] = bit(x[self.x1(n)]);
            b.x2[n] = bit(x[self.x2(n)]);
            for m in 0..self.m {
                b.y1[n][m] = bit(x[self.y1(n, m)]);
                b.y2[n][m] = bit(x[self.y2(n, m)]);
                b.z[n][m] = bit(x[self.z(n, m)]);
                b.v1[n][m] = bit(x[self.v1(n, m)]);
                b.v2[n][m] = bit(x[self.v2(n, m)]);
            }
        }
        b
    }
}

/// `constant + Σ coef · var` over master variables.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Affine {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl Affine {
    pub fn constant(c: f64) -> Self {
        Affine {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(j, c)| acc + c * point[j])
    }

    /// `Σ w_i · parts_i`, with terms merged by variable and sorted.
    pub fn combine(weights: &[f64], parts: &[Affine]) -> Affine {
        let mut constant = 0.0;
        let mut acc: std::collections::BTreeMap<usize, f64> = Default::default();
        for (&w, part) in weights.iter().zip(parts) {
            if w == 0.0 {
                continue;
            }
            constant += w * part.constant;
            for &(j, c) in &part.terms {
                *acc.entry(j).or_insert(0.0) += w * c;
            }
        }
        Affine {
            constant,
            terms: acc.into_iter().filter(|&(_, c)| c != 0.0).collect(),
        }
    }
}

/// Source of a model row, for reporting and export names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowTag {
    CuChain,
    DuChain,
    UniqueF1,
    UniqueF2,
    DuCapacity,
    CuCapacity,
    SingleCu,
    Ordering,
    LinkCapacity,
    Coupling,
    CoreRouting,
    DelayS1,
    DelayS2,
    DelayS3,
    PathCap,
    Envelope,
    Activation,
    Cardinality,
    OptimalityCut,
    FeasibilityCut,
}

impl RowTag {
    pub fn name(self) -> &'static str {
        match self {
            RowTag::CuChain => "cu_chain",
            RowTag::DuChain => "du_chain",
            RowTag::UniqueF1 => "unique_f1",
            RowTag::UniqueF2 => "unique_f2",
            RowTag::DuCapacity => "du_cap",
            RowTag::CuCapacity => "cu_cap",
            RowTag::SingleCu => "single_cu",
            RowTag::Ordering => "ordering",
            RowTag::LinkCapacity => "link_cap",
            RowTag::Coupling => "coupling",
            RowTag::CoreRouting => "core_route",
            RowTag::DelayS1 => "delay_s1",
            RowTag::DelayS2 => "delay_s2",
            RowTag::DelayS3 => "delay_s3",
            RowTag::PathCap => "path_cap",
            RowTag::Envelope => "envelope",
            RowTag::Activation => "activation",
            RowTag::Cardinality => "cardinality",
            RowTag::OptimalityCut => "opt_cut",
            RowTag::FeasibilityCut => "feas_cut",
        }
    }
}

impl fmt::Display for RowTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: RowTag,
    /// export name, unique within a model
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub vars: VarSpace,
    pub obj: Vec<f64>,
    pub obj_offset: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integer: Vec<bool>,
    pub rows: Vec<LinearConstraint>,
}

impl MilpModel {
    pub fn to_problem(&self) -> MilpProblem {
        let mut lp = LpProblem::new();
        for j in 0..self.obj.len() {
            lp.add_var(self.obj[j], self.lower[j], self.upper[j]);
        }
        lp.obj_offset = self.obj_offset;
        for row in &self.rows {
            lp.add_row(row.coeffs.clone(), row.sense, row.rhs);
        }
        // deciding which sites open first prunes the cardinality-limited trees
        let mut priority = vec![0; self.obj.len()];
        if self.vars.activation {
            for m in 0..self.vars.m {
                priority[self.vars.u(m)] = 1;
            }
        }
        MilpProblem::new(lp, self.integer.clone()).with_priority(priority)
    }

    pub fn count_rows(&self, tag: RowTag) -> usize {
        self.rows.iter().filter(|r| r.tag == tag).count()
    }

    /// Text in LP file format; identical models give identical bytes.
    pub fn to_lp_string(&self) -> String {
        let names: Vec<String> = (0..self.vars.len()).map(|j| self.vars.name(j)).collect();
        let rows: Vec<String> = self.rows.iter().map(|r| r.name.clone()).collect();
        write_lp(&self.to_problem(), &names, &rows)
    }
}
