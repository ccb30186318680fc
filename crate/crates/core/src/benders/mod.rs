//! Benders decomposition of the linearised model: a binary master over the
//! placement with a routing-cost proxy θ, and a routing LP per master point.
//!
//! Each slave row's right-hand side is an affine function of the master
//! binaries, so any dual vector or infeasibility ray turns into a linear cut
//! by weighting those functions.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Binaries, Instance, Solution};
use crate::lp::{solve_lp, LpError, LpOutcome, LpStatus, MilpOptions, MilpStatus};
use crate::model::{
    build_master, build_slave, routing_floor, Affine, ModelBuildError, ModelOptions, SlaveModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutKind {
    Optimality,
    Feasibility,
}

impl CutKind {
    pub fn name(self) -> &'static str {
        match self {
            CutKind::Optimality => "optimality",
            CutKind::Feasibility => "feasibility",
        }
    }
}

/// `h(b) <= θ` for optimality cuts, `h(b) <= 0` for feasibility cuts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub kind: CutKind,
    pub h: Affine,
    /// slave duals or ray that produced the cut
    pub source: Vec<f64>,
    pub iteration: usize,
}

impl Cut {
    fn key(&self) -> (CutKind, i64, Vec<(usize, i64)>) {
        let q = |v: f64| (v * 1e9).round() as i64;
        (
            self.kind,
            q(self.h.constant),
            self.h.terms.iter().map(|&(j, c)| (j, q(c))).collect(),
        )
    }
}

/// Cuts collected so far, without duplicates.
#[derive(Debug, Clone, Default)]
pub struct CutPool {
    cuts: Vec<Cut>,
    keys: HashSet<(CutKind, i64, Vec<(usize, i64)>)>,
    duplicates: usize,
}

impl CutPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add `cut`; returns false (and counts it) when an equal cut is present.
    pub fn insert(&mut self, cut: Cut) -> bool {
        if self.keys.insert(cut.key()) {
            self.cuts.push(cut);
            true
        } else {
            self.duplicates += 1;
            false
        }
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn count(&self, kind: CutKind) -> usize {
        self.cuts.iter().filter(|c| c.kind == kind).count()
    }

    pub fn duplicates(&self) -> usize {
        self.duplicates
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub lb: f64,
    pub ub: f64,
    pub gap: f64,
    /// `None` on the final iteration, where the gap closed before a slave solve
    pub cut_kind: Option<CutKind>,
    pub cut_added: bool,
    pub master_ms: f64,
    pub slave_ms: f64,
    pub binaries_hash: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub records: Vec<IterationRecord>,
}

impl IterationLog {
    /// `iter,lb,ub,gap,cut_kind,master_ms,slave_ms`
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["iter", "lb", "ub", "gap", "cut_kind", "master_ms", "slave_ms"])
            .expect("in-memory write");
        for r in &self.records {
            w.write_record([
                r.iter.to_string(),
                r.lb.to_string(),
                r.ub.to_string(),
                r.gap.to_string(),
                r.cut_kind.map_or("none", CutKind::name).to_string(),
                format!("{:.3}", r.master_ms),
                format!("{:.3}", r.slave_ms),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn lb_nondecreasing(&self) -> bool {
        self.records.windows(2).all(|w| w[0].lb <= w[1].lb)
    }

    pub fn ub_nonincreasing(&self) -> bool {
        self.records.windows(2).all(|w| w[1].ub <= w[0].ub)
    }

    /// True when the slave was solved twice at the same master point.
    ///
    /// The closing iteration is excluded: the master returning a point it
    /// has already priced is exactly what proves the gap closed.
    pub fn has_repeat(&self) -> bool {
        let mut seen = HashSet::new();
        !self
            .records
            .iter()
            .filter(|r| r.cut_kind.is_some())
            .all(|r| seen.insert(r.binaries_hash))
    }
}

#[derive(Debug, Error)]
pub enum BendersError {
    #[error(transparent)]
    Model(#[from] ModelBuildError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("dual vector has {found} entries, slave has {expected} rows")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("routing slave reported an unbounded objective")]
    UnexpectedUnbounded,
    #[error("no placement satisfies the master constraints and cuts")]
    InfeasibleInstance,
    #[error("master branch-and-bound hit its node limit")]
    MasterNodeLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendersOptions {
    pub epsilon: f64,
    pub max_iter: usize,
    pub model: ModelOptions,
    pub milp: MilpOptions,
    /// start from the capacity-free routing floor instead of an empty pool
    pub seed_cuts: bool,
}

impl BendersOptions {
    pub fn for_instance(inst: &Instance) -> Self {
        BendersOptions {
            epsilon: inst.epsilon,
            max_iter: inst.max_iter,
            model: ModelOptions::default(),
            milp: MilpOptions::default(),
            seed_cuts: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BendersStatus {
    Optimal,
    IterLimit,
}

#[derive(Debug, Clone)]
pub struct BendersResult {
    pub status: BendersStatus,
    /// best feasible plan found; absent only if the iteration limit hit first
    pub solution: Option<Solution>,
    pub lb: f64,
    pub ub: f64,
    pub log: IterationLog,
    pub pool: CutPool,
}

impl BendersResult {
    pub fn gap(&self) -> f64 {
        self.ub - self.lb
    }

    pub fn relative_gap(&self) -> f64 {
        self.gap() / self.ub.abs().max(1.0)
    }

    pub fn iterations(&self) -> usize {
        self.log.records.len()
    }
}

/// The cut function `b ↦ Σ π_i rhs_i(b)` of a slave dual or ray.
pub fn h_function(pi: &[f64], slave: &SlaveModel) -> Result<Affine, BendersError> {
    if pi.len() != slave.rhs.len() {
        return Err(BendersError::DimensionMismatch {
            expected: slave.rhs.len(),
            found: pi.len(),
        });
    }
    Ok(Affine::combine(pi, &slave.rhs))
}

/// `h(π, b)`: the dual slave objective of `pi` at placement `b`.
pub fn dual_value_h(pi: &[f64], slave: &SlaveModel, binaries: &Binaries) -> Result<f64, BendersError> {
    Ok(h_function(pi, slave)?.eval(&slave.vars.point(binaries)))
}

/// Turn a slave outcome into the cut it certifies.
pub fn make_cut(outcome: &LpOutcome, slave: &SlaveModel, iteration: usize) -> Result<Cut, BendersError> {
    match outcome.status {
        LpStatus::Optimal => Ok(Cut {
            kind: CutKind::Optimality,
            h: h_function(&outcome.duals, slave)?,
            source: outcome.duals.clone(),
            iteration,
        }),
        LpStatus::Infeasible => {
            let ray = outcome
                .ray
                .as_ref()
                .ok_or_else(|| LpError::NumericalFailure("infeasible slave without ray".into()))?;
            let mut h = h_function(ray, slave)?;
            let scale = h
                .terms
                .iter()
                .map(|t| t.1.abs())
                .fold(h.constant.abs(), f64::max);
            if scale > 0.0 {
                h.constant /= scale;
                for t in &mut h.terms {
                    t.1 /= scale;
                }
            }
            Ok(Cut {
                kind: CutKind::Feasibility,
                h,
                source: ray.clone(),
                iteration,
            })
        }
        LpStatus::Unbounded => Err(BendersError::UnexpectedUnbounded),
    }
}

fn snapshot_hash(b: &Binaries) -> u64 {
    let mut h = DefaultHasher::new();
    b.hash(&mut h);
    h.finish()
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Route `b` optimally; `None` when no routing exists.
pub fn route(inst: &Instance, opts: &ModelOptions, b: &Binaries) -> Result<Option<Vec<f64>>, BendersError> {
    let slave = build_slave(inst, opts, b)?;
    let out = solve_lp(&slave.lp)?;
    match out.status {
        LpStatus::Optimal => Ok(Some(out.x)),
        LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(BendersError::UnexpectedUnbounded),
    }
}

/// Cuts valid before any slave solve, tagged iteration 0.
pub fn seed_cuts(inst: &Instance, opts: &ModelOptions) -> Result<Vec<Cut>, BendersError> {
    let f = routing_floor(inst, opts)?;
    let cut = |kind, h| Cut {
        kind,
        h,
        source: Vec::new(),
        iteration: 0,
    };
    let mut out = vec![cut(CutKind::Optimality, f.floor)];
    out.extend(f.exclusions.into_iter().map(|h| cut(CutKind::Feasibility, h)));
    Ok(out)
}

/// Alternate master and slave until `UB - LB <= epsilon`.
pub fn run(inst: &Instance, opts: &BendersOptions) -> Result<BendersResult, BendersError> {
    let mut pool = CutPool::new();
    if opts.seed_cuts {
        for cut in seed_cuts(inst, &opts.model)? {
            pool.insert(cut);
        }
    }
    let mut log = IterationLog::default();
    let (mut lb, mut ub) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut best: Option<Binaries> = None;
    let closed =
        |lb: f64, ub: f64| ub.is_finite() && ub - lb <= opts.epsilon + 1e-9 * ub.abs().max(1.0);
    let mut status = BendersStatus::IterLimit;

    for iter in 1..=opts.max_iter {
        let t0 = Instant::now();
        let master = build_master(inst, &opts.model, &pool)?;
        let out = crate::lp::solve_milp(&master.to_problem(), opts.milp)?;
        match out.status {
            MilpStatus::Optimal => {}
            MilpStatus::Infeasible => return Err(BendersError::InfeasibleInstance),
            MilpStatus::Unbounded => return Err(BendersError::UnexpectedUnbounded),
            MilpStatus::NodeLimit => return Err(BendersError::MasterNodeLimit),
        }
        let master_ms = ms_since(t0);
        lb = lb.max(out.objective);
        let b = master.vars.binaries(&out.x);
        let mut record = IterationRecord {
            iter,
            lb,
            ub,
            gap: ub - lb,
            cut_kind: None,
            cut_added: false,
            master_ms,
            slave_ms: 0.0,
            binaries_hash: snapshot_hash(&b),
        };
        if closed(lb, ub) {
            log::debug!("iter {iter}: gap closed at master, lb {lb} ub {ub}");
            log.records.push(record);
            status = BendersStatus::Optimal;
            break;
        }

        let t1 = Instant::now();
        let slave = build_slave(inst, &opts.model, &b)?;
        let sout = solve_lp(&slave.lp)?;
        let cut = make_cut(&sout, &slave, iter)?;
        if sout.status == LpStatus::Optimal {
            let theta = master.vars.theta();
            let placement = out.objective - out.x[theta];
            let cost = placement + sout.objective;
            if cost < ub {
                ub = cost;
                best = Some(b);
            }
        }
        record.cut_kind = Some(cut.kind);
        record.cut_added = pool.insert(cut);
        record.slave_ms = ms_since(t1);
        record.ub = ub;
        record.gap = ub - lb;
        log::debug!(
            "iter {iter}: lb {lb} ub {ub} cut {} added {}",
            record.cut_kind.map_or("none", CutKind::name),
            record.cut_added
        );
        log.records.push(record);
        if closed(lb, ub) {
            status = BendersStatus::Optimal;
            break;
        }
    }

    let solution = match best {
        Some(b) => {
            let flows = route(inst, &opts.model, &b)?
                .ok_or_else(|| LpError::NumericalFailure("incumbent routing became infeasible".into()))?;
            Some(Solution::evaluate(b, flows, inst))
        }
        None => None,
    };
    Ok(BendersResult {
        status,
        solution,
        lb,
        ub,
        log,
        pool,
    })
}
