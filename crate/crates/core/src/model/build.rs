use crate::benders::{CutKind, CutPool};
use std::collections::BTreeMap;

use crate::instance::{Binaries, Instance, Split, S3_FLOW_MBPS};
use crate::lp::{LpProblem, Sense};

use super::{
    Affine, DelayMode, Force, LinearConstraint, MilpModel, ModelBuildError, ModelOptions, RowTag,
    VarSpace,
};

fn row(tag: RowTag, name: String, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> LinearConstraint {
    LinearConstraint {
        coeffs,
        sense,
        rhs,
        tag,
        name,
    }
}

/// The three envelope rows making `v = x z` exact at binary points.
pub fn mccormick(x: usize, z: usize, v: usize) -> [(Vec<(usize, f64)>, Sense, f64); 3] {
    [
        (vec![(v, 1.0), (x, -1.0)], Sense::Le, 0.0),
        (vec![(v, 1.0), (z, -1.0)], Sense::Le, 0.0),
        (vec![(x, 1.0), (z, 1.0), (v, -1.0)], Sense::Le, 1.0),
    ]
}

fn check_dims(inst: &Instance) -> Result<(), ModelBuildError> {
    let (n, m) = (inst.num_dus(), inst.num_cus());
    let (found, found_cus) = (inst.paths.num_dus(), inst.paths.num_cus());
    if found != n || (n > 0 && found_cus != m) {
        return Err(ModelBuildError::Dimensions {
            n,
            m,
            found,
            found_cus,
        });
    }
    Ok(())
}

fn space(inst: &Instance, opts: &ModelOptions, theta: bool, flows: bool) -> VarSpace {
    VarSpace {
        n: inst.num_dus(),
        m: inst.num_cus(),
        num_paths: inst.paths.paths.len(),
        activation: opts.max_deployed.is_some(),
        theta,
        flows,
    }
}

/// Placement objective `Σ V_n + Σ V_m` as coefficients plus a constant.
fn placement_objective(vs: &VarSpace, inst: &Instance, obj: &mut [f64]) -> f64 {
    let rho = inst.rho;
    let mut offset = 0.0;
    for n in 0..vs.n {
        let (al, be, la) = (inst.alpha[n], inst.beta[n], inst.lambda[n]);
        obj[vs.x1(n)] += al + be * la * rho.rho1;
        obj[vs.x2(n)] += al + be * la * rho.rho2;
        let local_f3 = al + be * la * rho.rho3;
        offset += local_f3;
        for m in 0..vs.m {
            let (a, b) = (inst.a[m], inst.b[m]);
            obj[vs.y1(n, m)] += b * la * rho.rho1 + a;
            obj[vs.y2(n, m)] += b * la * rho.rho2 + a;
            obj[vs.z(n, m)] += b * la * rho.rho3 + a + inst.omega[m] * la - local_f3;
        }
    }
    offset
}

fn placement_rows(vs: &VarSpace, inst: &Instance, opts: &ModelOptions) -> Vec<LinearConstraint> {
    let rho = inst.rho;
    let mut rows = Vec::new();
    for n in 0..vs.n {
        for m in 0..vs.m {
            rows.push(row(
                RowTag::CuChain,
                format!("cu_chain_{n}_{m}"),
                vec![(vs.y1(n, m), 1.0), (vs.y2(n, m), -1.0)],
                Sense::Le,
                0.0,
            ));
        }
        rows.push(row(
            RowTag::DuChain,
            format!("du_chain_{n}"),
            vec![(vs.x2(n), 1.0), (vs.x1(n), -1.0)],
            Sense::Le,
            0.0,
        ));
        let mut f1 = vec![(vs.x1(n), 1.0)];
        let mut f2 = vec![(vs.x2(n), 1.0)];
        for m in 0..vs.m {
            f1.push((vs.y1(n, m), 1.0));
            f2.push((vs.y2(n, m), 1.0));
        }
        rows.push(row(RowTag::UniqueF1, format!("unique_f1_{n}"), f1, Sense::Eq, 1.0));
        rows.push(row(RowTag::UniqueF2, format!("unique_f2_{n}"), f2, Sense::Eq, 1.0));
        let la = inst.lambda[n];
        let mut cap = vec![(vs.x1(n), la * rho.rho1), (vs.x2(n), la * rho.rho2)];
        for m in 0..vs.m {
            cap.push((vs.z(n, m), -la * rho.rho3));
        }
        rows.push(row(
            RowTag::DuCapacity,
            format!("du_cap_{n}"),
            cap,
            Sense::Le,
            inst.h_du[n] - la * rho.rho3,
        ));
    }
    for m in 0..vs.m {
        let mut cap = Vec::with_capacity(3 * vs.n);
        for n in 0..vs.n {
            let la = inst.lambda[n];
            cap.push((vs.y1(n, m), la * rho.rho1));
            cap.push((vs.y2(n, m), la * rho.rho2));
            cap.push((vs.z(n, m), la * rho.rho3));
        }
        rows.push(row(RowTag::CuCapacity, format!("cu_cap_{m}"), cap, Sense::Le, inst.h_cu[m]));
    }
    for n in 0..vs.n {
        let single = (0..vs.m).map(|m| (vs.z(n, m), 1.0)).collect();
        rows.push(row(RowTag::SingleCu, format!("single_cu_{n}"), single, Sense::Le, 1.0));
        for m in 0..vs.m {
            rows.push(row(
                RowTag::Ordering,
                format!("ordering_{n}_{m}"),
                vec![(vs.y2(n, m), 1.0), (vs.z(n, m), -1.0)],
                Sense::Le,
                0.0,
            ));
        }
    }
    for n in 0..vs.n {
        for m in 0..vs.m {
            for (which, x, v) in [(1, vs.x1(n), vs.v1(n, m)), (2, vs.x2(n), vs.v2(n, m))] {
                for (k, (coeffs, sense, rhs)) in mccormick(x, vs.z(n, m), v).into_iter().enumerate() {
                    rows.push(row(
                        RowTag::Envelope,
                        format!("envelope{which}_{n}_{m}_{k}"),
                        coeffs,
                        sense,
                        rhs,
                    ));
                }
            }
        }
    }
    if let Some(limit) = opts.max_deployed {
        for m in 0..vs.m {
            for n in 0..vs.n {
                rows.push(row(
                    RowTag::Activation,
                    format!("activation_{n}_{m}"),
                    vec![(vs.z(n, m), 1.0), (vs.u(m), -1.0)],
                    Sense::Le,
                    0.0,
                ));
            }
        }
        let all = (0..vs.m).map(|m| (vs.u(m), 1.0)).collect();
        rows.push(row(RowTag::Cardinality, "cardinality".into(), all, Sense::Le, limit as f64));
    }
    rows
}

/// A routing row: flows on the left, an affine function of the placement
/// binaries on the right.
struct RoutingRow {
    tag: RowTag,
    name: String,
    flows: Vec<(usize, f64)>,
    sense: Sense,
    rhs: Affine,
}

/// Largest DU→CU flow any split can demand.
fn max_fronthaul(lambda: f64) -> f64 {
    lambda.max(1.02 * lambda + 1.5).max(S3_FLOW_MBPS)
}

/// DU→CU paths that no split may use under `mode`.
fn pruned(inst: &Instance, mode: DelayMode) -> Vec<bool> {
    let mut out = vec![false; inst.paths.paths.len()];
    if mode == DelayMode::Prefilter {
        for n in 0..inst.num_dus() {
            for m in 0..inst.num_cus() {
                for &k in inst.paths.to_cu(n, m) {
                    out[k] = inst.paths.paths[k].class.in_a;
                }
            }
        }
    }
    out
}

fn routing_rows(vs: &VarSpace, inst: &Instance, mode: DelayMode) -> Vec<RoutingRow> {
    let ps = &inst.paths;
    let t = inst.big_t;
    let pruned = pruned(inst, mode);
    let mut rows = Vec::new();
    for n in 0..vs.n {
        let la = inst.lambda[n];
        for m in 0..vs.m {
            let flows = ps
                .to_cu(n, m)
                .iter()
                .filter(|&&k| !pruned[k])
                .map(|&k| (k, 1.0))
                .collect();
            rows.push(RoutingRow {
                tag: RowTag::Coupling,
                name: format!("coupling_{n}_{m}"),
                flows,
                sense: Sense::Eq,
                rhs: Affine {
                    constant: 0.0,
                    terms: vec![
                        (vs.z(n, m), S3_FLOW_MBPS),
                        (vs.v1(n, m), 1.02 * la + 1.5 - S3_FLOW_MBPS),
                        (vs.v2(n, m), -(0.02 * la + 1.5)),
                    ],
                },
            });
        }
        rows.push(RoutingRow {
            tag: RowTag::CoreRouting,
            name: format!("core_route_{n}"),
            flows: ps.to_core(n).iter().map(|&k| (k, 1.0)).collect(),
            sense: Sense::Eq,
            rhs: Affine {
                constant: la,
                terms: (0..vs.m).map(|m| (vs.z(n, m), -la)).collect(),
            },
        });
    }
    let mut on_link: Vec<Vec<(usize, f64)>> = vec![Vec::new(); inst.topology.links().len()];
    for cp in &ps.paths {
        if pruned[cp.path.id] {
            continue;
        }
        for &l in &cp.path.links {
            on_link[l].push((cp.path.id, 1.0));
        }
    }
    for (l, flows) in on_link.into_iter().enumerate() {
        if !flows.is_empty() {
            rows.push(RoutingRow {
                tag: RowTag::LinkCapacity,
                name: format!("link_cap_{l}"),
                flows,
                sense: Sense::Le,
                rhs: Affine::constant(inst.topology.links()[l].capacity_mbps),
            });
        }
    }
    for n in 0..vs.n {
        for m in 0..vs.m {
            let (y1, y2) = (vs.y1(n, m), vs.y2(n, m));
            let ids = ps.to_cu(n, m);
            let class = |pick: fn(&crate::net::DelayClass) -> bool| -> Vec<(usize, f64)> {
                ids.iter()
                    .filter(|&&k| pick(&ps.paths[k].class))
                    .map(|&k| (k, 1.0))
                    .collect()
            };
            match mode {
                DelayMode::Corrected | DelayMode::AsPrinted => {
                    let printed = mode == DelayMode::AsPrinted;
                    let s2_sign = if printed { -1.0 } else { 1.0 };
                    let specs = [
                        (RowTag::DelayS1, class(|c| c.in_a), 0.0, t, t),
                        (RowTag::DelayS2, class(|c| c.in_b), t, s2_sign * t, -s2_sign * t),
                        (RowTag::DelayS3, class(|c| c.in_c), 2.0 * t, -s2_sign * t, if printed { t } else { -t }),
                    ];
                    for (tag, flows, constant, c1, c2) in specs {
                        rows.push(RoutingRow {
                            tag,
                            name: format!("{}_{n}_{m}", tag.name()),
                            flows,
                            sense: Sense::Le,
                            rhs: Affine {
                                constant,
                                terms: vec![(y1, c1), (y2, c2)],
                            },
                        });
                    }
                }
                DelayMode::Prefilter => {
                    let cap_s = max_fronthaul(inst.lambda[n]);
                    for &k in ids {
                        let cp = &ps.paths[k];
                        if cp.class.in_a || !(cp.class.in_b || cp.class.in_c) {
                            continue;
                        }
                        let bottleneck = cp
                            .path
                            .links
                            .iter()
                            .map(|&l| inst.topology.links()[l].capacity_mbps)
                            .fold(f64::INFINITY, f64::min);
                        let cap = bottleneck.min(cap_s);
                        // y2 is on under S2 and S3, y1 under S3 alone; the bounds need not nest
                        let terms = match (cp.class.in_b, cp.class.in_c) {
                            (true, true) => vec![(y2, -cap)],
                            (true, false) => vec![(y2, -cap), (y1, cap)],
                            _ => vec![(y1, -cap)],
                        };
                        rows.push(RoutingRow {
                            tag: RowTag::PathCap,
                            name: format!("path_cap_{k}"),
                            flows: vec![(k, 1.0)],
                            sense: Sense::Le,
                            rhs: Affine { constant: cap, terms },
                        });
                    }
                }
                DelayMode::Ignore => {}
            }
        }
    }
    rows
}

fn binary_bounds(vs: &VarSpace, opts: &ModelOptions, lower: &mut [f64], upper: &mut [f64]) {
    for j in 0..vs.num_binaries() {
        lower[j] = 0.0;
        upper[j] = 1.0;
    }
    match opts.force {
        Force::None => {}
        Force::CRan => {
            for n in 0..vs.n {
                upper[vs.x1(n)] = 0.0;
                upper[vs.x2(n)] = 0.0;
            }
        }
        Force::DRan => {
            for n in 0..vs.n {
                for m in 0..vs.m {
                    upper[vs.z(n, m)] = 0.0;
                }
            }
        }
    }
}

/// The complete linearised program over placement, flows and envelopes.
pub fn build_monolithic(inst: &Instance, opts: &ModelOptions) -> Result<MilpModel, ModelBuildError> {
    check_dims(inst)?;
    let vs = space(inst, opts, false, true);
    let len = vs.len();
    let mut obj = vec![0.0; len];
    let obj_offset = placement_objective(&vs, inst, &mut obj);
    for cp in &inst.paths.paths {
        obj[vs.r(cp.path.id)] = cp.path.cost;
    }
    let mut lower = vec![0.0; len];
    let mut upper = vec![f64::INFINITY; len];
    binary_bounds(&vs, opts, &mut lower, &mut upper);
    for (k, &p) in pruned(inst, opts.delay_mode).iter().enumerate() {
        if p {
            upper[vs.r(k)] = 0.0;
        }
    }
    let mut rows = placement_rows(&vs, inst, opts);
    for rr in routing_rows(&vs, inst, opts.delay_mode) {
        let mut coeffs: Vec<(usize, f64)> = rr.flows.iter().map(|&(k, c)| (vs.r(k), c)).collect();
        coeffs.extend(rr.rhs.terms.iter().map(|&(j, c)| (j, -c)));
        rows.push(row(rr.tag, rr.name, coeffs, rr.sense, rr.rhs.constant));
    }
    let integer = (0..len).map(|j| j < vs.num_binaries()).collect();
    Ok(MilpModel {
        vars: vs,
        obj,
        obj_offset,
        lower,
        upper,
        integer,
        rows,
    })
}

/// Placement binaries and θ with the current Benders cuts.
pub fn build_master(
    inst: &Instance,
    opts: &ModelOptions,
    pool: &CutPool,
) -> Result<MilpModel, ModelBuildError> {
    check_dims(inst)?;
    let vs = space(inst, opts, true, false);
    let len = vs.len();
    let mut obj = vec![0.0; len];
    let obj_offset = placement_objective(&vs, inst, &mut obj);
    obj[vs.theta()] = 1.0;
    let mut lower = vec![0.0; len];
    let mut upper = vec![f64::INFINITY; len];
    binary_bounds(&vs, opts, &mut lower, &mut upper);
    let mut rows = placement_rows(&vs, inst, opts);
    for (i, cut) in pool.cuts().iter().enumerate() {
        let mut coeffs = cut.h.terms.clone();
        let tag = match cut.kind {
            CutKind::Optimality => {
                coeffs.push((vs.theta(), -1.0));
                RowTag::OptimalityCut
            }
            CutKind::Feasibility => RowTag::FeasibilityCut,
        };
        rows.push(row(tag, format!("{}_{i}", tag.name()), coeffs, Sense::Le, -cut.h.constant));
    }
    let integer = (0..len).map(|j| j < vs.num_binaries()).collect();
    Ok(MilpModel {
        vars: vs,
        obj,
        obj_offset,
        lower,
        upper,
        integer,
        rows,
    })
}

/// Routing LP for fixed binaries. Variable `k` is the flow on path `k`;
/// `rhs[i]` is row `i`'s right-hand side as a function of the binaries.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaveModel {
    pub vars: VarSpace,
    pub lp: LpProblem,
    pub rhs: Vec<Affine>,
    pub tags: Vec<RowTag>,
    pub names: Vec<String>,
}

pub fn build_slave(
    inst: &Instance,
    opts: &ModelOptions,
    binaries: &Binaries,
) -> Result<SlaveModel, ModelBuildError> {
    check_dims(inst)?;
    let vs = space(inst, opts, false, false);
    let point = vs.point(binaries);
    let mut lp = LpProblem::new();
    let pruned = pruned(inst, opts.delay_mode);
    for cp in &inst.paths.paths {
        let hi = if pruned[cp.path.id] { 0.0 } else { f64::INFINITY };
        lp.add_var(cp.path.cost, 0.0, hi);
    }
    let mut out = SlaveModel {
        vars: vs,
        lp,
        rhs: Vec::new(),
        tags: Vec::new(),
        names: Vec::new(),
    };
    for rr in routing_rows(&vs, inst, opts.delay_mode) {
        // flow-free caps hold for every valid placement and add nothing
        if rr.flows.is_empty() && rr.sense == Sense::Le {
            continue;
        }
        out.lp.add_row(rr.flows, rr.sense, rr.rhs.eval(&point));
        out.rhs.push(rr.rhs);
        out.tags.push(rr.tag);
        out.names.push(rr.name);
    }
    Ok(out)
}

/// Slave-implied inequalities on the placement alone.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingFloor {
    /// routing cost with link capacities dropped; satisfies `floor(b) <= θ`
    pub floor: Affine,
    /// `h(b) <= 0` for each choice that has no admissible path at all
    pub exclusions: Vec<Affine>,
}

/// Each DU's traffic priced at its cheapest admissible path, split by split.
///
/// Split indicators are linear in the products: S1 is `v2`, S2 is
/// `v1 - v2`, S3 is `z - v1`, and distributed operation is `1 - Σ_m z`.
pub fn routing_floor(inst: &Instance, opts: &ModelOptions) -> Result<RoutingFloor, ModelBuildError> {
    check_dims(inst)?;
    let vs = space(inst, opts, true, false);
    let ps = &inst.paths;
    let mut floor = Affine::constant(0.0);
    let mut exclusions = Vec::new();
    let cheapest = |ids: &[usize], split: Option<Split>| {
        ids.iter()
            .filter(|&&k| split.is_none_or(|s| opts.delay_mode.admits(ps.bounds, s, ps.paths[k].path.delay_s)))
            .map(|&k| ps.paths[k].path.cost)
            .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.min(c))))
    };
    for n in 0..vs.n {
        let la = inst.lambda[n];
        let z_all: Vec<(usize, f64)> = (0..vs.m).map(|m| (vs.z(n, m), -1.0)).collect();
        match cheapest(ps.to_core(n), None) {
            Some(c) => {
                floor.constant += c * la;
                floor.terms.extend(z_all.iter().map(|&(j, s)| (j, s * c * la)));
            }
            None => exclusions.push(Affine {
                constant: 1.0,
                terms: z_all,
            }),
        }
        for m in 0..vs.m {
            let (z, v1, v2) = (vs.z(n, m), vs.v1(n, m), vs.v2(n, m));
            let ids = ps.to_cu(n, m);
            let splits = [
                (Split::S1, la, vec![(v2, 1.0)]),
                (Split::S2, 1.02 * la + 1.5, vec![(v1, 1.0), (v2, -1.0)]),
                (Split::S3, S3_FLOW_MBPS, vec![(z, 1.0), (v1, -1.0)]),
            ];
            for (split, flow, indicator) in splits {
                match cheapest(ids, Some(split)) {
                    Some(c) => floor.terms.extend(indicator.iter().map(|&(j, s)| (j, s * c * flow))),
                    None => exclusions.push(Affine {
                        constant: 0.0,
                        terms: indicator,
                    }),
                }
            }
        }
    }
    let mut merged = BTreeMap::new();
    for (j, c) in floor.terms {
        *merged.entry(j).or_insert(0.0) += c;
    }
    floor.terms = merged.into_iter().filter(|t| t.1 != 0.0).collect();
    Ok(RoutingFloor { floor, exclusions })
}
