//! Exhaustive reference solver for small instances.
//!
//! Every per-DU choice combination is enumerated; each one is priced from
//! the bilinear cost directly and routed with a dedicated LP that fixes the
//! fronthaul flow `z·S_n` instead of going through the linearised model.

use thiserror::Error;

use crate::instance::{Binaries, Choice, Family, Instance, Solution, Split, S3_FLOW_MBPS};
use crate::lp::{solve_lp, LpError, LpProblem, LpStatus, Sense};
use crate::model::{DelayMode, Force, ModelOptions};

pub const DEFAULT_CAP: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{count} configurations exceed the enumeration cap of {cap}")]
    TooLarge { count: u128, cap: u64 },
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub cap: u64,
    pub model: ModelOptions,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            cap: DEFAULT_CAP,
            model: ModelOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    /// `None` when no configuration is feasible
    pub solution: Option<Solution>,
    pub choices: Option<Vec<Choice>>,
    pub enumerated: u64,
    pub routed: u64,
}

/// Choices available to one DU, in enumeration order.
pub fn choice_menu(m: usize) -> Vec<Choice> {
    let mut out = vec![Choice::DRan];
    for split in Split::ALL {
        for cu in 0..m {
            out.push(Choice::Split { split, cu });
        }
    }
    out
}

pub fn config_to_binaries(choices: &[Choice], m: usize) -> Binaries {
    Binaries::from_choices(choices, m)
}

/// Number of configurations, `(1 + 3M)^N`.
pub fn config_count(n: usize, m: usize) -> u128 {
    (1 + 3 * m as u128).saturating_pow(n as u32)
}

fn allowed(choice: Choice, opts: &OracleOptions) -> bool {
    match (opts.model.force, choice) {
        (Force::None, _) => true,
        (Force::CRan, c) => matches!(c, Choice::Split { split: Split::S3, .. }),
        (Force::DRan, c) => c == Choice::DRan,
    }
}

const PLACEMENT_TOL: f64 = 1e-9;

fn fits_compute(inst: &Instance, choices: &[Choice], max_deployed: Option<usize>) -> bool {
    let rho = inst.rho;
    let mut cu_load = vec![0.0; inst.num_cus()];
    for (n, &c) in choices.iter().enumerate() {
        let la = inst.lambda[n];
        let local = match c {
            Choice::DRan => rho.total(),
            Choice::Split { split, cu } => {
                let remote = match split {
                    Split::S1 => rho.rho3,
                    Split::S2 => rho.rho2 + rho.rho3,
                    Split::S3 => rho.total(),
                };
                cu_load[cu] += la * remote;
                rho.total() - remote
            }
        };
        if la * local > inst.h_du[n] * (1.0 + PLACEMENT_TOL) {
            return false;
        }
    }
    if cu_load
        .iter()
        .zip(&inst.h_cu)
        .any(|(&l, &h)| l > h * (1.0 + PLACEMENT_TOL))
    {
        return false;
    }
    match max_deployed {
        Some(k) => cu_load.iter().filter(|&&l| l > 0.0).count() <= k,
        None => true,
    }
}

fn path_usable(inst: &Instance, mode: DelayMode, split: Split, delay_s: f64) -> bool {
    mode.admits(inst.paths.bounds, split, delay_s)
}

/// Cheapest routing of `choices`; `None` if the links cannot carry it.
pub fn route_choices(
    inst: &Instance,
    mode: DelayMode,
    choices: &[Choice],
) -> Result<Option<(f64, Vec<f64>)>, LpError> {
    let pairs: Vec<(usize, Choice)> = choices.iter().copied().enumerate().collect();
    route_subset(inst, mode, &pairs)
}

/// Routing LP over the listed DUs only; the others send nothing.
fn route_subset(
    inst: &Instance,
    mode: DelayMode,
    choices: &[(usize, Choice)],
) -> Result<Option<(f64, Vec<f64>)>, LpError> {
    let ps = &inst.paths;
    let mut lp = LpProblem::new();
    for cp in &ps.paths {
        lp.add_var(cp.path.cost, 0.0, 0.0);
    }
    let open = |lp: &mut LpProblem, ids: &[usize]| -> Vec<(usize, f64)> {
        for &k in ids {
            lp.upper[k] = f64::INFINITY;
        }
        ids.iter().map(|&k| (k, 1.0)).collect()
    };
    let mut demands = Vec::new();
    for &(n, c) in choices {
        let la = inst.lambda[n];
        match c {
            Choice::DRan => demands.push((open(&mut lp, ps.to_core(n)), la)),
            Choice::Split { split, cu } => {
                let usable: Vec<usize> = ps
                    .to_cu(n, cu)
                    .iter()
                    .copied()
                    .filter(|&k| path_usable(inst, mode, split, ps.paths[k].path.delay_s))
                    .collect();
                let flow = match split {
                    Split::S1 => la,
                    Split::S2 => 1.02 * la + 1.5,
                    Split::S3 => S3_FLOW_MBPS,
                };
                demands.push((open(&mut lp, &usable), flow));
            }
        }
    }
    for (coeffs, demand) in demands {
        lp.add_row(coeffs, Sense::Eq, demand);
    }
    for (l, link) in inst.topology.links().iter().enumerate() {
        let on: Vec<(usize, f64)> = ps
            .paths
            .iter()
            .filter(|cp| lp.upper[cp.path.id] > 0.0 && cp.path.links.contains(&l))
            .map(|cp| (cp.path.id, 1.0))
            .collect();
        if !on.is_empty() {
            lp.add_row(on, Sense::Le, link.capacity_mbps);
        }
    }
    let out = solve_lp(&lp)?;
    Ok(match out.status {
        LpStatus::Optimal => Some((out.objective, out.x)),
        _ => None,
    })
}

/// Minimum-cost configuration by full enumeration, first in lexicographic
/// order among equal costs.
pub fn brute_force(inst: &Instance, opts: &OracleOptions) -> Result<OracleResult, OracleError> {
    let (n, m) = (inst.num_dus(), inst.num_cus());
    let count = config_count(n, m);
    if count > u128::from(opts.cap) {
        return Err(OracleError::TooLarge {
            count,
            cap: opts.cap,
        });
    }
    let menu = choice_menu(m);
    let mut digits = vec![0usize; n];
    let mut best: Option<(f64, Vec<Choice>, Vec<f64>)> = None;
    let (mut enumerated, mut routed) = (0u64, 0u64);
    loop {
        enumerated += 1;
        let choices: Vec<Choice> = digits.iter().map(|&d| menu[d]).collect();
        if choices.iter().all(|&c| allowed(c, opts))
            && fits_compute(inst, &choices, opts.model.max_deployed)
        {
            routed += 1;
            if let Some((routing, flows)) = route_choices(inst, opts.model.delay_mode, &choices)? {
                let b = config_to_binaries(&choices, m);
                let placement = crate::instance::total_cost(&b, &vec![0.0; flows.len()], inst).total;
                let cost = placement + routing;
                let better = match &best {
                    None => true,
                    Some((c, _, _)) => cost < c - 1e-9 * c.abs().max(1.0),
                };
                if better {
                    best = Some((cost, choices, flows));
                }
            }
        }
        // odometer with DU 0 as the most significant digit
        let mut pos = n;
        loop {
            if pos == 0 {
                let (solution, choices) = match best {
                    Some((_, c, flows)) => {
                        let b = config_to_binaries(&c, m);
                        (Some(Solution::evaluate(b, flows, inst)), Some(c))
                    }
                    None => (None, None),
                };
                return Ok(OracleResult {
                    solution,
                    choices,
                    enumerated,
                    routed,
                });
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < menu.len() {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Names the constraint families that rule out every configuration, judged
/// one DU at a time. Empty when each DU alone has a workable choice, in
/// which case the conflict lies in capacity the DUs share.
pub fn diagnose(inst: &Instance, mode: DelayMode) -> Result<Vec<(Family, String)>, LpError> {
    let mut out = Vec::new();
    for n in 0..inst.num_dus() {
        let mut compute_ok = Vec::new();
        for c in choice_menu(inst.num_cus()) {
            let mut choices = vec![Choice::DRan; inst.num_dus()];
            choices[n] = c;
            // other DUs stay distributed and put no load on the CUs
            let mut alone = inst.clone();
            alone.h_du.iter_mut().enumerate().filter(|&(i, _)| i != n).for_each(|(_, h)| *h = f64::INFINITY);
            if fits_compute(&alone, &choices, None) {
                compute_ok.push(c);
            }
        }
        if compute_ok.is_empty() {
            let fam = if inst.h_cu.iter().all(|&h| h == 0.0) {
                Family::CuCapacity
            } else {
                Family::DuCapacity
            };
            out.push((fam, format!("DU {n}: no placement fits the DU and CU compute capacity")));
            continue;
        }
        let mut slow_only = true;
        let mut routable = false;
        for &c in &compute_ok {
            if let Choice::Split { split, cu } = c {
                let usable = inst.paths.to_cu(n, cu).iter().any(|&k| {
                    path_usable(inst, mode, split, inst.paths.paths[k].path.delay_s)
                });
                if !usable {
                    continue;
                }
            }
            slow_only = false;
            if route_subset(inst, mode, &[(n, c)])?.is_some() {
                routable = true;
                break;
            }
        }
        if !routable {
            let fam = if slow_only {
                Family::DelayBound
            } else {
                Family::LinkCapacity
            };
            out.push((fam, format!("DU {n}: no compute-feasible placement can be routed")));
        }
    }
    Ok(out)
}
