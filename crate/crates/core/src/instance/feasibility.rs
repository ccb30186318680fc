//! Independent constraint checker. It evaluates the placement semantics
//! directly (bilinear terms as products, delay limits per selected split)
//! rather than reusing any model rows.

use std::fmt;

use serde::Serialize;

use super::cost::traffic_flow;
use super::{Instance, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// dimensions, binary domain, nonnegative flows
    Domain,
    /// f1 at a CU only together with f2 there
    CuChain,
    /// f2 at the DU only together with f1 there
    DuChain,
    /// each of f1, f2 placed exactly once
    Uniqueness,
    DuCapacity,
    CuCapacity,
    /// at most one CU per DU
    SingleCu,
    /// f3 moves to the CU whenever f2 does
    Ordering,
    LinkCapacity,
    /// flow to the serving CU matches the split's fronthaul rate
    Coupling,
    /// undistributed traffic goes straight to the core
    CoreRouting,
    /// no flow on paths slower than the selected split allows
    DelayBound,
    /// auxiliary products equal x z
    Linearization,
}

impl Family {
    pub const ALL: [Family; 13] = [
        Family::Domain,
        Family::CuChain,
        Family::DuChain,
        Family::Uniqueness,
        Family::DuCapacity,
        Family::CuCapacity,
        Family::SingleCu,
        Family::Ordering,
        Family::LinkCapacity,
        Family::Coupling,
        Family::CoreRouting,
        Family::DelayBound,
        Family::Linearization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Domain => "domain",
            Family::CuChain => "cu_chain",
            Family::DuChain => "du_chain",
            Family::Uniqueness => "uniqueness",
            Family::DuCapacity => "du_capacity",
            Family::CuCapacity => "cu_capacity",
            Family::SingleCu => "single_cu",
            Family::Ordering => "ordering",
            Family::LinkCapacity => "link_capacity",
            Family::Coupling => "coupling",
            Family::CoreRouting => "core_routing",
            Family::DelayBound => "delay_bound",
            Family::Linearization => "linearization",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyReport {
    pub family: Family,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub families: Vec<FamilyReport>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.families.iter().all(|f| f.violations.is_empty())
    }

    pub fn failed(&self) -> Vec<Family> {
        self.families
            .iter()
            .filter(|f| !f.violations.is_empty())
            .map(|f| f.family)
            .collect()
    }

    pub fn passes(&self, family: Family) -> bool {
        self.families
            .iter()
            .find(|f| f.family == family)
            .is_none_or(|f| f.violations.is_empty())
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fam in &self.families {
            if fam.violations.is_empty() {
                writeln!(f, "{:<14} ok", fam.family.name())?;
            } else {
                writeln!(
                    f,
                    "{:<14} FAIL ({})",
                    fam.family.name(),
                    fam.violations.len()
                )?;
                for v in fam.violations.iter().take(5) {
                    writeln!(f, "    {v}")?;
                }
            }
        }
        Ok(())
    }
}

/// Flow tolerance in Mb/s, relative to the magnitude being compared.
fn tol(scale: f64) -> f64 {
    1e-6 * (1.0 + scale.abs())
}

pub fn check_feasibility(sol: &Solution, inst: &Instance) -> FeasibilityReport {
    let mut report: Vec<FamilyReport> = Family::ALL
        .iter()
        .map(|&family| FamilyReport {
            family,
            violations: Vec::new(),
        })
        .collect();
    let mut flag = |family: Family, msg: String| {
        report
            .iter_mut()
            .find(|r| r.family == family)
            .expect("family listed")
            .violations
            .push(msg);
    };
    let (n_du, n_cu) = (inst.num_dus(), inst.num_cus());
    let b = &sol.binaries;
    let grids = [&b.y1, &b.y2, &b.z, &b.v1, &b.v2];
    let dims_ok = b.x1.len() == n_du
        && b.x2.len() == n_du
        && grids
            .iter()
            .all(|g| g.len() == n_du && g.iter().all(|row| row.len() == n_cu))
        && sol.flows.len() == inst.paths.paths.len();
    if !dims_ok {
        flag(
            Family::Domain,
            "dimensions do not match the instance".into(),
        );
        return FeasibilityReport { families: report };
    }
    for n in 0..n_du {
        for (name, v) in [("x1", b.x1[n]), ("x2", b.x2[n])] {
            if v > 1 {
                flag(Family::Domain, format!("{name}[{n}] = {v}"));
            }
        }
        for m in 0..n_cu {
            for (name, g) in ["y1", "y2", "z", "v1", "v2"].iter().zip(grids) {
                if g[n][m] > 1 {
                    flag(Family::Domain, format!("{name}[{n}][{m}] = {}", g[n][m]));
                }
            }
        }
    }
    for (k, &r) in sol.flows.iter().enumerate() {
        if !(r >= -tol(0.0)) || !r.is_finite() {
            flag(Family::Domain, format!("flow on path {k} is {r}"));
        }
    }
    let f = |v: u8| f64::from(v);
    let rho = inst.rho;

    for n in 0..n_du {
        let lambda = inst.lambda[n];
        let sum_z: f64 = b.z[n].iter().map(|&v| f(v)).sum();
        let sum_y1: f64 = b.y1[n].iter().map(|&v| f(v)).sum();
        let sum_y2: f64 = b.y2[n].iter().map(|&v| f(v)).sum();
        if b.x2[n] > b.x1[n] {
            flag(Family::DuChain, format!("DU {n}: x2 > x1"));
        }
        if f(b.x1[n]) + sum_y1 != 1.0 {
            flag(
                Family::Uniqueness,
                format!("DU {n}: f1 placed {} times", f(b.x1[n]) + sum_y1),
            );
        }
        if f(b.x2[n]) + sum_y2 != 1.0 {
            flag(
                Family::Uniqueness,
                format!("DU {n}: f2 placed {} times", f(b.x2[n]) + sum_y2),
            );
        }
        if sum_z > 1.0 {
            flag(Family::SingleCu, format!("DU {n}: served by {sum_z} CUs"));
        }
        let du_load =
            lambda * (rho.rho1 * f(b.x1[n]) + rho.rho2 * f(b.x2[n]) + rho.rho3 * (1.0 - sum_z));
        if du_load > inst.h_du[n] * (1.0 + 1e-9) {
            flag(
                Family::DuCapacity,
                format!("DU {n}: load {du_load:.4e} > capacity {:.4e}", inst.h_du[n]),
            );
        }
        for m in 0..n_cu {
            if b.y1[n][m] > b.y2[n][m] {
                flag(Family::CuChain, format!("DU {n}, CU {m}: y1 > y2"));
            }
            if b.z[n][m] < b.y2[n][m] {
                flag(Family::Ordering, format!("DU {n}, CU {m}: z < y2"));
            }
            if u16::from(b.v1[n][m]) != u16::from(b.x1[n]) * u16::from(b.z[n][m]) {
                flag(Family::Linearization, format!("DU {n}, CU {m}: v1 != x1 z"));
            }
            if u16::from(b.v2[n][m]) != u16::from(b.x2[n]) * u16::from(b.z[n][m]) {
                flag(Family::Linearization, format!("DU {n}, CU {m}: v2 != x2 z"));
            }
            let ids = inst.paths.to_cu(n, m);
            let carried: f64 = ids.iter().map(|&k| sol.flows[k]).sum();
            let expected = match traffic_flow(b.x1[n].min(1), b.x2[n].min(1), lambda) {
                Ok(s) => s * f(b.z[n][m]),
                Err(_) => continue,
            };
            if (carried - expected).abs() > tol(expected) {
                flag(
                    Family::Coupling,
                    format!("DU {n}, CU {m}: carries {carried:.6} Mb/s, split needs {expected:.6}"),
                );
            }
            if b.z[n][m] == 1 {
                let split = match (b.y1[n][m], b.y2[n][m]) {
                    (0, 0) => Some(("S1", inst.paths.bounds.s1)),
                    (0, 1) => Some(("S2", inst.paths.bounds.s2)),
                    (1, 1) => Some(("S3", inst.paths.bounds.s3)),
                    _ => None,
                };
                if let Some((name, bound)) = split {
                    for &k in ids {
                        let p = &inst.paths.paths[k].path;
                        if p.delay_s > bound && sol.flows[k] > tol(0.0) {
                            flag(
                                Family::DelayBound,
                                format!(
                                    "DU {n}, CU {m}: {:.3} Mb/s on path {k} with delay {:.1} us exceeds the {name} bound",
                                    sol.flows[k],
                                    p.delay_s * 1e6
                                ),
                            );
                        }
                    }
                }
            }
        }
        let direct: f64 = inst.paths.to_core(n).iter().map(|&k| sol.flows[k]).sum();
        let expected = (1.0 - sum_z) * lambda;
        if (direct - expected).abs() > tol(expected) {
            flag(
                Family::CoreRouting,
                format!("DU {n}: {direct:.6} Mb/s direct to core, expected {expected:.6}"),
            );
        }
    }
    for m in 0..n_cu {
        let load: f64 = (0..n_du)
            .map(|n| {
                inst.lambda[n]
                    * (rho.rho1 * f(b.y1[n][m])
                        + rho.rho2 * f(b.y2[n][m])
                        + rho.rho3 * f(b.z[n][m]))
            })
            .sum();
        if load > inst.h_cu[m] * (1.0 + 1e-9) {
            flag(
                Family::CuCapacity,
                format!("CU {m}: load {load:.4e} > capacity {:.4e}", inst.h_cu[m]),
            );
        }
    }
    let mut link_load = vec![0.0; inst.topology.links().len()];
    for (cp, &r) in inst.paths.paths.iter().zip(&sol.flows) {
        for &l in &cp.path.links {
            link_load[l] += r;
        }
    }
    for (l, (&load, link)) in link_load.iter().zip(inst.topology.links()).enumerate() {
        if load > link.capacity_mbps + tol(link.capacity_mbps) {
            flag(
                Family::LinkCapacity,
                format!(
                    "link {l}: {load:.6} Mb/s over capacity {}",
                    link.capacity_mbps
                ),
            );
        }
    }
    FeasibilityReport { families: report }
}
