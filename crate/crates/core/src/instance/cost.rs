use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Binaries, Instance, Rho};

/// DU→CU flow of a fully centralised (S3) base station, Mb/s.
pub const S3_FLOW_MBPS: f64 = 2500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("x2 = 1 requires x1 = 1")]
pub struct InvalidSplit;

/// Fronthaul flow a DU sends to its CU for functions `(x1, x2)` kept local.
pub fn traffic_flow(x1: u8, x2: u8, lambda: f64) -> Result<f64, InvalidSplit> {
    if x2 > x1 || x1 > 1 {
        return Err(InvalidSplit);
    }
    let (x1, x2) = (f64::from(x1), f64::from(x2));
    Ok(x1 * (1.02 * lambda + 1.5) - x2 * (0.02 * lambda + 1.5) + S3_FLOW_MBPS * (1.0 - x1))
}

pub fn du_cost(x1: u8, x2: u8, z_row: &[u8], alpha: f64, beta: f64, lambda: f64, rho: Rho) -> f64 {
    let local_f3 = 1.0 - z_row.iter().map(|&z| f64::from(z)).sum::<f64>();
    let (x1, x2) = (f64::from(x1), f64::from(x2));
    alpha * (x1 + x2 + local_f3)
        + beta * lambda * (rho.rho1 * x1 + rho.rho2 * x2 + rho.rho3 * local_f3)
}

/// Compute part and usage part of one CU's cost.
#[allow(clippy::too_many_arguments)]
pub fn cu_cost_parts(
    y1_col: &[u8],
    y2_col: &[u8],
    z_col: &[u8],
    a: f64,
    b: f64,
    omega: f64,
    lambda: &[f64],
    rho: Rho,
) -> (f64, f64) {
    let mut load = 0.0;
    let mut instances = 0.0;
    let mut carried = 0.0;
    for n in 0..lambda.len() {
        let (y1, y2, z) = (
            f64::from(y1_col[n]),
            f64::from(y2_col[n]),
            f64::from(z_col[n]),
        );
        load += lambda[n] * (rho.rho1 * y1 + rho.rho2 * y2 + rho.rho3 * z);
        instances += y1 + y2 + z;
        carried += z * lambda[n];
    }
    (b * load + a * instances, omega * carried)
}

#[allow(clippy::too_many_arguments)]
pub fn cu_cost(
    y1_col: &[u8],
    y2_col: &[u8],
    z_col: &[u8],
    a: f64,
    b: f64,
    omega: f64,
    lambda: &[f64],
    rho: Rho,
) -> f64 {
    let (compute, usage) = cu_cost_parts(y1_col, y2_col, z_col, a, b, omega, lambda, rho);
    compute + usage
}

/// Sum of `cost x flow` over `(cost, flow)` pairs.
pub fn routing_cost(flows: &[(f64, f64)]) -> f64 {
    flows.iter().map(|&(zeta, r)| zeta * r).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub du: f64,
    pub cu: f64,
    pub omega: f64,
    pub routing: f64,
    pub total: f64,
}

pub fn total_cost(binaries: &Binaries, flows: &[f64], inst: &Instance) -> CostBreakdown {
    let (n, m) = (inst.num_dus(), inst.num_cus());
    let mut out = CostBreakdown::default();
    for i in 0..n {
        out.du += du_cost(
            binaries.x1[i],
            binaries.x2[i],
            &binaries.z[i],
            inst.alpha[i],
            inst.beta[i],
            inst.lambda[i],
            inst.rho,
        );
    }
    let column = |g: &Vec<Vec<u8>>, k: usize| g.iter().map(|row| row[k]).collect::<Vec<u8>>();
    for k in 0..m {
        let (compute, usage) = cu_cost_parts(
            &column(&binaries.y1, k),
            &column(&binaries.y2, k),
            &column(&binaries.z, k),
            inst.a[k],
            inst.b[k],
            inst.omega[k],
            &inst.lambda,
            inst.rho,
        );
        out.cu += compute;
        out.omega += usage;
    }
    let pairs: Vec<(f64, f64)> = inst
        .paths
        .paths
        .iter()
        .zip(flows)
        .map(|(p, &r)| (p.path.cost, r))
        .collect();
    out.routing = routing_cost(&pairs);
    out.total = out.du + out.cu + out.omega + out.routing;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const RHO: Rho = Rho {
        rho1: 2.0,
        rho2: 1.0,
        rho3: 1.0,
    };

    #[test]
    fn flows_per_split() {
        assert_eq!(traffic_flow(1, 1, 150.0), Ok(150.0));
        assert_eq!(traffic_flow(0, 0, 7.0), Ok(2500.0));
        assert_eq!(traffic_flow(1, 0, 150.0), Ok(154.5));
        assert_eq!(traffic_flow(0, 1, 150.0), Err(InvalidSplit));
    }

    #[test]
    fn du_costs() {
        assert_eq!(du_cost(0, 0, &[1], 1.0, 0.1, 150.0, RHO), 0.0);
        assert!((du_cost(1, 1, &[0], 1.0, 0.1, 150.0, RHO) - 63.0).abs() < 1e-12);
        assert!((du_cost(1, 0, &[1], 1.0, 0.1, 150.0, RHO) - 31.0).abs() < 1e-12);
    }

    #[test]
    fn cu_costs() {
        assert_eq!(
            cu_cost(&[0], &[0], &[0], 0.5, 0.0017, 0.01, &[150.0], RHO),
            0.0
        );
        let s1 = cu_cost(&[0], &[0], &[1], 0.5, 0.0017, 0.01, &[150.0], RHO);
        assert!((s1 - 2.255).abs() < 1e-12);
        let s3 = cu_cost(&[1], &[1], &[1], 0.5, 0.0017, 0.01, &[150.0], RHO);
        assert!((s3 - 4.02).abs() < 1e-12);
    }

    #[test]
    fn routing_costs() {
        assert_eq!(routing_cost(&[]), 0.0);
        assert_eq!(routing_cost(&[(250.0, 150.0)]), 37500.0);
        assert_eq!(routing_cost(&[(1.0, 100.0), (2.0, 50.0)]), 200.0);
    }
}
