use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{DelayModel, Link, Node, NodeKind, Topology, TopologyError};

/// Parameters of a random geometric network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenSpec {
    pub seed: u64,
    pub dus: usize,
    pub cus: usize,
    pub routers: usize,
    /// side of the square area
    pub side_km: f64,
    /// nodes closer than this are linked
    pub radius_km: f64,
    pub cap_min_mbps: f64,
    pub cap_max_mbps: f64,
    pub delay_model: DelayModel,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            seed: 1,
            dus: 5,
            cus: 2,
            routers: 4,
            side_km: 10.0,
            radius_km: 4.0,
            cap_min_mbps: 10_000.0,
            cap_max_mbps: 40_000.0,
            delay_model: DelayModel::default(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    Invalid(String),
    #[error("could not produce a valid topology: {0}")]
    GenerationFailure(#[from] TopologyError),
}

impl GenSpec {
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::Invalid(m.to_string()));
        if self.dus == 0 {
            return bad("at least one DU is required");
        }
        if self.cus == 0 {
            return bad("at least one CU site is required");
        }
        if !(self.side_km > 0.0 && self.side_km.is_finite()) {
            return bad("side_km must be positive");
        }
        if !(self.radius_km >= 0.0 && self.radius_km.is_finite()) {
            return bad("radius_km must be nonnegative");
        }
        if !(self.cap_min_mbps > 0.0 && self.cap_min_mbps <= self.cap_max_mbps)
            || !self.cap_max_mbps.is_finite()
        {
            return bad("capacity range must satisfy 0 < min <= max");
        }
        Ok(())
    }
}

fn dist(a: &Node, b: &Node) -> f64 {
    (a.x_km - b.x_km).hypot(a.y_km - b.y_km)
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

/// Random geometric graph with the core at the area's centre.
///
/// Ids: core 0, DUs `1..=N`, then the `L + M` transit nodes of which the `M`
/// with highest degree (ties by lower id) become CU sites.
pub fn generate(spec: &GenSpec) -> Result<Topology, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let total = 1 + spec.dus + spec.routers + spec.cus;
    let mut nodes = Vec::with_capacity(total);
    let half = spec.side_km / 2.0;
    nodes.push(Node {
        id: 0,
        kind: NodeKind::Core,
        x_km: half,
        y_km: half,
    });
    for id in 1..total {
        let kind = if id <= spec.dus {
            NodeKind::Du
        } else {
            NodeKind::Router
        };
        nodes.push(Node {
            id,
            kind,
            x_km: rng.gen_range(0.0..=spec.side_km),
            y_km: rng.gen_range(0.0..=spec.side_km),
        });
    }

    let mut pairs = Vec::new();
    for a in 0..total {
        for b in a + 1..total {
            pairs.push((dist(&nodes[a], &nodes[b]), a, b));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));

    let mut parent: Vec<usize> = (0..total).collect();
    let mut chosen = Vec::new();
    for &(d, a, b) in &pairs {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        let joins = ra != rb;
        if joins {
            parent[ra] = rb;
        }
        // DUs sit at the edge: they only link toward transit nodes or the core
        let du_pair = nodes[a].kind == NodeKind::Du && nodes[b].kind == NodeKind::Du;
        if (d <= spec.radius_km && !du_pair) || joins {
            chosen.push((a, b, d));
        }
    }
    chosen.sort_by_key(|&(a, b, _)| (a, b));

    let mut degree = vec![0usize; total];
    for &(a, b, _) in &chosen {
        degree[a] += 1;
        degree[b] += 1;
    }
    let mut transit: Vec<usize> = (1 + spec.dus..total).collect();
    transit.sort_by_key(|&v| (std::cmp::Reverse(degree[v]), v));
    for &v in transit.iter().take(spec.cus) {
        nodes[v].kind = NodeKind::CuSite;
    }

    let links = chosen
        .into_iter()
        .map(|(a, b, d)| {
            let length_km = (d * 1e3).round() / 1e3;
            Link {
                a,
                b,
                capacity_mbps: rng.gen_range(spec.cap_min_mbps..=spec.cap_max_mbps).round(),
                delay_us: spec.delay_model.delay_us(length_km),
                length_km,
            }
        })
        .collect();
    Ok(Topology::new(nodes, links)?)
}
