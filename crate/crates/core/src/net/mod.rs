//! RAN graph: nodes, undirected capacitated links and candidate paths.

mod paths;

pub use paths::{
    build_pathsets, classify_path, k_shortest_paths, ClassifiedPath, DelayBounds, DelayClass,
    InfeasibleTopology, Path, PathSet, Ranking,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Du,
    Router,
    CuSite,
    Core,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub kind: NodeKind,
    pub x_km: f64,
    pub y_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub a: usize,
    pub b: usize,
    pub capacity_mbps: f64,
    pub delay_us: f64,
    pub length_km: f64,
}

impl Link {
    pub fn delay_s(&self) -> f64 {
        self.delay_us * 1e-6
    }

    pub fn other(&self, node: usize) -> usize {
        if node == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Default link delay: propagation per km plus a fixed switching delay per hop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayModel {
    pub us_per_km: f64,
    pub per_hop_us: f64,
}

impl Default for DelayModel {
    fn default() -> Self {
        DelayModel {
            us_per_km: 5.0,
            per_hop_us: 10.0,
        }
    }
}

impl DelayModel {
    pub fn delay_us(&self, length_km: f64) -> f64 {
        self.us_per_km * length_km + self.per_hop_us
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("node ids must be contiguous from 0; position {position} holds id {id}")]
    NonContiguousIds { position: usize, id: usize },
    #[error("expected exactly one core node, found {0}")]
    CoreCount(usize),
    #[error("link {link} references unknown node {node}")]
    UnknownNode { link: usize, node: usize },
    #[error("link {0} is a self-loop")]
    SelfLoop(usize),
    #[error("link {link} duplicates the pair ({a}, {b})")]
    ParallelLink { link: usize, a: usize, b: usize },
    #[error("link {link}: {reason}")]
    BadLink { link: usize, reason: String },
    #[error("node {0} has a non-finite position")]
    BadPosition(usize),
    #[error("DU {0} cannot reach the core")]
    DuDisconnected(usize),
    #[error("CU site {0} is unreachable from every DU")]
    CuUnreachable(usize),
    #[error("topology has no DU")]
    NoDu,
    #[error("invalid topology JSON: {0}")]
    Json(String),
}

#[derive(Deserialize)]
struct LinkRecord {
    a: usize,
    b: usize,
    capacity_mbps: f64,
    #[serde(default)]
    delay_us: Option<f64>,
    length_km: f64,
}

#[derive(Deserialize)]
struct TopologyRecord {
    nodes: Vec<Node>,
    links: Vec<LinkRecord>,
}

#[derive(Serialize)]
struct TopologyView<'a> {
    nodes: &'a [Node],
    links: &'a [Link],
}

/// Validated, immutable network graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: Vec<Node>,
    links: Vec<Link>,
    /// per node: (neighbour, link index), sorted by neighbour
    adjacency: Vec<Vec<(usize, usize)>>,
    dus: Vec<usize>,
    cu_sites: Vec<usize>,
    core: usize,
}

impl Topology {
    pub fn new(nodes: Vec<Node>, links: Vec<Link>) -> Result<Self, TopologyError> {
        for (position, node) in nodes.iter().enumerate() {
            if node.id != position {
                return Err(TopologyError::NonContiguousIds {
                    position,
                    id: node.id,
                });
            }
            if !node.x_km.is_finite() || !node.y_km.is_finite() {
                return Err(TopologyError::BadPosition(node.id));
            }
        }
        let cores: Vec<usize> = nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Core)
            .map(|n| n.id)
            .collect();
        if cores.len() != 1 {
            return Err(TopologyError::CoreCount(cores.len()));
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut seen = std::collections::HashSet::new();
        for (i, link) in links.iter().enumerate() {
            for node in [link.a, link.b] {
                if node >= nodes.len() {
                    return Err(TopologyError::UnknownNode { link: i, node });
                }
            }
            if link.a == link.b {
                return Err(TopologyError::SelfLoop(i));
            }
            let bad = |reason: &str| TopologyError::BadLink {
                link: i,
                reason: reason.to_string(),
            };
            if !(link.capacity_mbps > 0.0) || !link.capacity_mbps.is_finite() {
                return Err(bad("capacity must be positive and finite"));
            }
            if !(link.delay_us >= 0.0) || !link.delay_us.is_finite() {
                return Err(bad("delay must be nonnegative and finite"));
            }
            if !(link.length_km >= 0.0) || !link.length_km.is_finite() {
                return Err(bad("length must be nonnegative and finite"));
            }
            let key = (link.a.min(link.b), link.a.max(link.b));
            if !seen.insert(key) {
                return Err(TopologyError::ParallelLink {
                    link: i,
                    a: key.0,
                    b: key.1,
                });
            }
            adjacency[link.a].push((link.b, i));
            adjacency[link.b].push((link.a, i));
        }
        for adj in adjacency.iter_mut() {
            adj.sort_unstable();
        }
        let of_kind = |kind| {
            nodes
                .iter()
                .filter(|n| n.kind == kind)
                .map(|n| n.id)
                .collect::<Vec<_>>()
        };
        let topo = Topology {
            dus: of_kind(NodeKind::Du),
            cu_sites: of_kind(NodeKind::CuSite),
            core: cores[0],
            nodes,
            links,
            adjacency,
        };
        topo.check_reachability()?;
        Ok(topo)
    }

    fn check_reachability(&self) -> Result<(), TopologyError> {
        if self.dus.is_empty() {
            return Err(TopologyError::NoDu);
        }
        let from_core = self.reachable_from(self.core);
        if let Some(&du) = self.dus.iter().find(|&&d| !from_core[d]) {
            return Err(TopologyError::DuDisconnected(du));
        }
        // every DU shares the core's component, so one search covers them all
        if let Some(&cu) = self.cu_sites.iter().find(|&&c| !from_core[c]) {
            return Err(TopologyError::CuUnreachable(cu));
        }
        Ok(())
    }

    fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Parse the JSON form; links without `delay_us` get `delay_model`'s value.
    pub fn from_json(text: &str, delay_model: DelayModel) -> Result<Self, TopologyError> {
        let rec: TopologyRecord =
            serde_json::from_str(text).map_err(|e| TopologyError::Json(e.to_string()))?;
        let links = rec
            .links
            .into_iter()
            .map(|l| Link {
                a: l.a,
                b: l.b,
                capacity_mbps: l.capacity_mbps,
                delay_us: l
                    .delay_us
                    .unwrap_or_else(|| delay_model.delay_us(l.length_km)),
                length_km: l.length_km,
            })
            .collect();
        Topology::new(rec.nodes, links)
    }

    pub fn to_json(&self) -> String {
        let view = TopologyView {
            nodes: &self.nodes,
            links: &self.links,
        };
        serde_json::to_string_pretty(&view).expect("topology serialises")
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn neighbours(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    /// DU node ids in id order; position is the DU index `n`.
    pub fn dus(&self) -> &[usize] {
        &self.dus
    }

    /// CU site node ids in id order; position is the CU index `m`.
    pub fn cu_sites(&self) -> &[usize] {
        &self.cu_sites
    }

    pub fn core(&self) -> usize {
        self.core
    }

    pub fn num_dus(&self) -> usize {
        self.dus.len()
    }

    pub fn num_cu_sites(&self) -> usize {
        self.cu_sites.len()
    }

    /// Copy of this topology where only the listed CU sites (by index into
    /// [`Topology::cu_sites`]) keep their role; the rest become routers.
    pub fn restrict_cu_sites(&self, keep: &[usize]) -> Topology {
        let mut nodes = self.nodes.clone();
        for (m, &id) in self.cu_sites.iter().enumerate() {
            if !keep.contains(&m) {
                nodes[id].kind = NodeKind::Router;
            }
        }
        Topology::new(nodes, self.links.clone()).expect("restriction keeps validity")
    }
}
