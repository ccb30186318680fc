use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use super::{NodeKind, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ranking {
    /// delay, then length, then node sequence
    #[default]
    Delay,
    /// length, then delay, then node sequence
    Length,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub id: usize,
    pub source: usize,
    pub target: usize,
    pub nodes: Vec<usize>,
    pub links: Vec<usize>,
    pub delay_s: f64,
    pub length_km: f64,
    /// routing cost per Mb/s carried
    pub cost: f64,
}

impl Path {
    fn key(&self, ranking: Ranking) -> (f64, f64) {
        match ranking {
            Ranking::Delay => (self.delay_s, self.length_km),
            Ranking::Length => (self.length_km, self.delay_s),
        }
    }

    pub fn uses_link(&self, link: usize) -> bool {
        self.links.contains(&link)
    }
}

fn cmp_key(a: &Path, b: &Path, ranking: Ranking) -> Ordering {
    let (ka, kb) = (a.key(ranking), b.key(ranking));
    ka.0.total_cmp(&kb.0)
        .then(ka.1.total_cmp(&kb.1))
        .then_with(|| a.nodes.cmp(&b.nodes))
}

/// Upper delay bounds of the three splits, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayBounds {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl Default for DelayBounds {
    fn default() -> Self {
        DelayBounds {
            s1: 30e-3,
            s2: 2e-3,
            s3: 0.25e-3,
        }
    }
}

/// Which split bounds a path's delay exceeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DelayClass {
    pub in_a: bool,
    pub in_b: bool,
    pub in_c: bool,
}

pub fn classify_path(delay_s: f64, bounds: DelayBounds) -> DelayClass {
    DelayClass {
        in_a: delay_s > bounds.s1,
        in_b: delay_s > bounds.s2,
        in_c: delay_s > bounds.s3,
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Label {
    w: (f64, f64),
    node: usize,
}

impl Eq for Label {}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap
        other
            .w
            .0
            .total_cmp(&self.w.0)
            .then(other.w.1.total_cmp(&self.w.1))
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn link_weight(topo: &Topology, link: usize, ranking: Ranking) -> (f64, f64) {
    let l = &topo.links()[link];
    match ranking {
        Ranking::Delay => (l.delay_s(), l.length_km),
        Ranking::Length => (l.length_km, l.delay_s()),
    }
}

/// Lexicographic two-weight Dijkstra avoiding banned nodes and links.
fn dijkstra(
    topo: &Topology,
    source: usize,
    target: usize,
    banned_nodes: &[bool],
    banned_links: &[bool],
    ranking: Ranking,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = topo.nodes().len();
    let mut dist = vec![(f64::INFINITY, f64::INFINITY); n];
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = (0.0, 0.0);
    heap.push(Label {
        w: (0.0, 0.0),
        node: source,
    });
    while let Some(Label { w, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        if node == target {
            break;
        }
        for &(next, link) in topo.neighbours(node) {
            if banned_nodes[next] || banned_links[link] || done[next] {
                continue;
            }
            let lw = link_weight(topo, link, ranking);
            let cand = (w.0 + lw.0, w.1 + lw.1);
            let better = cand.0 < dist[next].0 || (cand.0 == dist[next].0 && cand.1 < dist[next].1);
            if better {
                dist[next] = cand;
                pred[next] = Some((node, link));
                heap.push(Label {
                    w: cand,
                    node: next,
                });
            }
        }
    }
    if !done[target] {
        return None;
    }
    let mut nodes = vec![target];
    let mut links = Vec::new();
    let mut cur = target;
    while let Some((p, l)) = pred[cur] {
        nodes.push(p);
        links.push(l);
        cur = p;
    }
    nodes.reverse();
    links.reverse();
    Some((nodes, links))
}

fn make_path(topo: &Topology, nodes: Vec<usize>, links: Vec<usize>) -> Path {
    let (mut delay, mut length) = (0.0, 0.0);
    for &l in &links {
        delay += topo.links()[l].delay_s();
        length += topo.links()[l].length_km;
    }
    Path {
        id: 0,
        source: nodes[0],
        target: *nodes.last().expect("path has nodes"),
        nodes,
        links,
        delay_s: delay,
        length_km: length,
        cost: 0.0,
    }
}

/// Up to `k` loopless paths from `source` to `target`, sorted by the ranking
/// key. Pass `usize::MAX` to enumerate every simple path.
pub fn k_shortest_paths(
    topo: &Topology,
    source: usize,
    target: usize,
    k: usize,
    ranking: Ranking,
) -> Vec<Path> {
    let n = topo.nodes().len();
    if k == 0 || source == target || source >= n || target >= n {
        return Vec::new();
    }
    let no_nodes = vec![false; n];
    let no_links = vec![false; topo.links().len()];
    let Some((nodes, links)) = dijkstra(topo, source, target, &no_nodes, &no_links, ranking) else {
        return Vec::new();
    };
    let mut accepted = vec![make_path(topo, nodes, links)];
    let mut known: HashSet<Vec<usize>> = HashSet::new();
    known.insert(accepted[0].nodes.clone());
    let mut candidates: Vec<Path> = Vec::new();

    loop {
        let last = accepted.last().expect("nonempty").clone();
        for i in 0..last.nodes.len() - 1 {
            let spur = last.nodes[i];
            let root = &last.nodes[..=i];
            let mut banned_links = no_links.clone();
            for p in &accepted {
                if p.nodes.len() > i + 1 && &p.nodes[..=i] == root {
                    banned_links[p.links[i]] = true;
                }
            }
            let mut banned_nodes = no_nodes.clone();
            for &r in &root[..i] {
                banned_nodes[r] = true;
            }
            if let Some((spur_nodes, spur_links)) =
                dijkstra(topo, spur, target, &banned_nodes, &banned_links, ranking)
            {
                let mut nodes = root[..i].to_vec();
                nodes.extend(spur_nodes);
                let mut links = last.links[..i].to_vec();
                links.extend(spur_links);
                if known.insert(nodes.clone()) {
                    candidates.push(make_path(topo, nodes, links));
                }
            }
        }
        let Some(best) =
            (0..candidates.len()).min_by(|&a, &b| cmp_key(&candidates[a], &candidates[b], ranking))
        else {
            break;
        };
        if accepted.len() >= k {
            // keep collecting only while the weight ties the k-th path, so the
            // final sort can break ties by node sequence
            let kth = accepted[k - 1].key(ranking);
            let w = candidates[best].key(ranking);
            if w.0 > kth.0 || (w.0 == kth.0 && w.1 > kth.1) {
                break;
            }
        }
        accepted.push(candidates.swap_remove(best));
    }
    accepted.sort_by(|a, b| cmp_key(a, b, ranking));
    accepted.truncate(k);
    accepted
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedPath {
    #[serde(flatten)]
    pub path: Path,
    #[serde(flatten)]
    pub class: DelayClass,
}

/// Candidate paths for every (DU, target) pair. Target index 0 is the core;
/// target `m + 1` is CU site `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub k: usize,
    pub c_d: f64,
    pub ranking: Ranking,
    pub bounds: DelayBounds,
    pub paths: Vec<ClassifiedPath>,
    /// `pairs[n][t]` lists path ids
    pub pairs: Vec<Vec<Vec<usize>>>,
}

impl PathSet {
    pub fn to_core(&self, n: usize) -> &[usize] {
        &self.pairs[n][0]
    }

    pub fn to_cu(&self, n: usize, m: usize) -> &[usize] {
        &self.pairs[n][m + 1]
    }

    pub fn num_dus(&self) -> usize {
        self.pairs.len()
    }

    pub fn num_cus(&self) -> usize {
        self.pairs.first().map_or(0, |p| p.len() - 1)
    }

    pub fn path(&self, id: usize) -> &ClassifiedPath {
        &self.paths[id]
    }

    /// Reprice every path at `c_d` per km.
    pub fn reprice(&mut self, c_d: f64) {
        self.c_d = c_d;
        for p in &mut self.paths {
            p.path.cost = c_d * p.path.length_km;
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("path set serialises")
    }
}

/// Error from [`build_pathsets`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("DU node {0} has no path to the core")]
pub struct InfeasibleTopology(pub usize);

pub fn build_pathsets(
    topo: &Topology,
    k: usize,
    c_d: f64,
    ranking: Ranking,
    bounds: DelayBounds,
) -> Result<PathSet, InfeasibleTopology> {
    let mut targets = vec![topo.core()];
    targets.extend_from_slice(topo.cu_sites());
    debug_assert!(targets[1..]
        .iter()
        .all(|&t| topo.nodes()[t].kind == NodeKind::CuSite));
    let mut paths = Vec::new();
    let mut pairs = Vec::with_capacity(topo.num_dus());
    for &du in topo.dus() {
        let mut per_target = Vec::with_capacity(targets.len());
        for (t, &target) in targets.iter().enumerate() {
            let found = k_shortest_paths(topo, du, target, k, ranking);
            if t == 0 && found.is_empty() {
                return Err(InfeasibleTopology(du));
            }
            let mut ids = Vec::with_capacity(found.len());
            for mut path in found {
                path.id = paths.len();
                path.cost = c_d * path.length_km;
                ids.push(path.id);
                let class = classify_path(path.delay_s, bounds);
                paths.push(ClassifiedPath { path, class });
            }
            per_target.push(ids);
        }
        pairs.push(per_target);
    }
    Ok(PathSet {
        k,
        c_d,
        ranking,
        bounds,
        paths,
        pairs,
    })
}
