use proptest::prelude::*;
use vran_core::net::{
    build_pathsets, k_shortest_paths, DelayBounds, Link, Node, NodeKind, Path, Ranking, Topology,
};

/// Random connected graph: spanning tree over `n` nodes plus extra edges.
/// Delays come from a small integer palette so ties are common.
fn graph(n: usize, tree: &[usize], extra: &[(usize, usize)], delays: &[u8]) -> Topology {
    let nodes = (0..n)
        .map(|id| Node {
            id,
            kind: match id {
                0 => NodeKind::Du,
                1 => NodeKind::Core,
                2 => NodeKind::CuSite,
                _ => NodeKind::Router,
            },
            x_km: 0.0,
            y_km: 0.0,
        })
        .collect();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for v in 1..n {
        pairs.push((tree[v - 1] % v, v));
    }
    for &(a, b) in extra {
        let (a, b) = (a % n, b % n);
        if a != b
            && !pairs
                .iter()
                .any(|&(x, y)| (x, y) == (a, b) || (y, x) == (a, b))
        {
            pairs.push((a, b));
        }
    }
    let links = pairs
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let d = f64::from(delays[i % delays.len()] % 3 + 1);
            Link {
                a,
                b,
                capacity_mbps: 100.0,
                delay_us: 100.0 * d,
                length_km: f64::from(delays[(i + 1) % delays.len()] % 2),
            }
        })
        .collect();
    Topology::new(nodes, links).unwrap()
}

/// Every simple path by depth-first search.
fn all_simple_paths(t: &Topology, s: usize, d: usize) -> Vec<(Vec<usize>, f64, f64)> {
    fn go(
        t: &Topology,
        u: usize,
        d: usize,
        stack: &mut Vec<usize>,
        delay: f64,
        len: f64,
        out: &mut Vec<(Vec<usize>, f64, f64)>,
    ) {
        if u == d {
            out.push((stack.clone(), delay, len));
            return;
        }
        for &(v, l) in t.neighbours(u) {
            if stack.contains(&v) {
                continue;
            }
            let link = &t.links()[l];
            stack.push(v);
            go(
                t,
                v,
                d,
                stack,
                delay + link.delay_s(),
                len + link.length_km,
                out,
            );
            stack.pop();
        }
    }
    let mut out = Vec::new();
    go(t, s, d, &mut vec![s], 0.0, 0.0, &mut out);
    out
}

fn sorted_reference(t: &Topology, s: usize, d: usize) -> Vec<Vec<usize>> {
    // recompute sums in link order so the comparison sees identical floats
    let mut paths: Vec<(f64, f64, Vec<usize>)> = all_simple_paths(t, s, d)
        .into_iter()
        .map(|(nodes, _, _)| {
            let (mut de, mut le) = (0.0, 0.0);
            for w in nodes.windows(2) {
                let &(_, l) = t
                    .neighbours(w[0])
                    .iter()
                    .find(|&&(v, _)| v == w[1])
                    .unwrap();
                de += t.links()[l].delay_s();
                le += t.links()[l].length_km;
            }
            (de, le, nodes)
        })
        .collect();
    paths.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    paths.into_iter().map(|p| p.2).collect()
}

fn node_seqs(paths: &[Path]) -> Vec<Vec<usize>> {
    paths.iter().map(|p| p.nodes.clone()).collect()
}

#[test]
fn line_has_a_single_path() {
    let t = graph(3, &[0, 0], &[], &[1]);
    // tree: 0-1, 0-2 → DU 0 to core 1 directly
    let p = k_shortest_paths(&t, 0, 1, 2, Ranking::Delay);
    assert_eq!(p.len(), 1);
}

#[test]
fn unreachable_target_gives_empty_list() {
    let t = graph(3, &[0, 0], &[], &[1]);
    assert!(k_shortest_paths(&t, 0, 0, 3, Ranking::Delay).is_empty());
}

#[test]
fn pathset_counts_pairs() {
    let t = graph(6, &[0, 1, 2, 3, 4], &[(0, 2), (1, 5), (3, 0)], &[1, 2, 3]);
    let ps = build_pathsets(&t, 2, 10.0, Ranking::Delay, DelayBounds::default()).unwrap();
    assert_eq!(ps.num_dus(), 1);
    assert_eq!(ps.num_cus(), 1);
    for p in &ps.paths {
        assert!((p.path.cost - 10.0 * p.path.length_km).abs() < 1e-12);
    }
    let json = ps.to_json();
    let back: vran_core::net::PathSet = serde_json::from_str(&json).unwrap();
    assert_eq!(back, ps);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn unlimited_k_equals_exhaustive_enumeration(
        n in 3usize..=8,
        tree in prop::collection::vec(0usize..8, 7),
        extra in prop::collection::vec((0usize..8, 0usize..8), 0..10),
        delays in prop::collection::vec(0u8..6, 1..12),
        k in 1usize..6,
    ) {
        let t = graph(n, &tree, &extra, &delays);
        for target in [1, 2] {
            let reference = sorted_reference(&t, 0, target);
            let all = k_shortest_paths(&t, 0, target, usize::MAX, Ranking::Delay);
            prop_assert_eq!(node_seqs(&all), reference.clone());
            let top = k_shortest_paths(&t, 0, target, k, Ranking::Delay);
            prop_assert_eq!(node_seqs(&top), reference[..k.min(reference.len())].to_vec());
            for p in &top {
                let sum: f64 = p.links.iter().map(|&l| t.links()[l].delay_s()).sum();
                prop_assert!((sum - p.delay_s).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn class_flags_nest(
        n in 3usize..=8,
        tree in prop::collection::vec(0usize..8, 7),
        extra in prop::collection::vec((0usize..8, 0usize..8), 0..10),
        delays in prop::collection::vec(0u8..6, 1..12),
    ) {
        let t = graph(n, &tree, &extra, &delays);
        let bounds = DelayBounds { s1: 6e-4, s2: 3e-4, s3: 1.5e-4 };
        let ps = build_pathsets(&t, 4, 1.0, Ranking::Length, bounds).unwrap();
        for p in &ps.paths {
            prop_assert!(p.class.in_a <= p.class.in_b && p.class.in_b <= p.class.in_c);
        }
    }
}
