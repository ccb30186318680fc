//! Hand-built and seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vran_core::instance::{Instance, InstanceConfig, PerNode};
use vran_core::net::{Link, Node, NodeKind, Topology};
use vran_core::scenario::{generate, GenSpec};

pub fn node(id: usize, kind: NodeKind) -> Node {
    Node {
        id,
        kind,
        x_km: id as f64,
        y_km: 0.0,
    }
}

pub fn link(a: usize, b: usize, capacity_mbps: f64, length_km: f64, delay_us: f64) -> Link {
    Link {
        a,
        b,
        capacity_mbps,
        delay_us,
        length_km,
    }
}

pub fn instance(nodes: Vec<Node>, links: Vec<Link>, tweak: impl FnOnce(&mut InstanceConfig)) -> Instance {
    let topo = Topology::new(nodes, links).expect("fixture topology");
    let mut config = InstanceConfig::default();
    tweak(&mut config);
    Instance::build(config, topo).expect("fixture instance")
}

/// Core 0, DU 1, CU site 2 and router 3. The DU reaches the CU directly
/// (1 km) or through the router (2 km); the CU and the DU both link to the core.
pub fn two_path(direct_cap: f64, tweak: impl FnOnce(&mut InstanceConfig)) -> Instance {
    let nodes = vec![
        node(0, NodeKind::Core),
        node(1, NodeKind::Du),
        node(2, NodeKind::CuSite),
        node(3, NodeKind::Router),
    ];
    let links = vec![
        link(1, 2, direct_cap, 1.0, 10.0),
        link(1, 3, 1e5, 1.0, 10.0),
        link(3, 2, 1e5, 1.0, 10.0),
        link(2, 0, 1e5, 1.0, 10.0),
        link(1, 0, 1e5, 5.0, 10.0),
    ];
    instance(nodes, links, |c| {
        c.paths.k = 2;
        tweak(c)
    })
}

/// Seeded random instance of the agreement suite: `n` DUs, `m` CU sites,
/// `k` paths per pair, with varied prices, capacities and delay limits.
pub fn random_small(seed: u64, n: usize, m: usize, k: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0000);
    let spec = GenSpec {
        seed,
        dus: n,
        cus: m,
        routers: rng.gen_range(1..=3),
        side_km: rng.gen_range(5.0..40.0),
        radius_km: rng.gen_range(6.0..15.0),
        cap_min_mbps: 1_000.0,
        cap_max_mbps: 8_000.0,
        ..GenSpec::default()
    };
    let topo = generate(&spec).expect("generator spec is valid");
    let mut config = InstanceConfig::default();
    config.paths.k = k;
    config.demand.lambda = PerNode::Values((0..n).map(|_| rng.gen_range(50.0..250.0)).collect());
    config.compute.h_du_rc = PerNode::Values((0..n).map(|_| [1.5, 2.0, 3.0][rng.gen_range(0..3)]).collect());
    config.compute.h_cu_rc = PerNode::Values((0..m).map(|_| [0.0, 1.0, 2.0, 75.0][rng.gen_range(0..4)]).collect());
    config.costs.omega = PerNode::Values((0..m).map(|_| rng.gen_range(0.0..0.6)).collect());
    config.costs.c_d = [0.01, 0.1, 1.0, 10.0][rng.gen_range(0..4)];
    config.paths.delay_bounds.s2 = [2e-3, 0.15e-3][rng.gen_range(0..2)];
    config.paths.delay_bounds.s3 = [0.25e-3, 0.1e-3][rng.gen_range(0..2)];
    Instance::build(config, topo).expect("random instance is valid")
}

/// The `(seed, n, m, k)` grid of the agreement suite: 60 instances.
pub fn agreement_suite() -> Vec<(u64, usize, usize, usize)> {
    let mut out = Vec::new();
    let mut seed = 0;
    for n in [2, 3, 4] {
        for m in [1, 2] {
            for k in [1, 2] {
                for _ in 0..5 {
                    out.push((seed, n, m, k));
                    seed += 1;
                }
            }
        }
    }
    out
}
