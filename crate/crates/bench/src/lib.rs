//! Fixtures shared by the criterion benchmarks under `benches/`.

use epimit_core::dsir::DsirSystem;
use epimit_core::graph::gen_er;
use epimit_core::icsir::IcInstance;
use epimit_core::{rng, EdgeId, Graph};
use rand::Rng;

/// ER contact network with mean degree about 6.
pub fn contacts(n: usize, seed: u64) -> Graph {
    gen_er(n, 6.0 / n as f64, seed).expect("valid probability")
}

/// D-SIR system on both directions of every contact, with rates in the
/// ranges of the ER experiment, plus the contact groups `[2c, 2c + 1]`.
pub fn dsir_system(n: usize, seed: u64) -> (DsirSystem, Vec<Vec<EdgeId>>) {
    let g = contacts(n, seed);
    let mut r = rng::seeded(seed ^ 0x5eed);
    let mut directed = Graph::directed(n);
    let mut rates = Vec::new();
    for (_, u, v) in g.edges() {
        directed.add_edge(u, v).unwrap();
        directed.add_edge(v, u).unwrap();
        rates.push(r.gen_range(0.011..0.034));
        rates.push(r.gen_range(0.011..0.034));
    }
    let healing = (0..n).map(|_| r.gen_range(0.28..0.35)).collect();
    let x0 = (0..n).map(|v| if v < 5 { 0.85 } else { 0.0 }).collect();
    let sys = DsirSystem::new(directed, rates, healing, x0, vec![0.0; n]).expect("rates keep row sums below 1");
    let groups = (0..g.edge_count()).map(|c| vec![2 * c, 2 * c + 1]).collect();
    (sys, groups)
}

/// IC instance on the same kind of network, activation `p` everywhere,
/// five seeds and every contact a candidate.
pub fn ic_instance(n: usize, p: f64, seed: u64) -> IcInstance {
    let g = contacts(n, seed);
    let m = g.edge_count();
    let q = g.edge_ids();
    IcInstance::new(g, vec![p; m], (0..5).collect(), q).expect("valid instance")
}
