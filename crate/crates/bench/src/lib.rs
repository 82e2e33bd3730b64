//! Shared fixtures for the criterion benchmarks.

use chanaccess_core::channels::{ChannelModel, DEFAULT_RATE_TABLE_KBPS};
use chanaccess_core::graph::{generate_random_network, ExtendedGraph};
use chanaccess_core::mwis::WeightMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A seeded random instance: the extended graph plus positive weights.
pub fn weighted_instance(n: usize, m: usize, degree: f64, seed: u64) -> (ExtendedGraph, WeightMap) {
    let g = generate_random_network(n, m, degree, seed, false).expect("instance generates");
    let h = ExtendedGraph::from_conflict_graph(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let weights = WeightMap::new(
        (0..h.num_vertices())
            .map(|_| rng.gen_range(0.01..1.0))
            .collect(),
    )
    .expect("weights in range");
    (h, weights)
}

/// A seeded channel model matching an `n × m` instance.
pub fn channel_model(n: usize, m: usize, sigma: f64, seed: u64) -> ChannelModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xcafe);
    ChannelModel::with_random_assignment(
        n,
        m,
        DEFAULT_RATE_TABLE_KBPS.to_vec(),
        sigma,
        1350.0,
        &mut rng,
    )
    .expect("model builds")
}
