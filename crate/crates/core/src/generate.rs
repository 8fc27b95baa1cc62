//! Seeded random instances for tests and benchmarks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::instance::ProblemInstance;

/// Erdős–Rényi graph on `n` nodes with edge probability `edge_density`,
/// costs drawn uniformly from `cost_range`, and a greedy maximal clique
/// cover. Identical arguments give identical instances.
pub fn random_instance(
    n: usize,
    edge_density: f64,
    cost_range: (f64, f64),
    seed: u64,
) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = cost_range;
    let costs: Vec<f64> = (0..n)
        .map(|_| if hi > lo { rng.gen_range(lo..hi) } else { lo })
        .collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(edge_density.clamp(0.0, 1.0)) {
                edges.push((u, v));
            }
        }
    }
    ProblemInstance::from_edges(costs, edges).greedy_clique_cover(seed)
}
