#![allow(dead_code)]

use mwis_core::oracle::brute_force_mwis;
use mwis_core::primal::{greedy_generate, IntegerSolution};
use mwis_core::{AugmentedInstance, ProblemInstance};
use rand::Rng;

/// The five-node example with costs (3, 2, 4, 2, 2) whose cover ends in a
/// non-tight fixed point of coordinate ascent.
pub fn example_one() -> ProblemInstance {
    ProblemInstance::from_cliques(
        vec![3.0, 2.0, 4.0, 2.0, 2.0],
        vec![
            vec![0, 1],
            vec![1, 2],
            vec![2, 0],
            vec![0, 2, 3],
            vec![3, 4],
            vec![4, 2],
        ],
    )
}

pub fn complete(costs: Vec<f64>) -> ProblemInstance {
    let n = costs.len();
    ProblemInstance::from_cliques(costs, vec![(0..n).collect()])
}

/// Random independent set: greedy proposal under random scores.
pub fn random_independent<R: Rng>(aug: &AugmentedInstance, rng: &mut R) -> IntegerSolution {
    let scores: Vec<f64> = (0..aug.var_count())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    greedy_generate(aug, &scores, rng)
}

/// Best recombination of `a` and `b` by enumeration: nodes both inputs
/// select are kept, nodes neither selects stay out, the rest is searched
/// exhaustively.
pub fn frozen_brute_force(
    instance: &ProblemInstance,
    a: &IntegerSolution,
    b: &IntegerSolution,
) -> f64 {
    let free: Vec<usize> = (0..instance.node_count())
        .filter(|&i| a.contains(i) != b.contains(i))
        .collect();
    let fixed: f64 = a
        .selected
        .iter()
        .filter(|&&i| b.contains(i))
        .map(|&i| instance.costs()[i])
        .sum();
    let local = |v: usize| free.iter().position(|&u| u == v);
    let mut edges = Vec::new();
    for (k, &u) in free.iter().enumerate() {
        for &v in instance.neighbors(u) {
            if let Some(l) = local(v) {
                if k < l {
                    edges.push((k, l));
                }
            }
        }
    }
    let costs = free.iter().map(|&i| instance.costs()[i]).collect();
    let sub = ProblemInstance::from_edges(costs, edges);
    fixed + brute_force_mwis(&sub).unwrap().objective
}
