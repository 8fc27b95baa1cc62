mod common;

use mwis_core::generate::random_instance;
use mwis_core::io::{format_instance, parse_instance};
use mwis_core::oracle::brute_force_mwis;
use mwis_core::primal::{build_fusion, fuse, greedy_generate, Incumbent};
use mwis_core::scheduling::{feasibility_residuals, truncation_projection};
use mwis_core::ProblemInstance;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_proposals_are_independent(
        seed in any::<u64>(),
        n in 1usize..=40,
        density in 0.0f64..1.0,
    ) {
        let aug = random_instance(n, density, (1.0, 10.0), seed).augment().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scores: Vec<f64> = (0..aug.var_count()).map(|_| rng.gen_range(-2.0..0.0)).collect();
        let sol = greedy_generate(&aug, &scores, &mut rng);
        prop_assert!(sol.feasible);
        prop_assert!(aug.base().conflicting_edge(&sol.selected).is_none());
    }

    #[test]
    fn fusion_is_exact_and_monotone(seed in any::<u64>(), n in 2usize..=20, density in 0.1f64..0.8) {
        let inst = random_instance(n, density, (1.0, 10.0), seed);
        let aug = inst.augment().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let a = common::random_independent(&aug, &mut rng);
        let b = common::random_independent(&aug, &mut rng);
        let fused = fuse(&inst, &a, &b).unwrap();
        prop_assert!(fused.feasible);
        prop_assert!(fused.objective >= a.objective && fused.objective >= b.objective);
        let oracle = common::frozen_brute_force(&inst, &a, &b);
        prop_assert!((fused.objective - oracle).abs() <= 1e-9, "{} vs {}", fused.objective, oracle);
    }

    #[test]
    fn disagreement_graph_is_bipartite(seed in any::<u64>(), n in 2usize..=30) {
        let inst = random_instance(n, 0.4, (1.0, 10.0), seed);
        let aug = inst.augment().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = common::random_independent(&aug, &mut rng);
        let b = common::random_independent(&aug, &mut rng);
        let sub = build_fusion(&inst, &a, &b).unwrap();
        for &(u, v) in &sub.edges {
            prop_assert!(sub.side_a.contains(&u) && sub.side_b.contains(&v));
        }
    }

    #[test]
    fn incumbent_never_gets_worse(seed in any::<u64>(), n in 2usize..=30) {
        let inst = random_instance(n, 0.3, (1.0, 10.0), seed);
        let aug = inst.augment().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut incumbent = Incumbent::new();
        let mut previous = f64::NEG_INFINITY;
        for _ in 0..15 {
            let offer = common::random_independent(&aug, &mut rng);
            let value = incumbent.offer(&inst, offer.clone()).unwrap().objective;
            prop_assert!(value >= previous && value >= offer.objective);
            previous = value;
        }
        prop_assert_eq!(incumbent.rounds, 15);
    }

    #[test]
    fn dropping_nonpositive_nodes_keeps_the_optimum(seed in any::<u64>(), n in 1usize..=15) {
        let inst = random_instance(n, 0.4, (-5.0, 5.0), seed);
        let (stripped, mapping) = inst.strip_nonpositive();
        let full = brute_force_mwis(&inst).unwrap().objective;
        let reduced = brute_force_mwis(&stripped).unwrap();
        prop_assert!((full - reduced.objective).abs() <= 1e-12);
        let lifted: Vec<usize> = reduced.selected.iter().map(|&k| mapping[k]).collect();
        prop_assert!(inst.conflicting_edge(&lifted).is_none());
    }

    #[test]
    fn greedy_cover_is_valid_and_maximal(seed in any::<u64>(), n in 1usize..=40, density in 0.0f64..1.0) {
        let inst = random_instance(n, density, (1.0, 2.0), seed);
        prop_assert!(inst.validate().is_valid());
        for clique in inst.cliques() {
            let extendable = (0..n)
                .filter(|v| !clique.contains(v))
                .any(|v| clique.iter().all(|&u| inst.is_adjacent(u, v)));
            prop_assert!(!extendable, "clique {:?} is not maximal", clique);
        }
    }

    #[test]
    fn text_format_round_trips(seed in any::<u64>(), n in 0usize..=30, density in 0.0f64..0.6) {
        let inst = random_instance(n, density, (-3.0, 7.0), seed);
        let back = parse_instance(&format_instance(&inst)).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn projection_is_feasible_and_close(
        seed in any::<u64>(),
        n in 1usize..=25,
        values in prop::collection::vec(0.0f64..1.5, 128),
    ) {
        let aug = random_instance(n, 0.4, (1.0, 2.0), seed).augment().unwrap();
        let x: Vec<f64> = (0..aug.var_count()).map(|i| values[i % 128]).collect();
        let p = truncation_projection(&aug, &x);
        let worst_after = feasibility_residuals(&aug, &p.xhat).into_iter().fold(0.0, f64::max);
        prop_assert!(worst_after <= 1e-9);
        prop_assert!(p.xhat.iter().all(|&v| v >= 0.0));
        let eps = p.source_max_residual;
        for i in 0..aug.node_count() {
            prop_assert!((x[i] - p.xhat[i]).abs() <= eps + 1e-12);
        }
        // Outputs are fixed points.
        prop_assert_eq!(truncation_projection(&aug, &p.xhat).xhat, p.xhat);
    }
}

#[test]
fn projection_keeps_exactly_representable_feasible_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for seed in 0..200 {
        let aug = random_instance(12, 0.4, (1.0, 2.0), seed)
            .augment()
            .unwrap();
        // Nodes get multiples of 1/64 bounded by every clique's remaining room.
        let n = aug.node_count();
        let mut room = vec![64u32; aug.clique_count()];
        let mut x = vec![0.0; aug.var_count()];
        for i in 0..n {
            let cap = aug.incidence(i).iter().map(|&j| room[j]).min().unwrap();
            let units = rng.gen_range(0..=cap);
            x[i] = units as f64 / 64.0;
            for &j in aug.incidence(i) {
                room[j] -= units;
            }
        }
        for j in 0..aug.clique_count() {
            x[aug.slack(j)] = room[j] as f64 / 64.0;
        }
        assert_eq!(truncation_projection(&aug, &x).xhat, x, "seed {seed}");
    }
}

#[test]
fn example_one_optimum() {
    let sol = brute_force_mwis(&common::example_one()).unwrap();
    assert_eq!(sol.selected, vec![0, 4]);
    assert_eq!(sol.objective, 5.0);
    let k = common::complete(vec![1.0, 3.0, 2.0]);
    assert_eq!(brute_force_mwis(&k).unwrap().objective, 3.0);
    // A lone node has no edges to cover.
    let single = ProblemInstance::from_cliques(vec![1.0], vec![vec![0]]);
    assert!(single.validate().is_valid());
}
