mod common;

use mwis_core::dual::dual_value;
use mwis_core::generate::random_instance;
use mwis_core::oracle::brute_force_mwis;
use mwis_core::{solve, Mode, MwisError, RunConfig, Scheduler, Status, Truncation};

fn lp(mode: Mode, target_gap: f64) -> RunConfig {
    RunConfig {
        mode,
        scheduler: Scheduler::Gap,
        target_gap,
        record_timing: false,
        ..RunConfig::default()
    }
}

#[test]
fn trace_invariants_hold() {
    for seed in 0..6 {
        let inst = random_instance(40, 0.2, (1.0, 10.0), seed);
        for (mode, scheduler) in [
            (Mode::LpExp, Scheduler::Gap),
            (Mode::LpLog, Scheduler::Feasibility),
            (Mode::Ilp, Scheduler::Gap),
        ] {
            let cfg = RunConfig {
                scheduler,
                primal_rounds: 10,
                ..lp(mode, 1e-4)
            };
            let out = solve(&inst, &cfg).unwrap();
            assert!(!out.trace.is_empty());
            for pair in out.trace.windows(2) {
                let (a, b) = (&pair[0], &pair[1]);
                assert!(
                    b.temperature <= a.temperature,
                    "seed {seed}: temperature rose"
                );
                assert!(b.dual_bound <= a.dual_bound);
                assert!(b.primal_lp_bound >= a.primal_lp_bound);
                if let (Some(x), Some(y)) = (a.best_integer, b.best_integer) {
                    assert!(y >= x, "seed {seed}: incumbent got worse");
                }
                if a.temperature == b.temperature {
                    let (x, y) = (a.smoothed_dual.unwrap(), b.smoothed_dual.unwrap());
                    assert!(
                        y <= x + 1e-9 * x.abs().max(1.0),
                        "seed {seed} {mode:?}: {x} -> {y}"
                    );
                }
            }
            for r in &out.trace {
                assert!(r.primal_lp_bound <= r.dual_bound + 1e-9 * r.dual_bound.abs().max(1.0));
            }
        }
    }
}

#[test]
fn traces_are_reproducible_without_timing() {
    let inst = random_instance(60, 0.1, (1.0, 10.0), 3);
    let cfg = RunConfig {
        seed: 11,
        primal_rounds: 5,
        ..lp(Mode::Ilp, 1e-3)
    };
    let render = |cfg: &RunConfig| {
        let out = solve(&inst, cfg).unwrap();
        serde_json::to_string(&out.trace).unwrap()
    };
    assert_eq!(render(&cfg), render(&cfg));
}

#[test]
fn reported_duals_reproduce_the_bound() {
    for seed in 0..8 {
        let inst = random_instance(30, 0.25, (-2.0, 10.0), seed);
        let out = solve(&inst, &lp(Mode::LpExp, 1e-4)).unwrap();
        let (stripped, _) = inst.strip_nonpositive();
        let recomputed = dual_value(&stripped.augment().unwrap(), &out.lambda);
        assert!(
            (recomputed - out.dual_bound).abs() <= 1e-6 * out.dual_bound.abs().max(1.0),
            "seed {seed}: {recomputed} vs {}",
            out.dual_bound
        );
        assert_eq!(out.lp_estimate.len(), inst.node_count());
    }
}

#[test]
fn integer_optimum_is_sandwiched() {
    for seed in 0..30 {
        let inst = random_instance(14, 0.4, (1.0, 10.0), seed);
        let optimum = brute_force_mwis(&inst).unwrap().objective;
        let out = solve(&inst, &lp(Mode::Ilp, 1e-3)).unwrap();
        assert!(out.solution.feasible);
        assert!(out.solution.objective <= optimum + 1e-9);
        assert!(optimum <= out.dual_bound + 1e-9, "seed {seed}");
    }
}

#[test]
fn log_and_exp_modes_agree() {
    for seed in 0..5 {
        let inst = random_instance(50, 0.15, (1.0, 10.0), seed);
        let a = solve(&inst, &lp(Mode::LpLog, 1e-5)).unwrap();
        let b = solve(&inst, &lp(Mode::LpExp, 1e-5)).unwrap();
        assert_eq!((a.status, b.status), (Status::TargetGap, Status::TargetGap));
        // Both brackets contain the LP optimum.
        assert!(a.primal_lp_bound <= b.dual_bound + 1e-9);
        assert!(b.primal_lp_bound <= a.dual_bound + 1e-9);
        assert!((a.dual_bound - b.dual_bound).abs() <= 2e-5 * a.dual_bound);
    }
}

#[test]
fn truncation_keeps_the_bracket() {
    for seed in 0..5 {
        let inst = random_instance(80, 0.1, (1.0, 10.0), seed);
        let exact = solve(&inst, &lp(Mode::LpExp, 1e-5)).unwrap();
        for truncation in [Truncation::Heuristic, Truncation::Accurate] {
            let cfg = RunConfig {
                truncation,
                ..lp(Mode::LpExp, 1e-5)
            };
            let out = solve(&inst, &cfg).unwrap();
            assert_eq!(out.status, Status::TargetGap, "{truncation:?}");
            let rel = (out.dual_bound - exact.dual_bound).abs() / exact.dual_bound;
            assert!(rel <= 1e-4, "seed {seed} {truncation:?}: {rel}");
            assert!(out.primal_lp_bound <= exact.dual_bound + 1e-9);
        }
    }
}

#[test]
fn clique_cover_is_at_least_as_tight_as_edge_cover() {
    for seed in 0..10 {
        let inst = random_instance(20, 0.4, (1.0, 10.0), seed);
        let edges = inst.edge_cover();
        let a = solve(&inst, &lp(Mode::LpExp, 1e-4)).unwrap();
        let b = solve(&edges, &lp(Mode::LpExp, 1e-4)).unwrap();
        assert!(a.dual_bound <= b.dual_bound + 1e-6, "seed {seed}");
    }
}

#[test]
fn nonsmooth_mode_stops_at_a_fixed_point() {
    let out = solve(
        &common::example_one(),
        &RunConfig {
            mode: Mode::DualNonsmooth,
            initial_dual: Some(vec![1.0; 6]),
            record_timing: false,
            ..RunConfig::default()
        },
    )
    .unwrap();
    assert_eq!(out.status, Status::FixedPoint);
    assert!((out.dual_bound - 6.0).abs() < 1e-9);
}

#[test]
fn bad_inputs_are_rejected() {
    let inst = common::example_one();
    let cfg = RunConfig {
        initial_dual: Some(vec![0.0; 2]),
        ..RunConfig::default()
    };
    assert!(matches!(
        solve(&inst, &cfg),
        Err(MwisError::Precondition(_))
    ));
    let uncovered =
        mwis_core::ProblemInstance::new(vec![1.0, 1.0], vec![(0, 1)], vec![vec![0], vec![1]]);
    assert!(matches!(
        solve(&uncovered, &RunConfig::default()),
        Err(MwisError::InvalidInstance(_))
    ));
    let cfg = RunConfig {
        tau_stab: Some(1.5),
        ..RunConfig::default()
    };
    assert!(solve(&inst, &cfg).is_err());
}

#[test]
fn all_nonpositive_instances_are_trivial() {
    let inst = random_instance(10, 0.5, (-3.0, 0.0), 1);
    let out = solve(&inst, &RunConfig::default()).unwrap();
    assert_eq!(out.dual_bound, 0.0);
    assert!(out.solution.selected.is_empty());
}
