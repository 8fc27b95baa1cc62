//! Desk-scale ablations: temperature schedulers and the cost vector fed to
//! the greedy generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dual::reduced_costs;
use crate::error::Result;
use crate::generate::random_instance;
use crate::instance::ProblemInstance;
use crate::primal::{greedy_generate, Incumbent};
use crate::solver::{solve, Mode, RunConfig, Scheduler, Status};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub seed: u64,
    /// Sweeps to reach the target gap; `None` when the sweep cap hit first.
    pub feasibility_sweeps: Option<u64>,
    pub gap_sweeps: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchedulerAblation {
    pub target_gap: f64,
    pub sweep_cap: u64,
    pub rows: Vec<AblationRow>,
    /// Medians with capped runs counted at the cap.
    pub median_feasibility: f64,
    pub median_gap: f64,
}

/// Parameters of the seeded family used by [`scheduler_ablation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Family {
    pub n: usize,
    pub edge_density: f64,
    pub cost_range: (f64, f64),
    pub seeds: u64,
}

/// Sweeps to `target_gap` under both schedulers, exp domain, no truncation.
pub fn scheduler_ablation(
    family: Family,
    target_gap: f64,
    sweep_cap: u64,
) -> Result<SchedulerAblation> {
    let mut rows = Vec::new();
    for seed in 0..family.seeds {
        let inst = random_instance(family.n, family.edge_density, family.cost_range, seed);
        let run = |scheduler| -> Result<Option<u64>> {
            let cfg = RunConfig {
                mode: Mode::LpExp,
                scheduler,
                target_gap,
                max_sweeps: sweep_cap,
                seed,
                record_timing: false,
                ..RunConfig::default()
            };
            let out = solve(&inst, &cfg)?;
            Ok((out.status == Status::TargetGap).then_some(out.sweeps))
        };
        rows.push(AblationRow {
            seed,
            feasibility_sweeps: run(Scheduler::Feasibility)?,
            gap_sweeps: run(Scheduler::Gap)?,
        });
    }
    let censored = |v: Option<u64>| v.unwrap_or(sweep_cap) as f64;
    let median_feasibility = median(
        rows.iter()
            .map(|r| censored(r.feasibility_sweeps))
            .collect(),
    );
    let median_gap = median(rows.iter().map(|r| censored(r.gap_sweeps)).collect());
    Ok(SchedulerAblation {
        target_gap,
        sweep_cap,
        rows,
        median_feasibility,
        median_gap,
    })
}

fn median(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Incumbent objective after each heuristic round, driven by the original
/// costs and by reduced costs of a converged LP dual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuidanceAblation {
    pub dual_bound: f64,
    pub original_costs: Vec<f64>,
    pub reduced_costs: Vec<f64>,
}

pub fn guidance_ablation(
    instance: &ProblemInstance,
    rounds: usize,
    seed: u64,
) -> Result<GuidanceAblation> {
    let cfg = RunConfig {
        mode: Mode::LpExp,
        seed,
        record_timing: false,
        ..RunConfig::default()
    };
    let outcome = solve(instance, &cfg)?;
    let (stripped, _) = instance.strip_nonpositive();
    if stripped.node_count() == 0 {
        return Ok(GuidanceAblation {
            dual_bound: 0.0,
            original_costs: vec![0.0; rounds],
            reduced_costs: vec![0.0; rounds],
        });
    }
    let aug = stripped.augment()?;
    let guided = reduced_costs(&aug, &outcome.lambda);

    let curve = |costs: &[f64]| -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut incumbent = Incumbent::new();
        let mut values = Vec::with_capacity(rounds);
        for _ in 0..rounds {
            let proposal = greedy_generate(&aug, costs, &mut rng);
            values.push(incumbent.offer(aug.base(), proposal)?.objective);
        }
        Ok(values)
    };
    Ok(GuidanceAblation {
        dual_bound: outcome.dual_bound,
        original_costs: curve(aug.costs())?,
        reduced_costs: curve(&guided)?,
    })
}
