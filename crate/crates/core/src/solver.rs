//! End-to-end pipeline: preprocessing, the selected dual method with its
//! temperature schedule, projection, sparsity refresh, primal heuristic and
//! per-batch trace records.

use std::time::Instant;

use clap::ValueEnum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dual::{
    coordinate_fixed_point_tolerance, coordinate_sweep, dual_value, exp_domain_sweep,
    log_domain_sweep, smoothed_dual_value, DualState, SweepStats,
};
use crate::error::{MwisError, Result};
use crate::instance::{AugmentedInstance, ProblemInstance};
use crate::primal::{greedy_generate, Incumbent, IntegerSolution};
use crate::scheduling::{
    feasibility_residuals, feasibility_step, gap_step, relative_gap, truncation_projection,
    warm_start, warm_start_from, PrimalEstimate, ScheduleConfig, WarmStart,
};
use crate::sparsify::{accurate_thresholds, truncation_error, update_delta, ActiveSets};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Plain coordinate ascent on the non-smooth dual.
    DualNonsmooth,
    /// Smoothed updates in the log domain.
    LpLog,
    /// Smoothed updates in the stabilized exp domain.
    LpExp,
    /// Exp-domain dual plus the greedy/fusion primal heuristic.
    Ilp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scheduler {
    Feasibility,
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Truncation {
    None,
    Heuristic,
    Accurate,
}

/// Stabilization threshold used with accurate truncation.
pub const ACCURATE_TAU_STAB: f64 = 10.0;
/// Stabilization threshold otherwise, unless overridden.
pub const DEFAULT_TAU_STAB: f64 = 1e30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub scheduler: Scheduler,
    pub truncation: Truncation,
    pub schedule: ScheduleConfig,
    /// Ignored under accurate truncation, which always uses
    /// [`ACCURATE_TAU_STAB`].
    pub tau_stab: Option<f64>,
    pub seed: u64,
    /// Starting duals in input cost units, one per clique of the instance
    /// left after dropping non-positive-cost nodes. Zero when absent.
    pub initial_dual: Option<Vec<f64>>,
    pub max_sweeps: u64,
    pub wall_seconds: Option<f64>,
    /// Stop once the LP relative gap drops to this value (LP modes).
    pub target_gap: f64,
    /// ILP mode: LP relative gap at which proposals start.
    pub primal_start_gap: f64,
    /// ILP mode: proposals after the start before giving up.
    pub primal_rounds: usize,
    pub proposals_per_batch: usize,
    /// When false, trace records carry zero wall time so identical runs
    /// produce identical traces.
    pub record_timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::LpExp,
            scheduler: Scheduler::Gap,
            truncation: Truncation::None,
            schedule: ScheduleConfig::default(),
            tau_stab: None,
            seed: 0,
            initial_dual: None,
            max_sweeps: 1_000_000,
            wall_seconds: None,
            target_gap: 1e-3,
            primal_start_gap: 1e-3,
            primal_rounds: 50,
            proposals_per_batch: 1,
            record_timing: true,
        }
    }
}

impl RunConfig {
    pub fn effective_tau_stab(&self) -> f64 {
        match self.truncation {
            Truncation::Accurate => ACCURATE_TAU_STAB,
            _ => self.tau_stab.unwrap_or(DEFAULT_TAU_STAB),
        }
    }

    pub fn check(&self) -> Result<()> {
        self.schedule.check()?;
        let tau = self.effective_tau_stab();
        let bad = |what: &str| Err(MwisError::Precondition(what.to_string()));
        if !(tau >= 2.0) {
            return bad("tau_stab must be at least 2");
        }
        if !(self.target_gap >= 0.0) || !(self.primal_start_gap >= 0.0) {
            return bad("gap targets must be non-negative");
        }
        if self.max_sweeps == 0 {
            return bad("max_sweeps must be positive");
        }
        if matches!(self.wall_seconds, Some(w) if !(w > 0.0)) {
            return bad("wall limit must be positive");
        }
        if self.proposals_per_batch == 0 {
            return bad("proposals_per_batch must be positive");
        }
        Ok(())
    }
}

/// One record per batch of sweeps. Bounds are in the input's cost units;
/// the temperature is in the solver's internal, rescaled units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub sweep: u64,
    pub wall_ms: f64,
    pub temperature: f64,
    /// Best non-smooth dual bound so far.
    pub dual_bound: f64,
    /// Smoothed dual at the current temperature; absent in non-smooth mode.
    pub smoothed_dual: Option<f64>,
    /// Best projected primal LP value so far.
    pub primal_lp_bound: f64,
    pub best_integer: Option<f64>,
    pub relative_gap: f64,
    pub max_residual: f64,
    pub stabilizations: usize,
    pub active_fraction: f64,
    /// Accurate truncation only: measured error and its budget, both in
    /// internal units.
    pub truncation_error: Option<f64>,
    pub truncation_budget: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    TargetGap,
    FixedPoint,
    /// Integer solution proven optimal by the dual bound.
    Certified,
    RoundLimit,
    SweepLimit,
    WallLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: Status,
    pub dual_bound: f64,
    pub primal_lp_bound: f64,
    pub relative_gap: f64,
    /// Feasible fractional point behind `primal_lp_bound`, per input node.
    pub lp_estimate: Vec<f64>,
    /// Independent set over the input's node indices.
    pub solution: IntegerSolution,
    /// Duals behind `dual_bound`, in input cost units, one per clique of
    /// the instance left after dropping non-positive-cost nodes.
    pub lambda: Vec<f64>,
    pub sweeps: u64,
    pub temperature: f64,
    pub trace: Vec<TraceRecord>,
}

/// Numerical state of one run over the preprocessed instance.
struct Run<'a> {
    cfg: &'a RunConfig,
    input: &'a ProblemInstance,
    warm: WarmStart,
    unscaled: AugmentedInstance,
    state: DualState,
    active: Option<ActiveSets>,
    tau_stab: f64,
    sweeps: u64,
    started: Instant,
    best_dual: f64,
    best_lambda: Vec<f64>,
    best_primal: f64,
    best_estimate: Option<PrimalEstimate>,
    delta: f64,
    batch_start_smoothed: f64,
    trace: Vec<TraceRecord>,
}

struct BatchEval {
    smoothed: Option<f64>,
    estimate: PrimalEstimate,
    residuals: Vec<f64>,
    truncation: Option<(f64, f64)>,
}

/// Solves `instance` under `cfg`.
pub fn solve(instance: &ProblemInstance, cfg: &RunConfig) -> Result<SolveOutcome> {
    cfg.check()?;
    let report = instance.validate();
    if !report.is_valid() {
        return Err(MwisError::InvalidInstance(report));
    }
    let (stripped, mapping) = instance.strip_nonpositive();
    if stripped.node_count() == 0 {
        return Ok(trivial_outcome(instance));
    }
    let original = stripped.augment()?.with_original_index(mapping);
    let warm = match &cfg.initial_dual {
        None => warm_start(&original),
        Some(lambda) if lambda.len() == original.clique_count() => {
            warm_start_from(&original, lambda.clone())
        }
        Some(lambda) => {
            return Err(MwisError::Precondition(format!(
                "initial dual has {} entries for {} cliques",
                lambda.len(),
                original.clique_count()
            )))
        }
    };
    let aug = warm.instance.clone();
    let tau_stab = cfg.effective_tau_stab();

    let mut state = DualState::new(&aug, cfg.schedule.initial_temperature);
    let exp_domain = matches!(cfg.mode, Mode::LpExp | Mode::Ilp);
    if exp_domain {
        state.materialize(&aug);
    }
    let active = match (exp_domain, cfg.truncation) {
        (false, _) | (_, Truncation::None) => None,
        (true, Truncation::Heuristic) => Some(ActiveSets::heuristic(&aug, &state.x)),
        (true, Truncation::Accurate) => {
            let thresholds = accurate_thresholds(&aug, state.temperature, tau_stab, 0.0);
            Some(ActiveSets::accurate(&aug, &state.x, thresholds))
        }
    };

    let mut run = Run {
        cfg,
        input: instance,
        best_dual: f64::INFINITY,
        best_lambda: warm.lambda.clone(),
        best_primal: f64::NEG_INFINITY,
        best_estimate: None,
        delta: 0.0,
        batch_start_smoothed: smoothed_dual_value(&aug, &state.lambda, state.temperature),
        warm,
        unscaled: original,
        state,
        active,
        tau_stab,
        // The warm-start sweep counts.
        sweeps: 1,
        started: Instant::now(),
        trace: Vec::new(),
    };
    run.execute(&aug)
}

fn trivial_outcome(instance: &ProblemInstance) -> SolveOutcome {
    SolveOutcome {
        status: Status::Certified,
        dual_bound: 0.0,
        primal_lp_bound: 0.0,
        relative_gap: 0.0,
        lp_estimate: vec![0.0; instance.node_count()],
        solution: IntegerSolution::empty(),
        lambda: Vec::new(),
        sweeps: 0,
        temperature: 0.0,
        trace: Vec::new(),
    }
}

impl Run<'_> {
    fn execute(&mut self, aug: &AugmentedInstance) -> Result<SolveOutcome> {
        let cfg = self.cfg;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut incumbent = Incumbent::new();
        let mut primal_started = false;
        let fixed_point_tol = coordinate_fixed_point_tolerance(aug);

        let status = loop {
            let mut batch = SweepStats::default();
            let mut fixed_point = false;
            let mut sweep_limit = false;
            for _ in 0..cfg.schedule.tau_batch {
                if self.sweeps >= cfg.max_sweeps {
                    sweep_limit = true;
                    break;
                }
                let stats = self.sweep(aug);
                self.sweeps += 1;
                batch.max_residual = batch.max_residual.max(stats.max_residual);
                batch.max_change = batch.max_change.max(stats.max_change);
                batch.stabilizations += stats.stabilizations;
                if cfg.mode == Mode::DualNonsmooth && stats.max_change <= fixed_point_tol {
                    fixed_point = true;
                    break;
                }
            }

            let eval = self.evaluate(aug)?;
            let gap = relative_gap(self.best_dual, self.best_primal);

            if cfg.mode == Mode::Ilp && (primal_started || gap <= cfg.primal_start_gap) {
                primal_started = true;
                for _ in 0..cfg.proposals_per_batch {
                    let proposal = greedy_generate(aug, &self.state.reduced, &mut rng);
                    incumbent.offer(aug.base(), proposal)?;
                }
            }

            self.push_trace(&eval, &batch, gap, incumbent.objective());

            let wall_hit = cfg
                .wall_seconds
                .is_some_and(|w| self.started.elapsed().as_secs_f64() >= w);
            let stop = match cfg.mode {
                Mode::Ilp => {
                    let certified = incumbent.objective().is_some_and(|v| {
                        self.best_dual - v <= 1e-9 * self.best_dual.abs().max(1.0)
                    });
                    if certified {
                        Some(Status::Certified)
                    } else if primal_started && incumbent.rounds >= cfg.primal_rounds {
                        Some(Status::RoundLimit)
                    } else {
                        None
                    }
                }
                _ if fixed_point => Some(Status::FixedPoint),
                _ if gap <= cfg.target_gap => Some(Status::TargetGap),
                _ => None,
            };
            let stop = stop
                .or(sweep_limit.then_some(Status::SweepLimit))
                .or((self.sweeps >= cfg.max_sweeps).then_some(Status::SweepLimit))
                .or(wall_hit.then_some(Status::WallLimit));
            if let Some(status) = stop {
                break status;
            }

            self.advance_schedule(aug, &eval)?;
        };

        let solution = self.final_solution(aug, &mut rng, incumbent)?;
        self.verify_bound()?;
        let estimate = self
            .best_estimate
            .take()
            .expect("at least one batch was evaluated");
        let mut lp_estimate = vec![0.0; self.input.node_count()];
        for (k, &orig) in self.unscaled.original_index().iter().enumerate() {
            lp_estimate[orig] = estimate.xhat[k];
        }
        Ok(SolveOutcome {
            status,
            dual_bound: self.best_dual,
            primal_lp_bound: self.best_primal,
            relative_gap: relative_gap(self.best_dual, self.best_primal),
            lp_estimate,
            solution,
            lambda: self.best_lambda.clone(),
            sweeps: self.sweeps,
            temperature: self.state.temperature,
            trace: std::mem::take(&mut self.trace),
        })
    }

    fn sweep(&mut self, aug: &AugmentedInstance) -> SweepStats {
        match self.cfg.mode {
            Mode::DualNonsmooth => {
                let change = coordinate_sweep(&mut self.state, aug);
                SweepStats {
                    max_change: change,
                    ..SweepStats::default()
                }
            }
            Mode::LpLog => log_domain_sweep(&mut self.state, aug),
            Mode::LpExp | Mode::Ilp => {
                exp_domain_sweep(&mut self.state, aug, self.tau_stab, self.active.as_mut())
            }
        }
    }

    /// Batch-end bookkeeping: measure truncation error, fold and rebuild the
    /// iterate from scratch, project, and update the best bounds.
    fn evaluate(&mut self, aug: &AugmentedInstance) -> Result<BatchEval> {
        let truncation = match (&self.active, self.cfg.truncation) {
            (Some(sets), Truncation::Accurate) => {
                Some((truncation_error(aug, &self.state, sets), self.delta))
            }
            _ => None,
        };
        self.state.fold_alpha(aug);
        self.state.recompute_reduced(aug);
        let t = self.state.temperature;

        let (x, smoothed) = match self.cfg.mode {
            Mode::DualNonsmooth => {
                let tol = coordinate_fixed_point_tolerance(aug);
                let x: Vec<f64> = self
                    .state
                    .reduced
                    .iter()
                    .map(|&c| if c >= -tol { 1.0 } else { 0.0 })
                    .collect();
                (x, None)
            }
            Mode::LpLog => (
                self.state.primal_iterate(aug),
                Some(smoothed_dual_value(aug, &self.state.lambda, t)),
            ),
            Mode::LpExp | Mode::Ilp => {
                self.state.materialize(aug);
                if let Some(sets) = self.active.as_mut() {
                    sets.refresh(aug, &self.state.x);
                }
                (
                    self.state.x.clone(),
                    Some(smoothed_dual_value(aug, &self.state.lambda, t)),
                )
            }
        };
        let residuals = feasibility_residuals(aug, &x);
        let estimate = truncation_projection(aug, &x);
        if !estimate.xhat.iter().all(|v| v.is_finite()) {
            return Err(MwisError::Inconsistency("non-finite primal iterate".into()));
        }

        let dual = aug.unscale(dual_value(aug, &self.state.lambda));
        if dual < self.best_dual {
            self.best_dual = dual;
            self.best_lambda = self.warm.unscale_lambda(&self.state.lambda);
        }
        let primal = aug.unscale(estimate.objective);
        if primal > self.best_primal || self.best_estimate.is_none() {
            self.best_primal = primal.max(self.best_primal);
            self.best_estimate = Some(estimate.clone());
        }
        let slack = 1e-9 * self.best_dual.abs().max(1.0);
        if self.best_primal > self.best_dual + slack {
            return Err(MwisError::Inconsistency(format!(
                "primal LP value {} exceeds dual bound {}",
                self.best_primal, self.best_dual
            )));
        }
        Ok(BatchEval {
            smoothed,
            estimate,
            residuals,
            truncation,
        })
    }

    fn push_trace(
        &mut self,
        eval: &BatchEval,
        batch: &SweepStats,
        gap: f64,
        best_integer: Option<f64>,
    ) {
        let aug_scale = self.warm.instance.scale_factor();
        let offset = self.warm.instance.offset();
        let max_residual = eval.residuals.iter().fold(0.0_f64, |m, &r| m.max(r));
        let wall_ms = if self.cfg.record_timing {
            self.started.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        self.trace.push(TraceRecord {
            sweep: self.sweeps,
            wall_ms,
            temperature: self.state.temperature,
            dual_bound: self.best_dual,
            smoothed_dual: eval.smoothed.map(|d| aug_scale * d + offset),
            primal_lp_bound: self.best_primal,
            best_integer,
            relative_gap: gap,
            max_residual,
            stabilizations: batch.stabilizations,
            active_fraction: self
                .active
                .as_ref()
                .map_or(1.0, ActiveSets::active_fraction),
            truncation_error: eval.truncation.map(|(e, _)| e),
            truncation_budget: eval.truncation.map(|(_, d)| d),
        });
    }

    /// Temperature update and, under accurate truncation, a new error budget.
    fn advance_schedule(&mut self, aug: &AugmentedInstance, eval: &BatchEval) -> Result<()> {
        let Some(smoothed) = eval.smoothed else {
            return Ok(());
        };
        let cfg = &self.cfg.schedule;
        let t = self.state.temperature;
        let next = match self.cfg.scheduler {
            Scheduler::Feasibility => feasibility_step(t, &eval.residuals, cfg),
            Scheduler::Gap => {
                gap_step(
                    t,
                    smoothed,
                    eval.estimate.objective,
                    eval.estimate.entropy,
                    cfg,
                )?
                .temperature
            }
        };
        if next < t {
            self.state.set_temperature(aug, next);
        }

        let improvement = self.batch_start_smoothed - smoothed;
        self.batch_start_smoothed =
            smoothed_dual_value(aug, &self.state.lambda, self.state.temperature);
        if let (Some(sets), Truncation::Accurate) = (self.active.as_mut(), self.cfg.truncation) {
            self.delta = update_delta(improvement);
            sets.set_thresholds(accurate_thresholds(
                aug,
                self.state.temperature,
                self.tau_stab,
                self.delta,
            ));
            sets.refresh(aug, &self.state.x);
        } else if let Some(sets) = self.active.as_mut() {
            sets.refresh(aug, &self.state.x);
        }
        Ok(())
    }

    /// ILP mode keeps its incumbent; other modes get one greedy proposal from
    /// the final reduced costs. The result is mapped to input indices.
    fn final_solution(
        &self,
        aug: &AugmentedInstance,
        rng: &mut ChaCha8Rng,
        mut incumbent: Incumbent,
    ) -> Result<IntegerSolution> {
        if incumbent.best().is_none() {
            let proposal = greedy_generate(aug, &self.state.reduced, rng);
            incumbent.offer(aug.base(), proposal)?;
        }
        let local = incumbent.best().expect("offered above");
        let mapping = self.unscaled.original_index();
        Ok(IntegerSolution::evaluate(
            self.input,
            local.selected.iter().map(|&i| mapping[i]),
        ))
    }

    /// The best bound must match a from-scratch evaluation with duals in the
    /// input's cost units.
    fn verify_bound(&self) -> Result<()> {
        let direct = dual_value(&self.unscaled, &self.best_lambda);
        let tol = 1e-6 * direct.abs().max(1.0);
        if (direct - self.best_dual).abs() > tol {
            return Err(MwisError::Inconsistency(format!(
                "reported dual bound {} differs from direct evaluation {direct}",
                self.best_dual
            )));
        }
        Ok(())
    }
}
