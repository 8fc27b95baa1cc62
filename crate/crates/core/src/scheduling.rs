//! Temperature control, feasibility residuals and the truncation projection
//! that turns any non-negative primal iterate into a feasible point.

use serde::{Deserialize, Serialize};

use crate::dual::{coordinate_sweep, DualState};
use crate::error::{MwisError, Result};
use crate::instance::AugmentedInstance;

/// Parameters shared by both temperature schedulers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub initial_temperature: f64,
    /// Sweeps between two schedule checks.
    pub tau_batch: u64,
    pub tau_drop: f64,
    pub tau_feas: f64,
    pub tau_gap: f64,
    pub temperature_floor: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            initial_temperature: 0.01,
            tau_batch: 50,
            tau_drop: 0.5,
            tau_feas: 0.01,
            tau_gap: 0.5,
            temperature_floor: 1e-9,
        }
    }
}

impl ScheduleConfig {
    pub fn check(&self) -> Result<()> {
        let ok = self.initial_temperature > 0.0
            && self.tau_batch > 0
            && self.tau_drop > 0.0
            && self.tau_drop < 1.0
            && self.tau_feas >= 0.0
            && self.tau_gap > 0.0
            && self.tau_gap < 1.0
            && self.temperature_floor > 0.0;
        if ok {
            Ok(())
        } else {
            Err(MwisError::Precondition(format!(
                "schedule parameters out of range: {self:?}"
            )))
        }
    }
}

/// `|sum_{i in K_j} x_i - 1|` per clique.
pub fn feasibility_residuals(aug: &AugmentedInstance, x: &[f64]) -> Vec<f64> {
    aug.cliques()
        .iter()
        .map(|k| (k.iter().map(|&i| x[i]).sum::<f64>() - 1.0).abs())
        .collect()
}

/// Feasibility-based schedule: drop the temperature by `tau_drop` once every
/// clique constraint holds to within `tau_feas`.
pub fn feasibility_step(temperature: f64, residuals: &[f64], cfg: &ScheduleConfig) -> f64 {
    let worst = residuals.iter().fold(0.0_f64, |m, &r| m.max(r));
    if worst <= cfg.tau_feas {
        (cfg.tau_drop * temperature).max(cfg.temperature_floor)
    } else {
        temperature
    }
}

/// Outcome of one duality-gap schedule step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapStep {
    pub temperature: f64,
    /// Set when the gap no longer supports a temperature above the floor.
    pub exhausted: bool,
}

/// Duality-gap schedule: `T = min(T, tau_gap (D^T - <c, xhat>) / H(xhat))`.
pub fn gap_step(
    temperature: f64,
    smoothed_dual: f64,
    primal_objective: f64,
    entropy: f64,
    cfg: &ScheduleConfig,
) -> Result<GapStep> {
    let slack = 1e-6 * smoothed_dual.abs().max(1.0);
    if entropy < 0.0 || smoothed_dual < primal_objective + temperature * entropy - slack {
        return Err(MwisError::Inconsistency(format!(
            "smoothed weak duality violated: D^T = {smoothed_dual}, primal = {primal_objective}, \
             T = {temperature}, H = {entropy}"
        )));
    }
    let gap = (smoothed_dual - primal_objective).max(0.0);
    if entropy < 1e-12 {
        return Ok(GapStep {
            temperature: cfg.temperature_floor.min(temperature),
            exhausted: true,
        });
    }
    let candidate = cfg.tau_gap * gap / entropy;
    if candidate < cfg.temperature_floor {
        Ok(GapStep {
            temperature: cfg.temperature_floor.min(temperature),
            exhausted: true,
        })
    } else {
        Ok(GapStep {
            temperature: temperature.min(candidate),
            exhausted: false,
        })
    }
}

/// `(D - P) / max(|D|, 1e-30)`.
pub fn relative_gap(dual_bound: f64, primal_bound: f64) -> f64 {
    (dual_bound - primal_bound) / dual_bound.abs().max(1e-30)
}

/// `-sum(x ln x - x)` with `0 ln 0 = 0`.
pub fn entropy(x: &[f64]) -> f64 {
    -x.iter()
        .map(|&v| if v > 0.0 { v * v.ln() - v } else { 0.0 })
        .sum::<f64>()
}

/// A feasible fractional point of the relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalEstimate {
    pub xhat: Vec<f64>,
    /// `<c, xhat>` in the augmented instance's cost units.
    pub objective: f64,
    pub entropy: f64,
    /// Worst clique residual of the input before projection.
    pub source_max_residual: f64,
}

/// Truncation projection: nodes are admitted in index order, each capped by
/// the smallest remaining slack of its cliques, and slacks absorb the rest.
pub fn truncation_projection(aug: &AugmentedInstance, x: &[f64]) -> PrimalEstimate {
    let n = aug.node_count();
    let mut xhat = vec![0.0; aug.var_count()];
    for j in 0..aug.clique_count() {
        xhat[aug.slack(j)] = 1.0;
    }
    for i in 0..n {
        let cap = aug
            .incidence(i)
            .iter()
            .map(|&j| xhat[n + j])
            .fold(f64::INFINITY, f64::min);
        let value = x[i].min(cap).max(0.0);
        xhat[i] = value;
        for &j in aug.incidence(i) {
            xhat[n + j] -= value;
        }
    }
    // Rounding can leave a slack a hair below zero.
    for s in &mut xhat[n..] {
        if *s < 0.0 {
            *s = 0.0;
        }
    }
    let objective = aug.costs().iter().zip(&xhat).map(|(c, v)| c * v).sum();
    let source_max_residual = feasibility_residuals(aug, x)
        .into_iter()
        .fold(0.0_f64, f64::max);
    PrimalEstimate {
        entropy: entropy(&xhat),
        objective,
        xhat,
        source_max_residual,
    }
}

/// Result of [`warm_start`].
#[derive(Debug, Clone)]
pub struct WarmStart {
    /// Reparametrized and rescaled instance; its reduced costs at zero duals
    /// lie in `[-1, 0]`.
    pub instance: AugmentedInstance,
    /// Duals of the initial coordinate sweep, in the input's cost units.
    pub lambda: Vec<f64>,
    pub scale: f64,
}

impl WarmStart {
    /// Maps duals of the rescaled instance back to the input's units.
    pub fn unscale_lambda(&self, lambda: &[f64]) -> Vec<f64> {
        self.lambda
            .iter()
            .zip(lambda)
            .map(|(l0, l)| l0 + self.scale * l)
            .collect()
    }
}

/// Warm start before any smoothing: one coordinate sweep from zero duals,
/// then reparametrize and rescale so every reduced cost lies in `[-1, 0]`.
pub fn warm_start(aug: &AugmentedInstance) -> WarmStart {
    warm_start_from(aug, vec![0.0; aug.clique_count()])
}

/// [`warm_start`] with the coordinate sweep starting from `lambda`.
pub fn warm_start_from(aug: &AugmentedInstance, lambda: Vec<f64>) -> WarmStart {
    assert_eq!(lambda.len(), aug.clique_count(), "one dual per clique");
    let mut state = DualState::from_lambda(aug, lambda, 1.0);
    coordinate_sweep(&mut state, aug);
    let scale = state.reduced.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let scale = if scale > 0.0 && scale.is_finite() {
        scale
    } else {
        1.0
    };
    WarmStart {
        instance: aug.reparametrize(&state.lambda, scale),
        lambda: state.lambda,
        scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::ProblemInstance;

    fn single_clique(costs: Vec<f64>) -> AugmentedInstance {
        let n = costs.len();
        ProblemInstance::from_cliques(costs, vec![(0..n).collect()])
            .augment()
            .unwrap()
    }

    #[test]
    fn residual_examples() {
        let aug = single_clique(vec![1.0, 1.0]);
        assert_eq!(feasibility_residuals(&aug, &[0.5, 0.25, 0.25]), vec![0.0]);
        let r = feasibility_residuals(&aug, &[0.5, 0.5, 0.3]);
        assert!((r[0] - 0.3).abs() < 1e-15);
        assert_eq!(feasibility_residuals(&aug, &[0.0; 3]), vec![1.0]);
    }

    #[test]
    fn feasibility_step_examples() {
        let cfg = ScheduleConfig::default();
        assert_eq!(feasibility_step(0.01, &[0.005, 0.001], &cfg), 0.005);
        assert_eq!(feasibility_step(0.01, &[0.02], &cfg), 0.01);
        assert_eq!(feasibility_step(1e-9, &[0.0], &cfg), 1e-9);
    }

    #[test]
    fn gap_step_examples() {
        let cfg = ScheduleConfig::default();
        // Weak duality needs D^T >= 8 + 4 T, so T <= 0.5 here.
        let step = gap_step(0.5, 10.0, 8.0, 4.0, &cfg).unwrap();
        assert_eq!(step.temperature, 0.25);
        assert!(!step.exhausted);
        let step = gap_step(0.1, 10.0, 8.0, 4.0, &cfg).unwrap();
        assert_eq!(step.temperature, 0.1);

        let step = gap_step(1e-3, 5.0 + 4e-3, 5.0, 4.0, &cfg).unwrap();
        assert!((step.temperature - 5e-4).abs() < 1e-12);
        let zero_gap = gap_step(1e-12, 5.0, 5.0, 0.5, &cfg).unwrap();
        assert!(zero_gap.exhausted);
        assert_eq!(zero_gap.temperature, 1e-12);

        assert!(matches!(
            gap_step(1.0, 5.0, 8.0, 4.0, &cfg),
            Err(MwisError::Inconsistency(_))
        ));
    }

    #[test]
    fn gap_zero_lands_on_floor() {
        let cfg = ScheduleConfig::default();
        let step = gap_step(0.01, 3.0, 3.0, 1.0, &cfg).unwrap_err();
        // D^T must cover T·H; with T = 0.01 and H = 1 a zero gap is inconsistent.
        assert!(matches!(step, MwisError::Inconsistency(_)));
        let step = gap_step(0.01, 3.0, 3.0, 1e-13, &cfg).unwrap();
        assert_eq!(step.temperature, cfg.temperature_floor);
        assert!(step.exhausted);
    }

    #[test]
    fn relative_gap_examples() {
        assert_eq!(relative_gap(2.0, 2.0), 0.0);
        assert!((relative_gap(10.0, 9.0) - 0.1).abs() < 1e-15);
        assert_eq!(relative_gap(0.0, 0.0), 0.0);
    }

    #[test]
    fn projection_examples() {
        let aug = single_clique(vec![1.0, 1.0, 1.0]);
        let p = truncation_projection(&aug, &[0.9, 0.3, 0.2, 0.1]);
        let expect = [0.9, 0.1, 0.0, 0.0];
        for (a, b) in p.xhat.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15, "{:?}", p.xhat);
        }
        assert!((p.source_max_residual - 0.5).abs() < 1e-15);

        let feasible = [0.2, 0.3, 0.1, 0.4];
        assert_eq!(
            truncation_projection(&aug, &feasible).xhat,
            feasible.to_vec()
        );

        let zero = truncation_projection(&aug, &[0.0; 4]);
        assert_eq!(zero.xhat, vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(zero.objective, 0.0);
    }

    #[test]
    fn entropy_handles_zero_and_is_nonnegative_on_unit_box() {
        assert_eq!(entropy(&[0.0, 1.0]), 1.0);
        assert!(entropy(&[0.3, 0.7, 0.0]) >= 0.0);
    }

    #[test]
    fn warm_start_lands_in_unit_interval() {
        let inst = ProblemInstance::from_cliques(
            vec![3.0, 2.0, 4.0, 2.0, 2.0],
            vec![
                vec![0, 1],
                vec![1, 2],
                vec![2, 0],
                vec![0, 2, 3],
                vec![3, 4],
                vec![4, 2],
            ],
        );
        let aug = inst.augment().unwrap();
        let scaled = warm_start(&aug).instance;
        assert!(scaled.costs().iter().all(|&c| (-1.0..=0.0).contains(&c)));
        assert!(scaled.costs().iter().any(|&c| c == -1.0));
    }
}
