//! Lagrange dual of the clique cover relaxation and the coordinate sweeps
//! that minimize it: the non-smooth coordinate descent, the naive Bregman
//! normalization, and its log-domain and stabilized exp-domain forms.

use crate::error::{MwisError, Result};
use crate::instance::AugmentedInstance;
use crate::sparsify::ActiveSets;

/// `c_i - sum_{j in J_i} lambda_j` over all `n + m` variables.
pub fn reduced_costs(aug: &AugmentedInstance, lambda: &[f64]) -> Vec<f64> {
    assert_eq!(lambda.len(), aug.clique_count(), "one dual per clique");
    let mut reduced = aug.costs().to_vec();
    for (j, clique) in aug.cliques().iter().enumerate() {
        for &i in clique {
            reduced[i] -= lambda[j];
        }
    }
    reduced
}

/// Non-smooth dual objective `sum(lambda) + sum(max(0, c^lambda))`, an upper
/// bound on the relaxation optimum for every `lambda`.
pub fn dual_value(aug: &AugmentedInstance, lambda: &[f64]) -> f64 {
    let reduced = reduced_costs(aug, lambda);
    lambda.iter().sum::<f64>() + reduced.iter().map(|&c| c.max(0.0)).sum::<f64>()
}

/// `max_{x in [0,1]} (c x + T (x - x ln x))`: `T exp(c/T)` for `c <= 0`,
/// `c + T` above.
pub fn smoothed_term(reduced: f64, temperature: f64) -> f64 {
    if reduced <= 0.0 {
        temperature * (reduced / temperature).exp()
    } else {
        reduced + temperature
    }
}

/// Entropy-smoothed dual objective.
pub fn smoothed_dual_value(aug: &AugmentedInstance, lambda: &[f64], temperature: f64) -> f64 {
    let reduced = reduced_costs(aug, lambda);
    lambda.iter().sum::<f64>()
        + reduced
            .iter()
            .map(|&c| smoothed_term(c, temperature))
            .sum::<f64>()
}

/// Zero-tolerance used when testing membership of the sign set.
const SIGN_TOLERANCE: f64 = 1e-12;

/// Subgradient `1 - sum_{i in K_j} x*_i` of the dual at `lambda`, for an
/// `xstar` that maximizes `<c^lambda, x>` over the box.
pub fn subgradient(aug: &AugmentedInstance, lambda: &[f64], xstar: &[f64]) -> Result<Vec<f64>> {
    if xstar.len() != aug.var_count() {
        return Err(MwisError::Precondition(format!(
            "xstar has {} entries, expected {}",
            xstar.len(),
            aug.var_count()
        )));
    }
    let reduced = reduced_costs(aug, lambda);
    for (i, (&c, &x)) in reduced.iter().zip(xstar).enumerate() {
        let ok = if c > SIGN_TOLERANCE {
            x == 1.0
        } else if c < -SIGN_TOLERANCE {
            x == 0.0
        } else {
            (0.0..=1.0).contains(&x)
        };
        if !ok {
            return Err(MwisError::Precondition(format!(
                "x[{i}] = {x} does not maximize reduced cost {c}"
            )));
        }
    }
    Ok(aug
        .cliques()
        .iter()
        .map(|k| 1.0 - k.iter().map(|&i| xstar[i]).sum::<f64>())
        .collect())
}

/// Per-sweep diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SweepStats {
    /// Largest `|sum_{K_j} x - 1|` seen right before a clique was normalized.
    pub max_residual: f64,
    /// Largest absolute change of a single effective dual variable.
    pub max_change: f64,
    pub stabilizations: usize,
}

/// Dual iterate shared by all sweep variants.
///
/// `reduced` is kept consistent with the raw `lambda`. In exp-domain runs
/// the effective dual is `lambda_j - T ln alpha_j`, and `x` caches
/// `exp(c^{effective}/T)`. Log-domain and non-smooth sweeps keep `alpha`
/// at one and leave `x` empty.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub lambda: Vec<f64>,
    pub reduced: Vec<f64>,
    pub alpha: Vec<f64>,
    pub x: Vec<f64>,
    pub temperature: f64,
    pub sweep_count: u64,
}

impl DualState {
    pub fn new(aug: &AugmentedInstance, temperature: f64) -> Self {
        Self::from_lambda(aug, vec![0.0; aug.clique_count()], temperature)
    }

    pub fn from_lambda(aug: &AugmentedInstance, lambda: Vec<f64>, temperature: f64) -> Self {
        let reduced = reduced_costs(aug, &lambda);
        Self {
            alpha: vec![1.0; lambda.len()],
            lambda,
            reduced,
            x: Vec::new(),
            temperature,
            sweep_count: 0,
        }
    }

    /// `lambda_j - T ln alpha_j` for every clique.
    pub fn effective_lambda(&self) -> Vec<f64> {
        self.lambda
            .iter()
            .zip(&self.alpha)
            .map(|(&l, &a)| {
                if a == 1.0 {
                    l
                } else {
                    l - self.temperature * a.ln()
                }
            })
            .collect()
    }

    /// Reduced costs of the effective dual.
    pub fn effective_reduced(&self, aug: &AugmentedInstance) -> Vec<f64> {
        if self.alpha.iter().all(|&a| a == 1.0) {
            return self.reduced.clone();
        }
        reduced_costs(aug, &self.effective_lambda())
    }

    /// Fresh `exp(c^{effective}/T)`, independent of the cached `x`.
    pub fn primal_iterate(&self, aug: &AugmentedInstance) -> Vec<f64> {
        self.effective_reduced(aug)
            .into_iter()
            .map(|c| (c / self.temperature).exp())
            .collect()
    }

    /// Recomputes `reduced` from scratch to shed accumulated rounding.
    pub fn recompute_reduced(&mut self, aug: &AugmentedInstance) {
        self.reduced = reduced_costs(aug, &self.lambda);
    }

    /// Pushes every exponentiated dual into `lambda` and resets it to one.
    /// The effective dual, and therefore `x`, is unchanged.
    pub fn fold_alpha(&mut self, aug: &AugmentedInstance) {
        let t = self.temperature;
        for (j, a) in self.alpha.iter_mut().enumerate() {
            if *a == 1.0 {
                continue;
            }
            let shift = -t * a.ln();
            self.lambda[j] += shift;
            for &i in aug.clique(j) {
                self.reduced[i] -= shift;
            }
            *a = 1.0;
        }
    }

    /// Folds `alpha` and rebuilds the exp-domain cache `x = exp(c^lambda/T)`.
    pub fn materialize(&mut self, aug: &AugmentedInstance) {
        self.fold_alpha(aug);
        let t = self.temperature;
        self.x = self.reduced.iter().map(|&c| (c / t).exp()).collect();
    }

    /// Changes the smoothing level, keeping the effective dual fixed.
    pub fn set_temperature(&mut self, aug: &AugmentedInstance, temperature: f64) {
        self.fold_alpha(aug);
        self.temperature = temperature;
        if !self.x.is_empty() {
            self.materialize(aug);
        }
    }

    fn shift_clique(&mut self, aug: &AugmentedInstance, j: usize, delta: f64) {
        self.lambda[j] += delta;
        for &i in aug.clique(j) {
            self.reduced[i] -= delta;
        }
    }

    fn refresh_clique_x(&mut self, aug: &AugmentedInstance, j: usize) {
        let t = self.temperature;
        for &i in aug.clique(j) {
            self.x[i] = (self.reduced[i] / t).exp();
        }
    }
}

/// Index of the largest reduced cost in the clique, lowest index on ties.
fn clique_argmax(reduced: &[f64], clique: &[usize]) -> usize {
    let mut best = clique[0];
    for &i in &clique[1..] {
        if reduced[i] > reduced[best] {
            best = i;
        }
    }
    best
}

/// Non-smooth coordinate descent sweep: each clique's largest reduced cost
/// is shifted to zero. Returns the largest absolute dual change, which is
/// zero exactly at a fixed point.
pub fn coordinate_sweep(state: &mut DualState, aug: &AugmentedInstance) -> f64 {
    let mut max_change: f64 = 0.0;
    for j in 0..aug.clique_count() {
        let best = clique_argmax(&state.reduced, aug.clique(j));
        let delta = state.reduced[best];
        if delta != 0.0 {
            state.shift_clique(aug, j, delta);
        }
        max_change = max_change.max(delta.abs());
    }
    state.sweep_count += 1;
    max_change
}

/// Fixed-point threshold for [`coordinate_sweep`] relative to the costs.
pub fn coordinate_fixed_point_tolerance(aug: &AugmentedInstance) -> f64 {
    let max_cost = aug.costs().iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    1e-12 * (1.0 + max_cost)
}

/// One sweep of plain clique normalization on an explicit primal vector.
pub fn naive_bregman_sweep(x: &mut [f64], aug: &AugmentedInstance) -> Result<()> {
    for (j, clique) in aug.cliques().iter().enumerate() {
        let s: f64 = clique.iter().map(|&i| x[i]).sum();
        if !(s.is_finite() && s >= f64::MIN_POSITIVE) {
            return Err(MwisError::NumericalUnderflow { clique: j, sum: s });
        }
        for &i in clique {
            x[i] /= s;
        }
    }
    Ok(())
}

/// Smoothed coordinate minimization of clique `j` in the log domain,
/// shifted by the clique maximum so every exponent is non-positive.
/// Returns the dual change.
pub fn log_domain_update(state: &mut DualState, aug: &AugmentedInstance, j: usize) -> f64 {
    let t = state.temperature;
    let clique = aug.clique(j);
    let top = state.reduced[clique_argmax(&state.reduced, clique)];
    let sum: f64 = clique
        .iter()
        .map(|&i| ((state.reduced[i] - top) / t).exp())
        .sum();
    let delta = top + t * sum.ln();
    state.shift_clique(aug, j, delta);
    delta
}

/// One log-domain Bregman sweep over all cliques in index order.
pub fn log_domain_sweep(state: &mut DualState, aug: &AugmentedInstance) -> SweepStats {
    let t = state.temperature;
    let mut stats = SweepStats::default();
    for j in 0..aug.clique_count() {
        let delta = log_domain_update(state, aug, j);
        stats.max_change = stats.max_change.max(delta.abs());
        // The clique sum of exp(c/T) before the update was exp(delta/T).
        stats.max_residual = stats.max_residual.max((delta / t).exp_m1().abs());
    }
    state.sweep_count += 1;
    stats
}

/// One sweep of the stabilized exp-domain Bregman method.
///
/// Each clique divides its exponentiated dual and its cached `x` entries by
/// the clique sum. When `alpha_j + 1/alpha_j` reaches `tau_stab`, all
/// exponentiated duals are folded into `lambda` and the clique's `x` is
/// recomputed from reduced costs. With active sets, sums run over the
/// active prefix only and every stabilization rebuilds `x` and the sets.
///
/// `state.x` must be materialized. Call [`DualState::fold_alpha`] after the
/// last sweep to obtain a plain dual vector.
pub fn exp_domain_sweep(
    state: &mut DualState,
    aug: &AugmentedInstance,
    tau_stab: f64,
    mut active: Option<&mut ActiveSets>,
) -> SweepStats {
    debug_assert_eq!(state.x.len(), aug.var_count(), "x must be materialized");
    let mut stats = SweepStats::default();
    for j in 0..aug.clique_count() {
        exp_domain_update(state, aug, j, tau_stab, active.as_deref_mut(), &mut stats);
    }
    state.sweep_count += 1;
    stats
}

/// Processes clique `j` of [`exp_domain_sweep`], accumulating into `stats`.
pub fn exp_domain_update(
    state: &mut DualState,
    aug: &AugmentedInstance,
    j: usize,
    tau_stab: f64,
    active: Option<&mut ActiveSets>,
    stats: &mut SweepStats,
) {
    let members = match active.as_deref() {
        Some(sets) => sets.active(j),
        None => aug.clique(j),
    };
    let s: f64 = members.iter().map(|&i| state.x[i]).sum();
    stats.max_residual = stats.max_residual.max((s - 1.0).abs());

    if !(s.is_finite() && s >= f64::MIN_POSITIVE) {
        // Exp-domain values left the representable range: take the exact
        // log-domain step instead.
        state.fold_alpha(aug);
        let delta = log_domain_update(state, aug, j);
        stats.max_change = stats.max_change.max(delta.abs());
        stats.stabilizations += 1;
        restabilize(state, aug, j, active);
        return;
    }

    let alpha = state.alpha[j] / s;
    state.alpha[j] = alpha;
    stats.max_change = stats.max_change.max((state.temperature * s.ln()).abs());
    if alpha + 1.0 / alpha < tau_stab {
        let members = match active.as_deref() {
            Some(sets) => sets.active(j),
            None => aug.clique(j),
        };
        for &i in members {
            state.x[i] /= s;
        }
    } else {
        state.fold_alpha(aug);
        stats.stabilizations += 1;
        restabilize(state, aug, j, active);
    }
}

/// After `alpha` has been folded: recompute `x` on clique `j`, or, with
/// truncation active, everywhere followed by an active-set refresh.
fn restabilize(
    state: &mut DualState,
    aug: &AugmentedInstance,
    j: usize,
    active: Option<&mut ActiveSets>,
) {
    match active {
        None => state.refresh_clique_x(aug, j),
        Some(sets) => {
            state.materialize(aug);
            sets.refresh(aug, &state.x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::ProblemInstance;

    fn k3(costs: [f64; 3]) -> AugmentedInstance {
        ProblemInstance::from_cliques(costs.to_vec(), vec![vec![0, 1, 2]])
            .augment()
            .unwrap()
    }

    #[test]
    fn reduced_costs_examples() {
        let aug = ProblemInstance::from_cliques(vec![1.0, 2.0], vec![vec![0, 1]])
            .augment()
            .unwrap();
        assert_eq!(reduced_costs(&aug, &[0.5]), vec![0.5, 1.5, -0.5]);
        assert_eq!(reduced_costs(&aug, &[0.0]), aug.costs().to_vec());

        let two = ProblemInstance::from_cliques(vec![5.0, 1.0], vec![vec![0, 1], vec![0]])
            .augment()
            .unwrap();
        assert_eq!(reduced_costs(&two, &[1.0, 2.0])[0], 2.0);
    }

    #[test]
    fn dual_value_examples() {
        let aug = k3([2.0, 1.0, 1.0]);
        assert_eq!(dual_value(&aug, &[0.0]), 4.0);
        assert_eq!(dual_value(&aug, &[2.0]), 2.0);
        assert_eq!(dual_value(&aug, &[3.0]), 3.0);
    }

    #[test]
    fn subgradient_examples() {
        let aug = k3([2.0, 1.0, 1.0]);
        // lambda = 2 makes node 0 zero and the rest negative.
        let g = subgradient(&aug, &[2.0], &[0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(g, vec![1.0]);
        let g = subgradient(&aug, &[2.0], &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(g, vec![0.0]);
        // lambda = 1 makes node 0 positive and nodes 1, 2 zero.
        let g = subgradient(&aug, &[1.0], &[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(g, vec![-1.0]);
        assert!(subgradient(&aug, &[2.0], &[0.0, 1.0, 0.0, 0.0]).is_err());
        assert!(subgradient(&aug, &[2.0], &[0.0]).is_err());
    }

    #[test]
    fn coordinate_sweep_on_triangle() {
        let aug = k3([2.0, 1.0, 1.0]);
        let mut state = DualState::new(&aug, 1.0);
        let change = coordinate_sweep(&mut state, &aug);
        assert_eq!(change, 2.0);
        assert_eq!(state.lambda, vec![2.0]);
        assert_eq!(state.reduced, vec![0.0, -1.0, -1.0, -2.0]);
        assert_eq!(dual_value(&aug, &state.lambda), 2.0);
        let before = state.clone();
        assert_eq!(coordinate_sweep(&mut state, &aug), 0.0);
        assert_eq!(state.lambda, before.lambda);
        assert_eq!(state.reduced, before.reduced);
    }

    #[test]
    fn naive_sweep_normalizes_and_detects_underflow() {
        let aug = k3([0.0, 0.0, -1.0]);
        let mut x = vec![1.0, 1.0, (-1.0f64).exp(), 1.0];
        naive_bregman_sweep(&mut x, &aug).unwrap();
        assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let fixed = x.clone();
        naive_bregman_sweep(&mut x, &aug).unwrap();
        for (a, b) in x.iter().zip(&fixed) {
            assert!((a - b).abs() < 1e-16);
        }

        let t = 1e-3;
        let mut tiny: Vec<f64> = [-5.0, -5.0, -5.0, -5.0]
            .iter()
            .map(|c: &f64| (c / t).exp())
            .collect();
        assert!(matches!(
            naive_bregman_sweep(&mut tiny, &aug),
            Err(MwisError::NumericalUnderflow { clique: 0, .. })
        ));
    }

    #[test]
    fn log_update_on_triangle() {
        let aug = k3([2.0, 1.0, 1.0]);
        let mut state = DualState::new(&aug, 1.0);
        log_domain_sweep(&mut state, &aug);
        let expected = 2.0 + (1.0 + 2.0 * (-1.0f64).exp() + (-2.0f64).exp()).ln();
        assert!((state.lambda[0] - expected).abs() < 1e-14);
        assert!((state.lambda[0] - 2.626_523_375_3).abs() < 1e-9);
        assert!(state.reduced.iter().all(|&c| c <= 0.0));
    }

    #[test]
    fn log_update_tends_to_coordinate_update() {
        let aug = k3([2.0, 1.0, 1.0]);
        let mut smooth = DualState::new(&aug, 1e-14);
        let mut sharp = DualState::new(&aug, 1.0);
        log_domain_sweep(&mut smooth, &aug);
        coordinate_sweep(&mut sharp, &aug);
        assert!((smooth.lambda[0] - sharp.lambda[0]).abs() < 1e-12);
    }

    #[test]
    fn smoothed_dual_examples() {
        let zero = ProblemInstance::from_cliques(vec![0.0, 0.0], vec![vec![0, 1]])
            .augment()
            .unwrap();
        assert_eq!(smoothed_dual_value(&zero, &[0.0], 1.0), 3.0);

        let aug = k3([2.0, 1.0, 1.0]);
        let value = smoothed_dual_value(&aug, &[2.0], 1.0);
        let expected = 2.0 + 1.0 + 2.0 * (-1.0f64).exp() + (-2.0f64).exp();
        assert!((value - expected).abs() < 1e-14);
        assert!((value - 3.871_094_1).abs() < 1e-6);
        // c > 0 branch: c + T.
        assert_eq!(smoothed_term(0.5, 0.1), 0.6);
    }

    #[test]
    fn exp_sweep_stabilizes_on_underflow() {
        // Every variable, slack included, has reduced cost <= -5 at T = 1e-3.
        let aug = k3([0.0, -1.0, -2.0]);
        let mut state = DualState::from_lambda(&aug, vec![5.0], 1e-3);
        state.materialize(&aug);
        assert!(state.x.iter().all(|&v| v == 0.0));
        let stats = exp_domain_sweep(&mut state, &aug, 1e30, None);
        assert_eq!(stats.stabilizations, 1);
        let s: f64 = state.x.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        let mut reference = DualState::from_lambda(&aug, vec![5.0], 1e-3);
        log_domain_sweep(&mut reference, &aug);
        state.fold_alpha(&aug);
        assert!((state.lambda[0] - reference.lambda[0]).abs() < 1e-12);
    }

    #[test]
    fn exp_sweep_at_optimum_needs_no_stabilization() {
        let aug = k3([0.3, 0.1, 0.2]);
        let mut state = DualState::new(&aug, 0.5);
        state.materialize(&aug);
        for _ in 0..3 {
            exp_domain_sweep(&mut state, &aug, 10.0, None);
        }
        state.materialize(&aug);
        let stats = exp_domain_sweep(&mut state, &aug, 2.0 + 1e-9, None);
        assert_eq!(stats.stabilizations, 0);
        assert!((state.alpha[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn fold_keeps_effective_dual() {
        let aug = k3([0.3, 0.1, 0.2]);
        let mut state = DualState::new(&aug, 0.5);
        state.materialize(&aug);
        exp_domain_sweep(&mut state, &aug, 1e30, None);
        let eff = state.effective_lambda();
        let x = state.primal_iterate(&aug);
        state.fold_alpha(&aug);
        assert_eq!(state.alpha, vec![1.0]);
        assert!((state.lambda[0] - eff[0]).abs() < 1e-15);
        for (a, b) in x.iter().zip(&state.x) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
