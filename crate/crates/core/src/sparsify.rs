//! Active-set truncation of clique sums.
//!
//! Each clique keeps its member list permuted so that the active variables
//! form a prefix; sweeps then sum and normalize only that prefix.

use crate::dual::DualState;
use crate::instance::AugmentedInstance;

/// Relative cut-off of heuristic truncation: a variable is dropped from a
/// clique sum when it is this many times smaller than the clique maximum.
pub const HEURISTIC_FACTOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum TruncationRule {
    Heuristic,
    /// Per-variable thresholds derived from an error budget.
    Accurate {
        thresholds: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSets {
    members: Vec<Vec<usize>>,
    active_len: Vec<usize>,
    /// Accurate mode only: variables excluded from every clique sum.
    truncated: Vec<bool>,
    rule: TruncationRule,
}

impl ActiveSets {
    pub fn heuristic(aug: &AugmentedInstance, x: &[f64]) -> Self {
        Self::build(aug, x, TruncationRule::Heuristic)
    }

    pub fn accurate(aug: &AugmentedInstance, x: &[f64], thresholds: Vec<f64>) -> Self {
        assert_eq!(thresholds.len(), aug.var_count());
        Self::build(aug, x, TruncationRule::Accurate { thresholds })
    }

    fn build(aug: &AugmentedInstance, x: &[f64], rule: TruncationRule) -> Self {
        let mut sets = Self {
            members: aug.cliques().to_vec(),
            active_len: vec![0; aug.clique_count()],
            truncated: vec![false; aug.var_count()],
            rule,
        };
        sets.refresh(aug, x);
        sets
    }

    pub fn rule(&self) -> &TruncationRule {
        &self.rule
    }

    /// Replaces the accurate-mode thresholds; takes effect at the next refresh.
    pub fn set_thresholds(&mut self, thresholds: Vec<f64>) {
        self.rule = TruncationRule::Accurate { thresholds };
    }

    /// Active members of clique `j`.
    pub fn active(&self, j: usize) -> &[usize] {
        &self.members[j][..self.active_len[j]]
    }

    pub fn is_truncated(&self, var: usize) -> bool {
        self.truncated[var]
    }

    /// Share of clique entries currently summed.
    pub fn active_fraction(&self) -> f64 {
        let total: usize = self.members.iter().map(Vec::len).sum();
        if total == 0 {
            return 1.0;
        }
        self.active_len.iter().sum::<usize>() as f64 / total as f64
    }

    /// Recomputes every active set from a fresh `x`.
    pub fn refresh(&mut self, aug: &AugmentedInstance, x: &[f64]) {
        self.truncated.iter_mut().for_each(|t| *t = false);
        let mut keep = vec![true; aug.var_count()];
        if let TruncationRule::Accurate { thresholds } = &self.rule {
            for i in 0..aug.var_count() {
                keep[i] = x[i] >= thresholds[i];
            }
            // The maximum of each clique stays so no active sum is empty.
            for clique in aug.cliques() {
                let top = clique_max(x, clique);
                keep[top] = true;
            }
            for i in 0..aug.var_count() {
                self.truncated[i] = !keep[i];
            }
        }

        for (j, clique) in aug.cliques().iter().enumerate() {
            let members = &mut self.members[j];
            members.clear();
            members.extend_from_slice(clique);
            let cut = match &self.rule {
                TruncationRule::Heuristic => Some(HEURISTIC_FACTOR * x[clique_max(x, clique)]),
                TruncationRule::Accurate { .. } => None,
            };
            let is_active = |i: usize| match cut {
                Some(cut) => x[i] >= cut,
                None => keep[i],
            };
            let mut front = 0;
            for k in 0..members.len() {
                if is_active(members[k]) {
                    members.swap(front, k);
                    front += 1;
                }
            }
            self.active_len[j] = front;
        }
    }
}

fn clique_max(x: &[f64], clique: &[usize]) -> usize {
    let mut best = clique[0];
    for &i in &clique[1..] {
        if x[i] > x[best] {
            best = i;
        }
    }
    best
}

/// Thresholds `delta / (T (n+m) tau_stab^{|J_i|})` below which a variable
/// may be dropped while keeping the smoothed dual error within `delta`.
/// Overflowing denominators give a zero threshold.
pub fn accurate_thresholds(
    aug: &AugmentedInstance,
    temperature: f64,
    tau_stab: f64,
    delta: f64,
) -> Vec<f64> {
    let vars = aug.var_count() as f64;
    (0..aug.var_count())
        .map(|i| {
            let degree = aug.incidence(i).len() as i32;
            let denom = temperature * vars * tau_stab.powi(degree);
            if delta <= 0.0 || !denom.is_finite() || denom <= 0.0 {
                0.0
            } else {
                delta / denom
            }
        })
        .collect()
}

/// Next error budget: a tenth of the previous batch's smoothed dual
/// improvement.
pub fn update_delta(previous_improvement: f64) -> f64 {
    0.1 * previous_improvement.max(0.0)
}

/// `D^T - Dbar`: the smoothed dual mass of the variables the active sets
/// currently exclude, evaluated at the state's effective dual.
pub fn truncation_error(aug: &AugmentedInstance, state: &DualState, sets: &ActiveSets) -> f64 {
    let t = state.temperature;
    state
        .effective_reduced(aug)
        .iter()
        .enumerate()
        .filter(|&(i, _)| sets.is_truncated(i))
        .map(|(_, &c)| t * (c / t).exp())
        .sum()
}
