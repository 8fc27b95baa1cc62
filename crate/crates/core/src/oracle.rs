//! Independent reference computations used by tests and the acceptance
//! suite.

use crate::error::{MwisError, Result};
use crate::instance::ProblemInstance;
use crate::primal::IntegerSolution;
use crate::solver::{solve, Mode, RunConfig, Scheduler, Status};

/// Largest instance [`brute_force_mwis`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 25;

/// Exact maximum-weight independent set by depth-first enumeration. Among
/// optimal sets the lexicographically smallest index list is returned.
pub fn brute_force_mwis(instance: &ProblemInstance) -> Result<IntegerSolution> {
    let n = instance.node_count();
    if n > BRUTE_FORCE_LIMIT {
        return Err(MwisError::TooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let costs = instance.costs();
    let adjacency: Vec<u32> = (0..n)
        .map(|i| {
            instance
                .neighbors(i)
                .iter()
                .fold(0u32, |m, &k| m | (1 << k))
        })
        .collect();
    // Positive mass at or after each index bounds what a branch can gain.
    let mut tail = vec![0.0; n + 1];
    for i in (0..n).rev() {
        tail[i] = tail[i + 1] + costs[i].max(0.0);
    }

    let mut search = Search {
        costs,
        adjacency: &adjacency,
        tail: &tail,
        best_value: 0.0,
        best: Vec::new(),
        current: Vec::new(),
    };
    search.visit(0, 0, 0.0);
    Ok(IntegerSolution::evaluate(instance, search.best))
}

struct Search<'a> {
    costs: &'a [f64],
    adjacency: &'a [u32],
    tail: &'a [f64],
    best_value: f64,
    best: Vec<usize>,
    current: Vec<usize>,
}

impl Search<'_> {
    fn visit(&mut self, i: usize, blocked: u32, value: f64) {
        if value + self.tail[i] < self.best_value {
            return;
        }
        if i == self.costs.len() {
            if value > self.best_value || (value == self.best_value && self.current < self.best) {
                self.best_value = value;
                self.best = self.current.clone();
            }
            return;
        }
        if blocked & (1 << i) == 0 && self.costs[i] >= 0.0 {
            self.current.push(i);
            self.visit(i + 1, blocked | self.adjacency[i], value + self.costs[i]);
            self.current.pop();
        }
        self.visit(i + 1, blocked, value);
    }
}

/// Central finite differences of `f` at `point`, one coordinate at a time.
pub fn finite_diff_grad<F: Fn(&[f64]) -> f64>(f: F, point: &[f64], step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(MwisError::Precondition(
            "finite-difference step must be positive".into(),
        ));
    }
    let mut probe = point.to_vec();
    let mut grad = Vec::with_capacity(point.len());
    for k in 0..point.len() {
        probe[k] = point[k] + step;
        let up = f(&probe);
        probe[k] = point[k] - step;
        let down = f(&probe);
        probe[k] = point[k];
        grad.push((up - down) / (2.0 * step));
    }
    Ok(grad)
}

/// Weak-duality bracket around the LP optimum of an instance's relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct LpBracket {
    pub dual_bound: f64,
    pub primal_bound: f64,
    /// Feasible fractional point attaining `primal_bound`.
    pub xhat: Vec<f64>,
}

impl LpBracket {
    pub fn width(&self) -> f64 {
        self.dual_bound - self.primal_bound
    }
}

/// Runs the gap-scheduled exp-domain solver until the relative gap is at
/// most `target_gap`.
pub fn lp_reference(instance: &ProblemInstance, target_gap: f64) -> Result<LpBracket> {
    let cfg = RunConfig {
        mode: Mode::LpExp,
        scheduler: Scheduler::Gap,
        target_gap,
        record_timing: false,
        ..RunConfig::default()
    };
    lp_reference_with(instance, &cfg)
}

/// [`lp_reference`] with explicit solver settings; `cfg.target_gap` is the
/// requested bracket width relative to the dual bound.
pub fn lp_reference_with(instance: &ProblemInstance, cfg: &RunConfig) -> Result<LpBracket> {
    if !(cfg.target_gap > 0.0) {
        return Err(MwisError::Precondition(
            "target gap must be positive".into(),
        ));
    }
    let outcome = solve(instance, cfg)?;
    match outcome.status {
        Status::TargetGap | Status::Certified => Ok(LpBracket {
            dual_bound: outcome.dual_bound,
            primal_bound: outcome.primal_lp_bound,
            xhat: outcome.lp_estimate,
        }),
        _ => Err(MwisError::IterationLimit {
            primal: outcome.primal_lp_bound,
            dual: outcome.dual_bound,
        }),
    }
}
