//! Integer solutions: greedy proposals driven by reduced costs and exact
//! recombination of two solutions through a minimum s-t cut.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{MwisError, Result};
use crate::flow::FlowNetwork;
use crate::instance::{AugmentedInstance, ProblemInstance};

/// A 0/1 assignment over the nodes of an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegerSolution {
    /// Selected nodes, strictly ascending.
    pub selected: Vec<usize>,
    /// Sum of the instance's original costs over `selected`.
    pub objective: f64,
    /// Whether no edge has both endpoints selected.
    pub feasible: bool,
}

impl IntegerSolution {
    pub fn evaluate(instance: &ProblemInstance, selected: impl IntoIterator<Item = usize>) -> Self {
        let mut selected: Vec<usize> = selected.into_iter().collect();
        selected.sort_unstable();
        selected.dedup();
        Self {
            objective: instance.objective(&selected),
            feasible: instance.conflicting_edge(&selected).is_none(),
            selected,
        }
    }

    pub fn empty() -> Self {
        Self {
            selected: Vec::new(),
            objective: 0.0,
            feasible: true,
        }
    }

    pub fn contains(&self, node: usize) -> bool {
        self.selected.binary_search(&node).is_ok()
    }

    fn require_feasible(&self, instance: &ProblemInstance) -> Result<()> {
        match instance.conflicting_edge(&self.selected) {
            Some((u, v)) => Err(MwisError::NotIndependent(u, v)),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mark {
    Undefined,
    Zero,
    One,
}

/// Greedy proposal: cliques are visited in a random order, and each clique
/// without a selected member picks its undefined variable of largest
/// reduced cost (lowest index on ties). Picking a node zeroes its graph
/// neighbors; picking a slack selects nothing.
pub fn greedy_generate<R: Rng + ?Sized>(
    aug: &AugmentedInstance,
    reduced: &[f64],
    rng: &mut R,
) -> IntegerSolution {
    assert_eq!(
        reduced.len(),
        aug.var_count(),
        "reduced costs cover all variables"
    );
    let base = aug.base();
    let n = aug.node_count();
    let mut mark = vec![Mark::Undefined; aug.var_count()];
    let mut order: Vec<usize> = (0..aug.clique_count()).collect();
    order.shuffle(rng);

    for j in order {
        let clique = aug.clique(j);
        if clique.iter().any(|&i| mark[i] == Mark::One) {
            continue;
        }
        // The slack of a clique without a selected member is still undefined.
        let mut best: Option<usize> = None;
        for &i in clique {
            if mark[i] == Mark::Undefined && best.map_or(true, |b| reduced[i] > reduced[b]) {
                best = Some(i);
            }
        }
        let Some(best) = best else { continue };
        mark[best] = Mark::One;
        if best < n {
            for &nb in base.neighbors(best) {
                mark[nb] = Mark::Zero;
            }
        }
    }

    let selected = (0..n).filter(|&i| mark[i] == Mark::One);
    IntegerSolution::evaluate(base, selected)
}

/// Recombination subproblem over the nodes where two solutions disagree.
///
/// With `y_i = x_i, w_i = c_i` on side A and `y_i = 1 - x_i, w_i = -c_i`
/// on side B, the restricted MWIS becomes
/// `-sum_B w + sum w_i y_i - M sum_{(a,b)} y_a (1 - y_b)`, solved by a
/// minimum cut.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionSubproblem {
    /// Nodes selected by both inputs; frozen to one.
    pub fixed: Vec<usize>,
    /// Selected by the first input only.
    pub side_a: Vec<usize>,
    /// Selected by the second input only.
    pub side_b: Vec<usize>,
    /// Induced edges, oriented from side A to side B.
    pub edges: Vec<(usize, usize)>,
}

impl FusionSubproblem {
    /// All free nodes, side A first.
    pub fn free_nodes(&self) -> Vec<usize> {
        self.side_a.iter().chain(&self.side_b).copied().collect()
    }

    /// Oriented-form weight of a free node.
    pub fn weight(&self, instance: &ProblemInstance, node: usize) -> f64 {
        if self.side_b.binary_search(&node).is_ok() {
            -instance.costs()[node]
        } else {
            instance.costs()[node]
        }
    }
}

/// Splits the disagreement between two feasible solutions into the
/// bipartite recombination subproblem.
pub fn build_fusion(
    instance: &ProblemInstance,
    a: &IntegerSolution,
    b: &IntegerSolution,
) -> Result<FusionSubproblem> {
    a.require_feasible(instance)?;
    b.require_feasible(instance)?;

    let fixed: Vec<usize> = a
        .selected
        .iter()
        .copied()
        .filter(|&i| b.contains(i))
        .collect();
    let side_a: Vec<usize> = a
        .selected
        .iter()
        .copied()
        .filter(|&i| !b.contains(i))
        .collect();
    let side_b: Vec<usize> = b
        .selected
        .iter()
        .copied()
        .filter(|&i| !a.contains(i))
        .collect();

    let mut edges = Vec::new();
    for &u in &side_a {
        for &v in instance.neighbors(u) {
            if side_b.binary_search(&v).is_ok() {
                edges.push((u, v));
            } else if side_a.binary_search(&v).is_ok() {
                return Err(MwisError::Inconsistency(format!(
                    "recombination graph is not bipartite: edge ({u}, {v}) inside one side"
                )));
            }
        }
    }
    Ok(FusionSubproblem {
        fixed,
        side_a,
        side_b,
        edges,
    })
}

/// Optimal recombination: the best independent set that agrees with both
/// inputs wherever they agree. Never worse than either input.
pub fn fuse(
    instance: &ProblemInstance,
    a: &IntegerSolution,
    b: &IntegerSolution,
) -> Result<IntegerSolution> {
    let sub = build_fusion(instance, a, b)?;
    if sub.side_a.is_empty() && sub.side_b.is_empty() {
        return Ok(IntegerSolution::evaluate(
            instance,
            a.selected.iter().copied(),
        ));
    }

    let free = sub.free_nodes();
    let source = free.len();
    let sink = free.len() + 1;
    let mut net = FlowNetwork::new(free.len() + 2);
    let costs = instance.costs();
    for (k, &node) in free.iter().enumerate() {
        let weight = costs[node].max(0.0);
        if k < sub.side_a.len() {
            net.add_arc(source, k, weight);
        } else {
            net.add_arc(k, sink, weight);
        }
    }
    let index: HashMap<usize, usize> = free.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    for &(u, v) in &sub.edges {
        net.add_uncuttable(index[&u], index[&v]);
    }
    let cut = net.max_flow(source, sink);

    // y_i is source-side membership; x = y on side A and 1 - y on side B.
    let mut selected = sub.fixed.clone();
    for (k, &node) in free.iter().enumerate() {
        let y = cut.source_side[k];
        let x = if k < sub.side_a.len() { y } else { !y };
        if x && costs[node] >= 0.0 {
            selected.push(node);
        }
    }
    let fused = IntegerSolution::evaluate(instance, selected);
    debug_assert!(fused.feasible);

    let better_input = if a.objective >= b.objective { a } else { b };
    if fused.feasible && fused.objective >= better_input.objective {
        Ok(fused)
    } else {
        Ok(IntegerSolution::evaluate(
            instance,
            better_input.selected.iter().copied(),
        ))
    }
}

/// Best solution found so far; every offer is fused into it.
#[derive(Debug, Clone, Default)]
pub struct Incumbent {
    best: Option<IntegerSolution>,
    pub rounds: usize,
}

impl Incumbent {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn best(&self) -> Option<&IntegerSolution> {
        self.best.as_ref()
    }

    pub fn objective(&self) -> Option<f64> {
        self.best.as_ref().map(|s| s.objective)
    }

    /// The first offer becomes the incumbent; later offers are fused in.
    pub fn offer(
        &mut self,
        instance: &ProblemInstance,
        proposal: IntegerSolution,
    ) -> Result<&IntegerSolution> {
        let next = match self.best.take() {
            None => proposal,
            Some(current) => fuse(instance, &current, &proposal)?,
        };
        self.rounds += 1;
        Ok(self.best.insert(next))
    }
}

/// Alternates greedy proposals and recombination for `rounds` rounds after
/// the initial proposal.
pub fn heuristic_loop<R: Rng + ?Sized>(
    aug: &AugmentedInstance,
    reduced: &[f64],
    rng: &mut R,
    rounds: usize,
) -> Result<IntegerSolution> {
    let mut incumbent = Incumbent::new();
    incumbent.offer(aug.base(), greedy_generate(aug, reduced, rng))?;
    for _ in 0..rounds {
        let proposal = greedy_generate(aug, reduced, rng);
        incumbent.offer(aug.base(), proposal)?;
    }
    Ok(incumbent.best.expect("initialized above"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path(costs: [f64; 3]) -> ProblemInstance {
        ProblemInstance::from_cliques(costs.to_vec(), vec![vec![0, 1], vec![1, 2]])
    }

    #[test]
    fn greedy_on_triangle_selects_zero_reduced_node() {
        let aug = ProblemInstance::from_cliques(vec![2.0, 1.0, 1.0], vec![vec![0, 1, 2]])
            .augment()
            .unwrap();
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sol = greedy_generate(&aug, &[0.0, -1.0, -1.0, -2.0], &mut rng);
            assert_eq!(sol.selected, vec![0]);
            assert_eq!(sol.objective, 2.0);
        }
    }

    #[test]
    fn greedy_prefers_slacks_when_they_dominate() {
        let aug = path([1.0, 1.0, 1.0]).augment().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sol = greedy_generate(&aug, &[-1.0, -1.0, -1.0, 0.0, 0.0], &mut rng);
        assert!(sol.selected.is_empty());
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn fusion_structure_on_path() {
        let inst = path([1.0, 3.0, 1.0]);
        let a = IntegerSolution::evaluate(&inst, [0, 2]);
        let b = IntegerSolution::evaluate(&inst, [1]);
        let sub = build_fusion(&inst, &a, &b).unwrap();
        assert_eq!(sub.side_a, vec![0, 2]);
        assert_eq!(sub.side_b, vec![1]);
        assert_eq!(sub.edges, vec![(0, 1), (2, 1)]);
        assert!(sub.fixed.is_empty());
        assert_eq!(sub.weight(&inst, 1), -3.0);
    }

    #[test]
    fn fuse_examples() {
        let inst = path([1.0, 3.0, 1.0]);
        let a = IntegerSolution::evaluate(&inst, [0, 2]);
        let b = IntegerSolution::evaluate(&inst, [1]);
        let fused = fuse(&inst, &a, &b).unwrap();
        assert_eq!(fused.selected, vec![1]);
        assert_eq!(fused.objective, 3.0);

        let inst = path([2.0, 3.0, 2.0]);
        let a = IntegerSolution::evaluate(&inst, [0, 2]);
        let fused = fuse(&inst, &a, &b).unwrap();
        assert_eq!(fused.selected, vec![0, 2]);
        assert_eq!(fused.objective, 4.0);

        let same = fuse(&inst, &a, &a).unwrap();
        assert_eq!(same, a);
    }

    #[test]
    fn fuse_rejects_infeasible_input() {
        let inst = path([1.0, 1.0, 1.0]);
        let bad = IntegerSolution::evaluate(&inst, [0, 1]);
        let good = IntegerSolution::evaluate(&inst, [1]);
        assert!(matches!(
            fuse(&inst, &bad, &good),
            Err(MwisError::NotIndependent(0, 1))
        ));
    }

    #[test]
    fn zero_rounds_returns_first_proposal() {
        let aug = path([1.0, 3.0, 1.0]).augment().unwrap();
        let reduced = aug.costs().to_vec();
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        let looped = heuristic_loop(&aug, &reduced, &mut r1, 0).unwrap();
        let single = greedy_generate(&aug, &reduced, &mut r2);
        assert_eq!(looped, single);
    }
}
