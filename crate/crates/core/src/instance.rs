//! Problem representation: the raw MWIS instance with its clique cover, and
//! the slack-augmented equality form the dual solvers work on.

use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{MwisError, Result};

/// A weighted graph together with a clique cover of its edges and nodes.
///
/// Construction never fails; use [`ProblemInstance::validate`] to check the
/// cover conditions before handing an instance to the solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    costs: Vec<f64>,
    edges: Vec<(usize, usize)>,
    cliques: Vec<Vec<usize>>,
    adjacency: Vec<Vec<usize>>,
}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

impl ProblemInstance {
    /// Builds an instance from an explicit edge list and cover. Edges are
    /// stored as ordered pairs, sorted and deduplicated.
    pub fn new(costs: Vec<f64>, edges: Vec<(usize, usize)>, cliques: Vec<Vec<usize>>) -> Self {
        let mut edges: Vec<(usize, usize)> =
            edges.into_iter().map(|(u, v)| ordered(u, v)).collect();
        edges.sort_unstable();
        edges.dedup();

        let n = costs.len();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            if u < n && v < n && u != v {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        Self {
            costs,
            edges,
            cliques,
            adjacency,
        }
    }

    /// Builds an instance whose edge set is exactly the union of all pairs
    /// inside the given cliques. This is how instance files are interpreted.
    pub fn from_cliques(costs: Vec<f64>, cliques: Vec<Vec<usize>>) -> Self {
        let mut edges = Vec::new();
        for clique in &cliques {
            for (a, &u) in clique.iter().enumerate() {
                for &v in &clique[a + 1..] {
                    if u != v {
                        edges.push((u, v));
                    }
                }
            }
        }
        Self::new(costs, edges, cliques)
    }

    /// A graph without a cover yet; pair with [`Self::edge_cover`] or
    /// [`Self::greedy_clique_cover`].
    pub fn from_edges(costs: Vec<f64>, edges: Vec<(usize, usize)>) -> Self {
        Self::new(costs, edges, Vec::new())
    }

    pub fn node_count(&self) -> usize {
        self.costs.len()
    }

    pub fn clique_count(&self) -> usize {
        self.cliques.len()
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        u < self.adjacency.len() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Same graph and costs, different cover.
    pub fn with_cliques(&self, cliques: Vec<Vec<usize>>) -> Self {
        Self {
            costs: self.costs.clone(),
            edges: self.edges.clone(),
            cliques,
            adjacency: self.adjacency.clone(),
        }
    }

    /// Sum of costs of the given nodes.
    pub fn objective(&self, selected: &[usize]) -> f64 {
        selected.iter().map(|&i| self.costs[i]).sum()
    }

    /// Returns the first edge with both endpoints in `selected`, if any.
    pub fn conflicting_edge(&self, selected: &[usize]) -> Option<(usize, usize)> {
        let mut chosen = vec![false; self.node_count()];
        for &i in selected {
            chosen[i] = true;
        }
        self.edges
            .iter()
            .copied()
            .find(|&(u, v)| chosen[u] && chosen[v])
    }

    /// Checks every structural invariant and reports all violations.
    pub fn validate(&self) -> ValidationReport {
        let n = self.node_count();
        let mut violations = Vec::new();

        for (i, c) in self.costs.iter().enumerate() {
            if !c.is_finite() {
                violations.push(Violation::NonFiniteCost { node: i });
            }
        }

        for &(u, v) in &self.edges {
            if u >= n || v >= n {
                violations.push(Violation::EdgeOutOfRange { edge: (u, v) });
            } else if u == v {
                violations.push(Violation::SelfLoop { node: u });
            }
        }

        let mut covered_nodes = vec![false; n];
        let mut covered_pairs: HashSet<(usize, usize)> = HashSet::new();
        for (j, clique) in self.cliques.iter().enumerate() {
            let mut seen = HashSet::new();
            let mut in_range = true;
            for &i in clique {
                if i >= n {
                    violations.push(Violation::CliqueOutOfRange { clique: j, node: i });
                    in_range = false;
                } else if !seen.insert(i) {
                    violations.push(Violation::DuplicateInClique { clique: j, node: i });
                } else {
                    covered_nodes[i] = true;
                }
            }
            if !in_range {
                continue;
            }
            for (a, &u) in clique.iter().enumerate() {
                for &v in &clique[a + 1..] {
                    if u == v {
                        continue;
                    }
                    if !self.is_adjacent(u, v) {
                        violations.push(Violation::NotAClique {
                            clique: j,
                            pair: ordered(u, v),
                        });
                    }
                    covered_pairs.insert(ordered(u, v));
                }
            }
        }

        for &(u, v) in &self.edges {
            if u < n && v < n && u != v && !covered_pairs.contains(&(u, v)) {
                violations.push(Violation::UncoveredEdge { edge: (u, v) });
            }
        }
        for (i, covered) in covered_nodes.into_iter().enumerate() {
            if !covered {
                violations.push(Violation::UncoveredNode { node: i });
            }
        }

        ValidationReport { violations }
    }

    /// Drops every node with non-positive cost. Returns the reduced instance
    /// and, for each kept node, its index in `self`.
    pub fn strip_nonpositive(&self) -> (ProblemInstance, Vec<usize>) {
        let mut mapping = Vec::new();
        let mut new_index = vec![usize::MAX; self.node_count()];
        for (i, &c) in self.costs.iter().enumerate() {
            if c > 0.0 {
                new_index[i] = mapping.len();
                mapping.push(i);
            }
        }
        let costs = mapping.iter().map(|&i| self.costs[i]).collect();
        let keep = |i: usize| i < new_index.len() && new_index[i] != usize::MAX;
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| keep(u) && keep(v))
            .map(|&(u, v)| (new_index[u], new_index[v]))
            .collect();
        let cliques = self
            .cliques
            .iter()
            .map(|k| {
                k.iter()
                    .filter(|&&i| keep(i))
                    .map(|&i| new_index[i])
                    .collect::<Vec<_>>()
            })
            .filter(|k| !k.is_empty())
            .collect();
        (ProblemInstance::new(costs, edges, cliques), mapping)
    }

    /// One two-element clique per edge plus a singleton for every isolated
    /// node: the loosest cover of the graph.
    pub fn edge_cover(&self) -> ProblemInstance {
        let mut cliques: Vec<Vec<usize>> = self
            .edges
            .iter()
            .filter(|(u, v)| u != v)
            .map(|&(u, v)| vec![u, v])
            .collect();
        for (i, nbrs) in self.adjacency.iter().enumerate() {
            if nbrs.is_empty() {
                cliques.push(vec![i]);
            }
        }
        self.with_cliques(cliques)
    }

    /// Covers the graph with maximal cliques: every still-uncovered edge is
    /// grown by scanning its common neighbors in a seeded random order.
    /// Isolated nodes get singleton cliques.
    pub fn greedy_clique_cover(&self, seed: u64) -> ProblemInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut covered: HashSet<(usize, usize)> = HashSet::new();
        let mut cliques = Vec::new();

        for &(u, v) in &self.edges {
            if u == v || covered.contains(&(u, v)) {
                continue;
            }
            let mut candidates = intersect_sorted(&self.adjacency[u], &self.adjacency[v]);
            candidates.shuffle(&mut rng);
            let mut clique = vec![u, v];
            for w in candidates {
                if clique.iter().all(|&k| self.is_adjacent(k, w)) {
                    clique.push(w);
                }
            }
            clique.sort_unstable();
            for (a, &p) in clique.iter().enumerate() {
                for &q in &clique[a + 1..] {
                    covered.insert((p, q));
                }
            }
            cliques.push(clique);
        }
        for (i, nbrs) in self.adjacency.iter().enumerate() {
            if nbrs.is_empty() {
                cliques.push(vec![i]);
            }
        }
        self.with_cliques(cliques)
    }

    /// Removes duplicate cliques and cliques contained in another clique.
    /// Never applied implicitly.
    pub fn dedupe(&self) -> ProblemInstance {
        let mut sorted: Vec<Vec<usize>> = self
            .cliques
            .iter()
            .map(|k| {
                let mut k = k.clone();
                k.sort_unstable();
                k.dedup();
                k
            })
            .collect();
        // Larger cliques first so a subset is always checked against its supersets.
        sorted.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        let mut kept: Vec<Vec<usize>> = Vec::new();
        for clique in sorted {
            let contained = kept.iter().any(|big| is_sorted_subset(&clique, big));
            if !contained {
                kept.push(clique);
            }
        }
        self.with_cliques(kept)
    }

    /// Slack-augmented equality form. Fails on instances that do not pass
    /// [`Self::validate`].
    pub fn augment(&self) -> Result<AugmentedInstance> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(MwisError::InvalidInstance(report));
        }
        Ok(AugmentedInstance::build(self.clone()))
    }
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn is_sorted_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|x| big.binary_search(x).is_ok())
}

/// One violated instance invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonFiniteCost { node: usize },
    EdgeOutOfRange { edge: (usize, usize) },
    SelfLoop { node: usize },
    CliqueOutOfRange { clique: usize, node: usize },
    DuplicateInClique { clique: usize, node: usize },
    NotAClique { clique: usize, pair: (usize, usize) },
    UncoveredEdge { edge: (usize, usize) },
    UncoveredNode { node: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFiniteCost { node } => write!(f, "node {node} has a non-finite cost"),
            Violation::EdgeOutOfRange { edge } => {
                write!(
                    f,
                    "edge {{{}, {}}} references a missing node",
                    edge.0, edge.1
                )
            }
            Violation::SelfLoop { node } => write!(f, "self-loop on node {node}"),
            Violation::CliqueOutOfRange { clique, node } => {
                write!(f, "clique {clique} references missing node {node}")
            }
            Violation::DuplicateInClique { clique, node } => {
                write!(f, "clique {clique} lists node {node} twice")
            }
            Violation::NotAClique { clique, pair } => write!(
                f,
                "clique {clique} is not complete: {{{}, {}}} is not an edge",
                pair.0, pair.1
            ),
            Violation::UncoveredEdge { edge } => {
                write!(f, "edge {{{}, {}}} is in no clique", edge.0, edge.1)
            }
            Violation::UncoveredNode { node } => write!(f, "node {node} is in no clique"),
        }
    }
}

/// Every violated invariant of an instance; empty iff the instance is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Equality form of the clique cover relaxation: variable `n + j` is the
/// slack of clique `j`, so every extended clique sums to exactly one.
///
/// Costs live over all `n + m` variables. A freshly augmented instance has
/// zero slack costs; [`AugmentedInstance::reparametrize`] produces the
/// shifted and rescaled cost vectors the solvers run on, and records the
/// affine map back to original objective units.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedInstance {
    base: ProblemInstance,
    costs: Vec<f64>,
    cliques: Vec<Vec<usize>>,
    incidence: Vec<Vec<usize>>,
    scale_factor: f64,
    offset: f64,
    original_index: Vec<usize>,
}

impl AugmentedInstance {
    fn build(base: ProblemInstance) -> Self {
        let n = base.node_count();
        let m = base.clique_count();
        let mut costs = base.costs.clone();
        costs.resize(n + m, 0.0);

        let cliques: Vec<Vec<usize>> = base
            .cliques
            .iter()
            .enumerate()
            .map(|(j, k)| {
                let mut k = k.clone();
                k.sort_unstable();
                k.push(n + j);
                k
            })
            .collect();

        let mut incidence = vec![Vec::new(); n + m];
        for (j, k) in cliques.iter().enumerate() {
            for &i in k {
                incidence[i].push(j);
            }
        }

        Self {
            original_index: (0..n).collect(),
            base,
            costs,
            cliques,
            incidence,
            scale_factor: 1.0,
            offset: 0.0,
        }
    }

    pub fn base(&self) -> &ProblemInstance {
        &self.base
    }

    /// Number of original (non-slack) variables.
    pub fn node_count(&self) -> usize {
        self.base.node_count()
    }

    pub fn clique_count(&self) -> usize {
        self.cliques.len()
    }

    /// `n + m`.
    pub fn var_count(&self) -> usize {
        self.costs.len()
    }

    pub fn slack(&self, clique: usize) -> usize {
        self.node_count() + clique
    }

    pub fn is_slack(&self, var: usize) -> bool {
        var >= self.node_count()
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    /// Extended clique: sorted node indices followed by the slack.
    pub fn clique(&self, j: usize) -> &[usize] {
        &self.cliques[j]
    }

    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    /// Cliques containing variable `i`, ascending.
    pub fn incidence(&self, i: usize) -> &[usize] {
        &self.incidence[i]
    }

    pub fn scale_factor(&self) -> f64 {
        self.scale_factor
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Maps an objective or bound in this instance's cost units back to the
    /// units of the original, unscaled problem.
    pub fn unscale(&self, value: f64) -> f64 {
        self.scale_factor * value + self.offset
    }

    /// Index in the caller's original instance for each node of `base`.
    pub fn original_index(&self) -> &[usize] {
        &self.original_index
    }

    pub fn with_original_index(mut self, mapping: Vec<usize>) -> Self {
        assert_eq!(
            mapping.len(),
            self.node_count(),
            "mapping must cover every node"
        );
        self.original_index = mapping;
        self
    }

    /// Equivalent transformation by `lambda` followed by division by
    /// `scale`. Objectives of clique-feasible points are preserved up to the
    /// recorded affine map.
    pub fn reparametrize(&self, lambda: &[f64], scale: f64) -> AugmentedInstance {
        assert!(scale > 0.0 && scale.is_finite(), "scale must be positive");
        let mut costs = self.costs.clone();
        for (j, k) in self.cliques.iter().enumerate() {
            for &i in k {
                costs[i] -= lambda[j];
            }
        }
        for c in &mut costs {
            *c /= scale;
        }
        let shift: f64 = lambda.iter().sum();
        AugmentedInstance {
            base: self.base.clone(),
            costs,
            cliques: self.cliques.clone(),
            incidence: self.incidence.clone(),
            scale_factor: self.scale_factor * scale,
            offset: self.offset + self.scale_factor * shift,
            original_index: self.original_index.clone(),
        }
    }
}
