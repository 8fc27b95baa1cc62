//! Dinic max-flow over real capacities, with a minimum cut read off the
//! final residual graph.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    rev: usize,
    cap: f64,
    uncuttable: bool,
}

/// Directed network with finite arcs and uncuttable arcs. Uncuttable arcs
/// get capacity `sum of finite capacities + 1` when the flow is solved.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    graph: Vec<Vec<Arc>>,
    finite_total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxFlow {
    pub value: f64,
    /// `true` for nodes on the source side of a minimum cut.
    pub source_side: Vec<bool>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        Self {
            graph: vec![Vec::new(); nodes],
            finite_total: 0.0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.graph.len()
    }

    fn push_arc(&mut self, from: usize, to: usize, cap: f64, uncuttable: bool) {
        let rev_from = self.graph[to].len() + usize::from(from == to);
        let rev_to = self.graph[from].len();
        self.graph[from].push(Arc {
            to,
            rev: rev_from,
            cap,
            uncuttable,
        });
        self.graph[to].push(Arc {
            to: from,
            rev: rev_to,
            cap: 0.0,
            uncuttable: false,
        });
    }

    pub fn add_arc(&mut self, from: usize, to: usize, capacity: f64) {
        assert!(
            capacity >= 0.0 && capacity.is_finite(),
            "capacity must be finite and non-negative"
        );
        self.finite_total += capacity;
        self.push_arc(from, to, capacity, false);
    }

    pub fn add_uncuttable(&mut self, from: usize, to: usize) {
        self.push_arc(from, to, 0.0, true);
    }

    /// Maximum `source -> sink` flow. Consumes the network's capacities.
    pub fn max_flow(mut self, source: usize, sink: usize) -> MaxFlow {
        let big = self.finite_total + 1.0;
        for arcs in &mut self.graph {
            for arc in arcs.iter_mut() {
                if arc.uncuttable {
                    arc.cap = big;
                }
            }
        }
        let eps = 1e-12 * big;
        let n = self.graph.len();
        let mut value = 0.0;
        let mut level = vec![usize::MAX; n];
        let mut next = vec![0usize; n];

        if source != sink {
            while self.bfs(source, sink, eps, &mut level) {
                next.iter_mut().for_each(|k| *k = 0);
                loop {
                    let pushed = self.dfs(source, sink, f64::INFINITY, eps, &level, &mut next);
                    if pushed <= eps {
                        break;
                    }
                    value += pushed;
                }
            }
        }

        let source_side = self.reachable(source, eps);
        MaxFlow { value, source_side }
    }

    fn bfs(&self, source: usize, sink: usize, eps: f64, level: &mut [usize]) -> bool {
        level.iter_mut().for_each(|l| *l = usize::MAX);
        level[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for arc in &self.graph[u] {
                if arc.cap > eps && level[arc.to] == usize::MAX {
                    level[arc.to] = level[u] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        level[sink] != usize::MAX
    }

    fn dfs(
        &mut self,
        u: usize,
        sink: usize,
        limit: f64,
        eps: f64,
        level: &[usize],
        next: &mut [usize],
    ) -> f64 {
        if u == sink {
            return limit;
        }
        while next[u] < self.graph[u].len() {
            let k = next[u];
            let (to, cap) = (self.graph[u][k].to, self.graph[u][k].cap);
            if cap > eps && level[to] == level[u] + 1 {
                let pushed = self.dfs(to, sink, limit.min(cap), eps, level, next);
                if pushed > eps {
                    let rev = self.graph[u][k].rev;
                    self.graph[u][k].cap -= pushed;
                    self.graph[to][rev].cap += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0.0
    }

    fn reachable(&self, source: usize, eps: f64) -> Vec<bool> {
        let mut seen = vec![false; self.graph.len()];
        if source >= seen.len() {
            return seen;
        }
        seen[source] = true;
        let mut stack = vec![source];
        while let Some(u) = stack.pop() {
            for arc in &self.graph[u] {
                if arc.cap > eps && !seen[arc.to] {
                    seen[arc.to] = true;
                    stack.push(arc.to);
                }
            }
        }
        seen
    }
}
