//! Python bindings: instances, the solver, the exact oracle and fusion.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use mwis_core::generate::random_instance;
use mwis_core::io::{format_instance, parse_instance, read_instance, write_instance};
use mwis_core::oracle::{brute_force_mwis, lp_reference};
use mwis_core::primal::fuse as fuse_solutions;
use mwis_core::{
    solve as run_solver, IntegerSolution, Mode, MwisError, ProblemInstance, RunConfig, Scheduler,
    Truncation,
};

fn to_py(err: MwisError) -> PyErr {
    match err {
        MwisError::Parse(_)
        | MwisError::InvalidInstance(_)
        | MwisError::Precondition(_)
        | MwisError::NotIndependent(..)
        | MwisError::TooLarge { .. } => PyValueError::new_err(err.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_choice<T: serde::de::DeserializeOwned>(name: &str, value: &str) -> PyResult<T> {
    serde_json::from_value(serde_json::Value::String(value.to_owned()))
        .map_err(|_| PyValueError::new_err(format!("unknown {name} `{value}`")))
}

/// Graph with node costs and a clique cover.
#[pyclass(name = "Instance", module = "mwis", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyInstance {
    inner: ProblemInstance,
}

#[pymethods]
impl PyInstance {
    /// Instance whose edges are all pairs inside the given cliques.
    #[new]
    fn new(costs: Vec<f64>, cliques: Vec<Vec<usize>>) -> Self {
        Self {
            inner: ProblemInstance::from_cliques(costs, cliques),
        }
    }

    /// Graph from an edge list, covered by `"greedy"` maximal cliques or by
    /// `"edge"` cliques.
    #[staticmethod]
    #[pyo3(signature = (costs, edges, cover = "greedy", seed = 0))]
    fn from_edges(
        costs: Vec<f64>,
        edges: Vec<(usize, usize)>,
        cover: &str,
        seed: u64,
    ) -> PyResult<Self> {
        let graph = ProblemInstance::from_edges(costs, edges);
        let inner = match cover {
            "greedy" => graph.greedy_clique_cover(seed),
            "edge" => graph.edge_cover(),
            other => return Err(PyValueError::new_err(format!("unknown cover `{other}`"))),
        };
        Ok(Self { inner })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let inner = parse_instance(text).map_err(|e| to_py(e.into()))?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: read_instance(path).map_err(to_py)?,
        })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        write_instance(path, &self.inner).map_err(to_py)
    }

    fn to_text(&self) -> String {
        format_instance(&self.inner)
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn costs(&self) -> Vec<f64> {
        self.inner.costs().to_vec()
    }

    #[getter]
    fn cliques(&self) -> Vec<Vec<usize>> {
        self.inner.cliques().to_vec()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    /// Violated invariants as messages; empty for a valid instance.
    fn validate(&self) -> Vec<String> {
        self.inner
            .validate()
            .violations
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    fn edge_cover(&self) -> Self {
        Self {
            inner: self.inner.edge_cover(),
        }
    }

    #[pyo3(signature = (seed = 0))]
    fn greedy_clique_cover(&self, seed: u64) -> Self {
        Self {
            inner: self.inner.greedy_clique_cover(seed),
        }
    }

    fn objective(&self, selected: Vec<usize>) -> f64 {
        self.inner.objective(&selected)
    }

    fn is_independent(&self, selected: Vec<usize>) -> bool {
        self.inner.conflicting_edge(&selected).is_none()
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(nodes={}, edges={}, cliques={})",
            self.inner.node_count(),
            self.inner.edges().len(),
            self.inner.clique_count()
        )
    }
}

#[pyclass(name = "SolveResult", module = "mwis", frozen, get_all)]
struct PySolveResult {
    status: String,
    dual_bound: f64,
    primal_lp_bound: f64,
    relative_gap: f64,
    objective: f64,
    selected: Vec<usize>,
    lp_estimate: Vec<f64>,
    sweeps: u64,
    /// One JSON object per batch.
    trace: Vec<String>,
}

#[pymethods]
impl PySolveResult {
    fn __repr__(&self) -> String {
        format!(
            "SolveResult(status={:?}, dual_bound={}, objective={}, sweeps={})",
            self.status, self.dual_bound, self.objective, self.sweeps
        )
    }
}

#[pyfunction]
#[pyo3(signature = (
    instance,
    mode = "lp-exp",
    scheduler = "gap",
    truncation = "none",
    target_gap = 1e-3,
    max_sweeps = 1_000_000,
    seed = 0,
    tau_stab = None,
    primal_rounds = 50,
    wall_seconds = None,
))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    instance: &PyInstance,
    mode: &str,
    scheduler: &str,
    truncation: &str,
    target_gap: f64,
    max_sweeps: u64,
    seed: u64,
    tau_stab: Option<f64>,
    primal_rounds: usize,
    wall_seconds: Option<f64>,
) -> PyResult<PySolveResult> {
    let cfg = RunConfig {
        mode: parse_choice::<Mode>("mode", mode)?,
        scheduler: parse_choice::<Scheduler>("scheduler", scheduler)?,
        truncation: parse_choice::<Truncation>("truncation", truncation)?,
        target_gap,
        max_sweeps,
        seed,
        tau_stab,
        primal_rounds,
        wall_seconds,
        ..RunConfig::default()
    };
    let inner = &instance.inner;
    let out = py.detach(|| run_solver(inner, &cfg)).map_err(to_py)?;
    let trace = out
        .trace
        .iter()
        .map(|r| serde_json::to_string(r).map_err(|e| PyRuntimeError::new_err(e.to_string())))
        .collect::<PyResult<_>>()?;
    let status = serde_json::to_value(out.status)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    Ok(PySolveResult {
        status,
        dual_bound: out.dual_bound,
        primal_lp_bound: out.primal_lp_bound,
        relative_gap: out.relative_gap,
        objective: out.solution.objective,
        selected: out.solution.selected,
        lp_estimate: out.lp_estimate,
        sweeps: out.sweeps,
        trace,
    })
}

/// Exact optimum `(value, selected)` for instances of at most 25 nodes.
#[pyfunction]
fn brute_force(instance: &PyInstance) -> PyResult<(f64, Vec<usize>)> {
    let sol = brute_force_mwis(&instance.inner).map_err(to_py)?;
    Ok((sol.objective, sol.selected))
}

/// Best independent set combining two independent sets `(value, selected)`.
#[pyfunction]
fn fuse(instance: &PyInstance, a: Vec<usize>, b: Vec<usize>) -> PyResult<(f64, Vec<usize>)> {
    let inst = &instance.inner;
    let a = IntegerSolution::evaluate(inst, a);
    let b = IntegerSolution::evaluate(inst, b);
    let fused = fuse_solutions(inst, &a, &b).map_err(to_py)?;
    Ok((fused.objective, fused.selected))
}

/// LP bracket `(dual_bound, primal_bound)` with relative width at most
/// `target_gap`.
#[pyfunction]
#[pyo3(signature = (instance, target_gap = 1e-4))]
fn lp_bracket(py: Python<'_>, instance: &PyInstance, target_gap: f64) -> PyResult<(f64, f64)> {
    let inner = &instance.inner;
    let bracket = py
        .detach(|| lp_reference(inner, target_gap))
        .map_err(to_py)?;
    Ok((bracket.dual_bound, bracket.primal_bound))
}

/// Random graph with a greedy clique cover, deterministic per seed.
#[pyfunction]
#[pyo3(signature = (n, edge_density, cost_min = 1.0, cost_max = 10.0, seed = 0))]
fn generate(n: usize, edge_density: f64, cost_min: f64, cost_max: f64, seed: u64) -> PyInstance {
    PyInstance {
        inner: random_instance(n, edge_density, (cost_min, cost_max), seed),
    }
}

#[pymodule]
fn mwis(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PySolveResult>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    m.add_function(wrap_pyfunction!(fuse, m)?)?;
    m.add_function(wrap_pyfunction!(lp_bracket, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    Ok(())
}
