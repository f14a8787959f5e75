//! Python module `cclab`: instances, the relaxation solver, rounding, the
//! pruning pipeline, metrics and the betting game.
//!
//! Reports come back as plain dicts (decoded from the same JSON the CLI
//! prints); clusterings are lists of labels.

use std::path::PathBuf;

use cclab::game::{simulate_game as sim, GameConfig, StrategyKind};
use cclab::instance::{generate_basic as gen_basic, SignPolicy};
use cclab::ptas::{run_ptas_with, DeltaMode, PtasConfig};
use cclab::recovery::RecoveryParams;
use cclab::{io, metrics, Clustering, Edge, Error, Sign, SolverOptions};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) => PyValueError::new_err(e.to_string()),
        Error::Parse { .. } | Error::Io(_) => PyOSError::new_err(e.to_string()),
        Error::InvariantViolation(_) | Error::Protocol(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn clustering(labels: Vec<usize>) -> PyResult<Clustering> {
    Clustering::new(labels).map_err(err)
}

#[pyclass(name = "Instance", module = "cclab", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyInstance {
    inner: cclab::Instance,
}

#[pymethods]
impl PyInstance {
    /// `edges` are `(u, v, cost, sign)` with sign `"+"` or `"-"`.
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize, f64, String)>) -> PyResult<Self> {
        let edges = edges
            .into_iter()
            .map(|(u, v, c, s)| {
                let sign = match s.as_str() {
                    "+" => Sign::Plus,
                    "-" => Sign::Minus,
                    _ => return Err(PyValueError::new_err(format!("sign must be '+' or '-', got {s:?}"))),
                };
                Ok(Edge::new(u, v, c, sign))
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyInstance { inner: cclab::Instance::new(n, edges).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    fn total_cost(&self) -> f64 {
        self.inner.total_cost()
    }

    fn edges(&self) -> Vec<(usize, usize, f64, String)> {
        self.inner.edges().iter().map(|e| (e.u, e.v, e.cost, e.sign.symbol().to_string())).collect()
    }

    /// Writes the instance and, when given, its truth sidecar.
    #[pyo3(signature = (path, truth=None))]
    fn save(&self, path: PathBuf, truth: Option<&PyGroundTruth>) -> PyResult<()> {
        io::save_instance(&path, &self.inner, truth.map(|t| &t.inner)).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Instance(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

#[pyclass(name = "GroundTruth", module = "cclab", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyGroundTruth {
    inner: cclab::GroundTruth,
}

#[pymethods]
impl PyGroundTruth {
    #[getter]
    fn planted(&self) -> Vec<usize> {
        self.inner.planted.labels().to_vec()
    }

    #[getter]
    fn random_edges(&self) -> Vec<usize> {
        self.inner.random_edges.clone()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }
}

#[pyclass(name = "SdpSolution", module = "cclab", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PySolution {
    inner: cclab::SdpSolution,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn trace<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.inner.trace)
    }

    /// Rows of the `n x rank` factor.
    fn embedding(&self) -> Vec<Vec<f64>> {
        (0..self.inner.n()).map(|u| self.inner.row(u).to_vec()).collect()
    }

    fn inner(&self, u: usize, v: usize) -> PyResult<f64> {
        if u >= self.inner.n() || v >= self.inner.n() {
            return Err(PyValueError::new_err("vertex out of range"));
        }
        Ok(self.inner.inner(u, v))
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        std::fs::write(&path, io::format_solution(&self.inner)).map_err(|e| PyOSError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!("SdpSolution(n={}, rank={}, objective={})", self.inner.n(), self.inner.rank(), self.inner.objective)
    }
}

/// Reads an instance and its truth sidecar (if present).
#[pyfunction]
fn load_instance(path: PathBuf) -> PyResult<(PyInstance, Option<PyGroundTruth>)> {
    let (inner, truth) = io::load_instance(&path).map_err(err)?;
    Ok((PyInstance { inner }, truth.map(|inner| PyGroundTruth { inner })))
}

#[pyfunction]
fn generate_gnp_planted(n: usize, p: f64, k: usize, epsilon: f64, seed: u64) -> PyResult<(PyInstance, PyGroundTruth)> {
    let (inner, truth) = cclab::instance::generate_gnp_planted(n, p, k, epsilon, seed).map_err(err)?;
    Ok((PyInstance { inner }, PyGroundTruth { inner: truth }))
}

/// Basic model on given `(u, v, cost)` pairs; `policy` is flip, keep or random.
#[pyfunction]
#[pyo3(signature = (n, pairs, planted, epsilon, seed, policy="flip"))]
fn generate_basic(
    n: usize,
    pairs: Vec<(usize, usize, f64)>,
    planted: Vec<usize>,
    epsilon: f64,
    seed: u64,
    policy: &str,
) -> PyResult<(PyInstance, PyGroundTruth)> {
    let policy = match policy {
        "flip" => SignPolicy::Flip,
        "keep" => SignPolicy::Keep,
        "random" => SignPolicy::Random,
        _ => return Err(PyValueError::new_err(format!("unknown sign policy {policy:?}"))),
    };
    let (inner, truth) = gen_basic(n, &pairs, &clustering(planted)?, epsilon, policy, seed).map_err(err)?;
    Ok((PyInstance { inner }, PyGroundTruth { inner: truth }))
}

fn solver_options(seed: u64, rank: Option<usize>, k_guess: usize, max_iters: usize, restarts: usize, tol: f64) -> SolverOptions {
    SolverOptions { seed, rank, k_guess, max_iters, restarts, tol, ..Default::default() }
}

#[pyfunction]
#[pyo3(signature = (instance, seed, rank=None, k_guess=4, max_iters=3000, restarts=5, tol=1e-7))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    instance: &PyInstance,
    seed: u64,
    rank: Option<usize>,
    k_guess: usize,
    max_iters: usize,
    restarts: usize,
    tol: f64,
) -> PyResult<PySolution> {
    let opts = solver_options(seed, rank, k_guess, max_iters, restarts, tol);
    let inner = py.detach(|| cclab::sdp::solve(&instance.inner, &opts)).map_err(err)?;
    Ok(PySolution { inner })
}

/// Integral embedding of a clustering (orthogonal basis vectors per cluster).
#[pyfunction]
fn embed_clustering(instance: &PyInstance, labels: Vec<usize>, rank: usize) -> PyResult<PySolution> {
    let inner = cclab::sdp::embed_clustering(&instance.inner, &clustering(labels)?, rank).map_err(err)?;
    Ok(PySolution { inner })
}

fn delta_mode(delta: &Bound<'_, PyAny>) -> PyResult<DeltaMode> {
    if let Ok(s) = delta.extract::<String>() {
        if s == "schedule" {
            return Ok(DeltaMode::Schedule);
        }
        return Err(PyValueError::new_err(format!("delta must be a float or 'schedule', got {s:?}")));
    }
    Ok(DeltaMode::Fixed(delta.extract::<f64>()?))
}

/// Prune-then-local-search on a solved relaxation. Returns `(labels, report)`.
#[pyfunction]
#[pyo3(signature = (instance, solution, delta=None, max_passes=50, truth=None))]
fn run_ptas<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    solution: &PySolution,
    delta: Option<&Bound<'py, PyAny>>,
    max_passes: usize,
    truth: Option<&PyGroundTruth>,
) -> PyResult<(Vec<usize>, Bound<'py, PyAny>)> {
    let config = PtasConfig {
        delta: delta.map(delta_mode).transpose()?.unwrap_or(DeltaMode::Fixed(0.1)),
        max_passes,
        ..Default::default()
    };
    let truth = truth.map(|t| &t.inner);
    let (found, report) = py
        .detach(|| run_ptas_with(&instance.inner, &solution.inner, &config, truth))
        .map_err(err)?;
    Ok((found.labels().to_vec(), to_dict(py, &report)?))
}

fn recovery_params(rho_core: f64, cleanup: bool, cleanup_min_size: Option<usize>, merge_threshold: f64) -> PyResult<RecoveryParams> {
    let params = RecoveryParams {
        rho_core,
        cleanup_enabled: cleanup,
        cleanup_min_size,
        cleanup_merge_threshold: merge_threshold,
    };
    params.validate().map_err(err)?;
    Ok(params)
}

/// Greedy ball-graph rounding of a solution, with cleanup.
#[pyfunction]
#[pyo3(signature = (solution, rho_core=0.1, cleanup=true, cleanup_min_size=None, merge_threshold=0.5))]
fn round(
    solution: &PySolution,
    rho_core: f64,
    cleanup: bool,
    cleanup_min_size: Option<usize>,
    merge_threshold: f64,
) -> PyResult<Vec<usize>> {
    let params = recovery_params(rho_core, cleanup, cleanup_min_size, merge_threshold)?;
    let found = cclab::recovery::round(&solution.inner, &params).map_err(err)?;
    Ok(found.labels().to_vec())
}

/// Solve then round. Returns `(labels, solution)`.
#[pyfunction]
#[pyo3(signature = (instance, seed, k_guess=4, rho_core=0.1, cleanup=true, cleanup_min_size=None, merge_threshold=0.5))]
#[allow(clippy::too_many_arguments)]
fn recover(
    py: Python<'_>,
    instance: &PyInstance,
    seed: u64,
    k_guess: usize,
    rho_core: f64,
    cleanup: bool,
    cleanup_min_size: Option<usize>,
    merge_threshold: f64,
) -> PyResult<(Vec<usize>, PySolution)> {
    let params = recovery_params(rho_core, cleanup, cleanup_min_size, merge_threshold)?;
    let opts = SolverOptions { seed, k_guess, ..Default::default() };
    let (found, inner) = py
        .detach(|| cclab::recovery::recover(&instance.inner, &opts, &params))
        .map_err(err)?;
    Ok((found.labels().to_vec(), PySolution { inner }))
}

#[pyfunction]
fn clustering_cost(instance: &PyInstance, labels: Vec<usize>) -> PyResult<f64> {
    metrics::clustering_cost(&instance.inner, &clustering(labels)?).map_err(err)
}

#[pyfunction]
fn classification_error<'py>(py: Python<'py>, planted: Vec<usize>, found: Vec<usize>) -> PyResult<Bound<'py, PyAny>> {
    let r = metrics::classification_error(&clustering(planted)?, &clustering(found)?).map_err(err)?;
    to_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (instance, truth, solution, delta=None))]
fn structural_stats<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    truth: &PyGroundTruth,
    solution: &PySolution,
    delta: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let st = metrics::structural_stats(&instance.inner, &truth.inner, &solution.inner, delta).map_err(err)?;
    let dict = to_dict(py, &st)?;
    dict.cast::<PyDict>()?.set_item("surviving_fraction", st.surviving_fraction())?;
    Ok(dict)
}

#[pyfunction]
fn check_assumptions<'py>(py: Python<'py>, instance: &PyInstance, truth: &PyGroundTruth) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &metrics::check_assumptions(&instance.inner, &truth.inner).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (solution, truth, rho_core=metrics::RHO_CORE, rho_inter=metrics::RHO_INTER))]
fn core_structure<'py>(
    py: Python<'py>,
    solution: &PySolution,
    truth: &PyGroundTruth,
    rho_core: f64,
    rho_inter: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &metrics::core_structure(&solution.inner, &truth.inner, rho_core, rho_inter).map_err(err)?)
}

/// Monte-Carlo estimate of the betting-game event probability.
#[pyfunction]
#[pyo3(signature = (m, epsilon, lambda_, trials, seed, strategy="fixed-order"))]
fn simulate_game<'py>(
    py: Python<'py>,
    m: usize,
    epsilon: f64,
    lambda_: f64,
    trials: usize,
    seed: u64,
    strategy: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let kind = StrategyKind::from_name(strategy)
        .ok_or_else(|| PyValueError::new_err(format!("unknown strategy {strategy:?}")))?;
    let config = GameConfig::new(m, epsilon, kind, trials, lambda_);
    let out = py.detach(|| sim(&config, seed)).map_err(err)?;
    to_dict(py, &out)
}

#[pymodule]
#[pyo3(name = "cclab")]
fn cclab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PyGroundTruth>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(load_instance, m)?)?;
    m.add_function(wrap_pyfunction!(generate_gnp_planted, m)?)?;
    m.add_function(wrap_pyfunction!(generate_basic, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(embed_clustering, m)?)?;
    m.add_function(wrap_pyfunction!(run_ptas, m)?)?;
    m.add_function(wrap_pyfunction!(round, m)?)?;
    m.add_function(wrap_pyfunction!(recover, m)?)?;
    m.add_function(wrap_pyfunction!(clustering_cost, m)?)?;
    m.add_function(wrap_pyfunction!(classification_error, m)?)?;
    m.add_function(wrap_pyfunction!(structural_stats, m)?)?;
    m.add_function(wrap_pyfunction!(check_assumptions, m)?)?;
    m.add_function(wrap_pyfunction!(core_structure, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_game, m)?)?;
    Ok(())
}
