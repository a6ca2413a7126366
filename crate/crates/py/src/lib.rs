//! Python bindings: graphs, rankings, reduced Google matrices, sensitivities,
//! Θ scores and friendship networks.

// The pyo3 0.22 macros trip this lint on every PyResult signature.
#![allow(clippy::useless_conversion)]

use std::collections::HashMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use regomax::aggregate::{self, EditionRankTable};
use regomax::friendship;
use regomax::google::{self, IterationParams, DEFAULT_ALPHA, DEFAULT_MAX_ITER, DEFAULT_TOL};
use regomax::graph::{read_subset_entries, LoadOptions};
use regomax::sensitivity::{
    sensitivity_table, SensitivityContext, SensitivityParams, DEFAULT_DELTA,
};
use regomax::{io, ordering, regomax as reduction, DenseMatrix, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NotConverged { .. } => PyRuntimeError::new_err(e.to_string()),
        Error::File { .. } | Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn iteration(tol: f64, max_iter: usize) -> PyResult<IterationParams> {
    IterationParams::new(tol, max_iter).map_err(py_err)
}

/// Directed graph in compressed sparse form.
#[pyclass(name = "Graph", module = "regomax", frozen)]
struct PyGraph {
    inner: regomax::DirectedGraph,
}

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (node_count, edges, labels = None))]
    fn new(
        node_count: usize,
        edges: Vec<(usize, usize)>,
        labels: Option<Vec<String>>,
    ) -> PyResult<Self> {
        let mut graph = regomax::DirectedGraph::from_edges(node_count, edges).map_err(py_err)?;
        if let Some(labels) = labels {
            let mut map = regomax::LabelMap::new();
            for (k, name) in labels.into_iter().enumerate() {
                map.insert(k, name).map_err(py_err)?;
            }
            graph = graph.with_labels(map).map_err(py_err)?;
        }
        Ok(PyGraph { inner: graph })
    }

    /// Reads a `src<TAB>dst` edge list and an optional `index<TAB>name` file.
    #[staticmethod]
    #[pyo3(signature = (path, labels = None))]
    fn load(path: PathBuf, labels: Option<PathBuf>) -> PyResult<Self> {
        let (mut graph, _) =
            regomax::load_edge_list(io::open(&path).map_err(py_err)?, LoadOptions::default())
                .map_err(py_err)?;
        if let Some(labels) = labels {
            let map =
                regomax::LabelMap::read(io::open(&labels).map_err(py_err)?).map_err(py_err)?;
            graph = graph.with_labels(map).map_err(py_err)?;
        }
        Ok(PyGraph { inner: graph })
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().collect()
    }

    fn invert(&self) -> PyGraph {
        PyGraph {
            inner: self.inner.invert(),
        }
    }

    fn name(&self, node: usize) -> String {
        self.inner.display_name(node)
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(nodes={}, edges={})",
            self.inner.node_count(),
            self.inner.edge_count()
        )
    }
}

/// Probability vector with its ordering and convergence record.
#[pyclass(name = "RankVector", module = "regomax", frozen, get_all)]
struct PyRankVector {
    probabilities: Vec<f64>,
    ordering: Vec<usize>,
    residual: f64,
    iterations: usize,
    converged: bool,
}

impl From<regomax::RankVector> for PyRankVector {
    fn from(r: regomax::RankVector) -> Self {
        PyRankVector {
            probabilities: r.probabilities,
            ordering: r.ordering,
            residual: r.residual,
            iterations: r.iterations,
            converged: r.converged,
        }
    }
}

#[pymethods]
impl PyRankVector {
    fn ranks(&self) -> Vec<usize> {
        google::ranks_of(&self.ordering)
    }

    fn __len__(&self) -> usize {
        self.probabilities.len()
    }
}

#[pyfunction]
#[pyo3(signature = (graph, alpha = DEFAULT_ALPHA, tol = DEFAULT_TOL, max_iter = DEFAULT_MAX_ITER))]
fn pagerank(
    py: Python<'_>,
    graph: &PyGraph,
    alpha: f64,
    tol: f64,
    max_iter: usize,
) -> PyResult<PyRankVector> {
    let params = iteration(tol, max_iter)?;
    let op = regomax::GoogleOperator::new(&graph.inner, alpha).map_err(py_err)?;
    Ok(py.allow_threads(|| google::pagerank(&op, params)).into())
}

#[pyfunction]
#[pyo3(signature = (graph, alpha = DEFAULT_ALPHA, tol = DEFAULT_TOL, max_iter = DEFAULT_MAX_ITER))]
fn cheirank(
    py: Python<'_>,
    graph: &PyGraph,
    alpha: f64,
    tol: f64,
    max_iter: usize,
) -> PyResult<PyRankVector> {
    let params = iteration(tol, max_iter)?;
    py.allow_threads(|| google::cheirank(&graph.inner, alpha, params))
        .map(Into::into)
        .map_err(py_err)
}

/// 2DRank ordering from PageRank and CheiRank orderings.
#[pyfunction]
fn two_d_rank(k: Vec<usize>, k_star: Vec<usize>) -> PyResult<Vec<usize>> {
    ordering::two_d_rank(&k, &k_star).map_err(py_err)
}

/// Overlap `η(j)` of two ranked lists for `j = 1..=j_max`.
#[pyfunction]
fn overlap_curve(a: Vec<String>, b: Vec<String>, j_max: usize) -> PyResult<Vec<f64>> {
    regomax::overlap_curve(&a, &b, j_max).map_err(py_err)
}

/// Reduced Google matrix of a node subset.
#[pyclass(name = "ReducedMatrix", module = "regomax", frozen)]
struct PyReducedMatrix {
    inner: regomax::ReducedGoogleMatrix,
}

#[pymethods]
impl PyReducedMatrix {
    /// Reduces `graph` onto `subset` (names or indices, in basis order).
    #[staticmethod]
    #[pyo3(signature = (graph, subset, alpha = DEFAULT_ALPHA, tol = DEFAULT_TOL, max_iter = DEFAULT_MAX_ITER))]
    fn compute(
        py: Python<'_>,
        graph: &PyGraph,
        subset: Vec<String>,
        alpha: f64,
        tol: f64,
        max_iter: usize,
    ) -> PyResult<Self> {
        let subset = graph.inner.resolve_subset(&subset).map_err(py_err)?;
        let mut params = reduction::ReductionParams::with_alpha(alpha);
        params.eigen = iteration(tol, max_iter)?;
        let inner = py
            .allow_threads(|| regomax::compute_components(&graph.inner, &subset, params))
            .map_err(py_err)?;
        Ok(PyReducedMatrix { inner })
    }

    /// Reads a directory written by `export` or by the `reduce` command.
    #[staticmethod]
    fn load(dir: PathBuf) -> PyResult<Self> {
        io::import_reduced(&dir)
            .map(|inner| PyReducedMatrix { inner })
            .map_err(py_err)
    }

    fn export(&self, dir: PathBuf) -> PyResult<()> {
        io::export_reduced(&self.inner, &dir).map_err(py_err)
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.names.clone()
    }

    #[getter]
    fn lambda_c(&self) -> f64 {
        self.inner.lambda_c
    }

    #[getter]
    fn reduced_pagerank(&self) -> Vec<f64> {
        self.inner.reduced_pagerank.clone()
    }

    #[getter]
    fn g_r(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.g_r())
    }

    #[getter]
    fn g_rr(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.g_rr)
    }

    #[getter]
    fn g_pr(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.g_pr)
    }

    #[getter]
    fn g_qr(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.g_qr)
    }

    #[getter]
    fn g_qrnd(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.qrnd())
    }

    fn weights<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let w = self.inner.weights();
        let d = PyDict::new_bound(py);
        d.set_item("rr", w.rr)?;
        d.set_item("pr", w.pr)?;
        d.set_item("qr", w.qr)?;
        d.set_item("qrnd", w.qrnd)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "ReducedMatrix(n_r={}, lambda_c={})",
            self.inner.n_r(),
            self.inner.lambda_c
        )
    }
}

fn position(m: &regomax::ReducedGoogleMatrix, name: &str) -> PyResult<usize> {
    m.position_of(name)
        .ok_or_else(|| PyValueError::new_err(format!("{name:?} is not in the reduced basis")))
}

/// Sensitivities `D(u → c, c′)`: one dict per link target with its
/// diagonal value and the values over `observe` (default: whole basis).
#[pyfunction]
#[pyo3(signature = (reduced, source, targets, observe = None, delta = DEFAULT_DELTA, scheme = "central"))]
fn sensitivity<'py>(
    py: Python<'py>,
    reduced: &PyReducedMatrix,
    source: &str,
    targets: Vec<String>,
    observe: Option<Vec<String>>,
    delta: f64,
    scheme: &str,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let m = &reduced.inner;
    let u = position(m, source)?;
    let targets = targets
        .iter()
        .map(|t| position(m, t))
        .collect::<PyResult<Vec<_>>>()?;
    let observe = match observe {
        Some(names) => names
            .iter()
            .map(|t| position(m, t))
            .collect::<PyResult<Vec<_>>>()?,
        None => (0..m.n_r()).collect(),
    };
    let params = SensitivityParams {
        delta,
        scheme: scheme.parse().map_err(py_err)?,
        ..Default::default()
    };
    let results = py
        .allow_threads(|| {
            let ctx = SensitivityContext::new(m.g_r(), params)?;
            sensitivity_table(&ctx, u, &targets, &observe)
        })
        .map_err(py_err)?;
    results
        .into_iter()
        .map(|r| {
            let d = PyDict::new_bound(py);
            d.set_item("source", &m.names[r.source])?;
            d.set_item("link_target", &m.names[r.target_link])?;
            d.set_item("diagonal", r.diagonal)?;
            let values: Vec<(String, f64)> = r
                .values
                .iter()
                .map(|&(k, v)| (m.names[k].clone(), v))
                .collect();
            d.set_item("values", values)?;
            Ok(d)
        })
        .collect()
}

/// Θ scores from `{edition: [name at rank 1, name at rank 2, …]}` as
/// `(name, theta, appearances)` tuples, best first.
#[pyfunction]
#[pyo3(signature = (tables, k_top = aggregate::DEFAULT_K_TOP))]
fn theta_scores(
    tables: Vec<(String, Vec<String>)>,
    k_top: usize,
) -> PyResult<Vec<(String, u64, usize)>> {
    let tables = tables
        .into_iter()
        .map(|(edition, entries)| EditionRankTable::new(edition, entries))
        .collect::<regomax::Result<Vec<_>>>()
        .map_err(py_err)?;
    let scores = aggregate::theta_scores(&tables, k_top).map_err(py_err)?;
    Ok(scores
        .into_iter()
        .map(|s| (s.name, s.theta, s.appearances))
        .collect())
}

/// Friendship network as its `friendship/1` JSON document.
#[pyfunction]
#[pyo3(signature = (reduced, groups, leaders, f = friendship::DEFAULT_FRIENDS))]
fn friendship_network(
    reduced: &PyReducedMatrix,
    groups: HashMap<String, String>,
    leaders: Vec<String>,
    f: usize,
) -> PyResult<String> {
    let m = &reduced.inner;
    let groups = m
        .names
        .iter()
        .map(|n| {
            groups
                .get(n)
                .cloned()
                .ok_or_else(|| PyValueError::new_err(format!("no group for {n:?}")))
        })
        .collect::<PyResult<Vec<_>>>()?;
    let leaders = leaders
        .iter()
        .map(|l| position(m, l))
        .collect::<PyResult<Vec<_>>>()?;
    let network = friendship::network_of_reduced(m, &groups, &leaders, f).map_err(py_err)?;
    network.to_json().map_err(py_err)
}

/// Reads a subset file (one name or index per line).
#[pyfunction]
fn read_subset(path: PathBuf) -> PyResult<Vec<String>> {
    read_subset_entries(io::open(&path).map_err(py_err)?).map_err(py_err)
}

#[pymodule]
#[pyo3(name = "regomax")]
fn regomax_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyRankVector>()?;
    m.add_class::<PyReducedMatrix>()?;
    m.add_function(wrap_pyfunction!(pagerank, m)?)?;
    m.add_function(wrap_pyfunction!(cheirank, m)?)?;
    m.add_function(wrap_pyfunction!(two_d_rank, m)?)?;
    m.add_function(wrap_pyfunction!(overlap_curve, m)?)?;
    m.add_function(wrap_pyfunction!(sensitivity, m)?)?;
    m.add_function(wrap_pyfunction!(theta_scores, m)?)?;
    m.add_function(wrap_pyfunction!(friendship_network, m)?)?;
    m.add_function(wrap_pyfunction!(read_subset, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
