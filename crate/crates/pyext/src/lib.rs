//! Python bindings: graph construction, edit distance, the baseline
//! features, prequential G-mean, GXL parsing, and config-driven
//! experiment execution.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use protostream_core::config::RunConfigFile;
use protostream_core::error::Error;
use protostream_core::eval;
use protostream_core::experiment;
use protostream_core::ged::{self, EdgeSubstMetric, GedCostModel, GedPolicy, NodeSubstMetric};
use protostream_core::graph::{AttributedGraph, EdgeRecord, NodeRecord};
use protostream_core::io::gxl::{self, AttributeSchema};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// An attributed graph: named nodes with real attribute vectors and a
/// list of (from, to, attributes) edges.
#[pyclass(name = "Graph", from_py_object)]
#[derive(Clone)]
struct PyGraph {
    inner: AttributedGraph,
}

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (id, nodes, edges, directed = false))]
    fn new(
        id: String,
        nodes: Vec<(String, Vec<f64>)>,
        edges: Vec<(String, String, Vec<f64>)>,
        directed: bool,
    ) -> Self {
        let node_attr_dim = nodes.first().map_or(0, |(_, a)| a.len());
        let edge_attr_dim = edges.first().map_or(0, |(_, _, a)| a.len());
        let inner = AttributedGraph::new(
            id,
            nodes
                .into_iter()
                .map(|(id, a)| NodeRecord::new(id, a))
                .collect(),
            edges
                .into_iter()
                .map(|(from, to, a)| EdgeRecord::new(from, to, a))
                .collect(),
            directed,
            node_attr_dim,
            edge_attr_dim,
        );
        Self { inner }
    }

    #[getter]
    fn id(&self) -> &str {
        &self.inner.id
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.inner.num_nodes()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    #[getter]
    fn directed(&self) -> bool {
        self.inner.directed
    }

    #[getter]
    fn node_attr_dim(&self) -> usize {
        self.inner.node_attr_dim
    }

    #[getter]
    fn edge_attr_dim(&self) -> usize {
        self.inner.edge_attr_dim
    }

    /// Node (id, attributes) pairs in stored order.
    fn nodes(&self) -> Vec<(String, Vec<f64>)> {
        self.inner
            .nodes
            .iter()
            .map(|n| (n.node_id.clone(), n.attributes.clone()))
            .collect()
    }

    /// Edge (from, to, attributes) triples in stored order.
    fn edges(&self) -> Vec<(String, String, Vec<f64>)> {
        self.inner
            .edges
            .iter()
            .map(|e| (e.from_id.clone(), e.to_id.clone(), e.attributes.clone()))
            .collect()
    }

    /// Every invariant violation as a message string; empty means valid.
    fn validate(&self) -> Vec<String> {
        self.inner
            .validate()
            .iter()
            .map(|v| v.to_string())
            .collect()
    }

    /// Binary adjacency matrix in stored node order.
    fn adjacency(&self) -> PyResult<Vec<Vec<u8>>> {
        let a = self.inner.adjacency().map_err(to_py_err)?;
        Ok(a.rows().into_iter().map(|row| row.to_vec()).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(id='{}', nodes={}, edges={}, directed={})",
            self.inner.id,
            self.inner.num_nodes(),
            self.inner.num_edges(),
            self.inner.directed
        )
    }
}

fn node_metric(name: &str, scale: Option<f64>) -> PyResult<NodeSubstMetric> {
    match (name, scale) {
        ("euclidean", None) => Ok(NodeSubstMetric::Euclidean),
        ("euclidean", Some(w)) => Ok(NodeSubstMetric::ScaledEuclidean(w)),
        ("discrete", _) => Ok(NodeSubstMetric::Discrete),
        _ => Err(PyValueError::new_err(format!(
            "unknown node metric '{name}'"
        ))),
    }
}

fn edge_metric(name: &str) -> PyResult<EdgeSubstMetric> {
    match name {
        "euclidean" => Ok(EdgeSubstMetric::Euclidean),
        "angle" => Ok(EdgeSubstMetric::AbsoluteAngleDifference),
        "discrete" => Ok(EdgeSubstMetric::Discrete),
        "zero" => Ok(EdgeSubstMetric::Zero),
        _ => Err(PyValueError::new_err(format!(
            "unknown edge metric '{name}'"
        ))),
    }
}

/// Graph edit distance under the configured cost model. Returns a dict
/// with `distance`, `exact` and `expanded_states`.
#[pyfunction]
#[pyo3(signature = (
    a, b,
    node_insert = 1.0, node_delete = 1.0, edge_insert = 1.0, edge_delete = 1.0,
    node_metric = "euclidean", node_metric_scale = None, edge_metric = "zero",
    exact_below = 10, budget = 1_000_000
))]
#[allow(clippy::too_many_arguments)]
fn ged_distance(
    py: Python<'_>,
    a: &PyGraph,
    b: &PyGraph,
    node_insert: f64,
    node_delete: f64,
    edge_insert: f64,
    edge_delete: f64,
    node_metric: &str,
    node_metric_scale: Option<f64>,
    edge_metric: &str,
    exact_below: usize,
    budget: u64,
) -> PyResult<Py<PyDict>> {
    let cm = GedCostModel {
        node_insert_cost: node_insert,
        node_delete_cost: node_delete,
        edge_insert_cost: edge_insert,
        edge_delete_cost: edge_delete,
        node_subst_metric: self::node_metric(node_metric, node_metric_scale)?,
        edge_subst_metric: self::edge_metric(edge_metric)?,
    };
    let policy = GedPolicy {
        exact_below_n_nodes: exact_below,
        budget,
    };
    let result = ged::distance(&a.inner, &b.inner, &cm, &policy).map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("distance", result.distance)?;
    out.set_item("exact", result.exact)?;
    out.set_item("expanded_states", result.expanded_states)?;
    Ok(out.into())
}

/// Edge density `M / (N (N - 1))`.
#[pyfunction]
fn edge_density(g: &PyGraph) -> PyResult<f64> {
    eval::edge_density(&g.inner).map_err(to_py_err)
}

/// Laplacian spectral gap (largest minus second-largest eigenvalue).
#[pyfunction]
fn spectral_gap(g: &PyGraph) -> PyResult<f64> {
    eval::spectral_gap(&g.inner).map_err(to_py_err)
}

/// Geometric mean of per-class recalls.
#[pyfunction]
fn gmean(recalls: Vec<f64>) -> PyResult<f64> {
    eval::gmean(&recalls).map_err(to_py_err)
}

/// Parses a GXL document; `schema` maps symbolic attribute names to
/// their ordered category lists (one-hot encoded).
#[pyfunction]
#[pyo3(signature = (text, schema = None))]
fn parse_gxl(text: &str, schema: Option<BTreeMap<String, Vec<String>>>) -> PyResult<PyGraph> {
    let schema = AttributeSchema {
        symbolic: schema.unwrap_or_default(),
    };
    let inner = gxl::parse_gxl(text, &schema).map_err(to_py_err)?;
    Ok(PyGraph { inner })
}

/// Materializes the dataset of a TOML run config as stream files;
/// returns (warm_path, stream_path).
#[pyfunction]
fn generate_dataset(config_path: PathBuf) -> PyResult<(String, String)> {
    let cfg = RunConfigFile::load(&config_path).map_err(to_py_err)?;
    let (warm, stream) = experiment::write_dataset_files(&cfg).map_err(to_py_err)?;
    Ok((warm.display().to_string(), stream.display().to_string()))
}

/// Executes the experiment described by a TOML run config; returns a
/// dict with the paths of the written artifacts.
#[pyfunction]
fn run_experiment(py: Python<'_>, config_path: PathBuf) -> PyResult<Py<PyDict>> {
    let cfg = RunConfigFile::load(&config_path).map_err(to_py_err)?;
    let artifacts = experiment::execute_run(&cfg).map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("steps_csv", artifacts.steps_csv.display().to_string())?;
    out.set_item(
        "aggregate_csv",
        artifacts.aggregate_csv.display().to_string(),
    )?;
    out.set_item("metadata", artifacts.metadata.display().to_string())?;
    Ok(out.into())
}

#[pymodule]
fn protostream(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(ged_distance, m)?)?;
    m.add_function(wrap_pyfunction!(edge_density, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_gap, m)?)?;
    m.add_function(wrap_pyfunction!(gmean, m)?)?;
    m.add_function(wrap_pyfunction!(parse_gxl, m)?)?;
    m.add_function(wrap_pyfunction!(generate_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
