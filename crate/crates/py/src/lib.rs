//! Python bindings: revision networks, triad censuses, null-model
//! ensembles, profiles, and PCA, driven in-process from Python.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use revmotif_core::analysis::{pca_fit, SrpMatrix, SRP_DIM};
use revmotif_core::census::{brute_force_census, classify_triple, triad_census, TriadClass};
use revmotif_core::error::{Error, ErrorKind};
use revmotif_core::graph::{build_revision_network, RevisionNetwork as CoreNetwork};
use revmotif_core::ingest::{Label, RevisionEvent, RevisionLog};
use revmotif_core::nullmodel::{ensemble_census, generate_random_digraph, NullModelConfig};
use revmotif_core::srp::{article_srp, compute_delta, normalize_srp, SrpProfile as CoreProfile};

fn to_py_err(e: Error) -> PyErr {
    match e.kind() {
        ErrorKind::Usage | ErrorKind::Data => PyValueError::new_err(e.to_string()),
        ErrorKind::Numerical => PyRuntimeError::new_err(e.to_string()),
    }
}

fn null_config(samples: usize, seed: u64, epsilon: f64) -> NullModelConfig {
    NullModelConfig {
        samples,
        seed,
        epsilon,
    }
}

/// A simple directed revision network over editor names.
#[pyclass(frozen, name = "RevisionNetwork")]
struct PyRevisionNetwork {
    inner: CoreNetwork,
}

#[pymethods]
impl PyRevisionNetwork {
    /// Build from a chronological editor sequence (oldest edit first). An
    /// arc runs from each editor to the editor of the preceding revision.
    #[staticmethod]
    fn from_sequence(editors: Vec<String>) -> PyResult<Self> {
        use pyo3::exceptions::PyValueError;
        if editors.is_empty() {
            return Err(PyValueError::new_err("editor sequence must be non-empty"));
        }
        let base = chrono::DateTime::from_timestamp(1_500_000_000, 0).unwrap();
        let log = RevisionLog {
            article_id: "<sequence>".into(),
            title: "<sequence>".into(),
            label: Label::NonControversial,
            fetched_at: base,
            events: editors
                .into_iter()
                .enumerate()
                .map(|(i, editor)| RevisionEvent {
                    editor,
                    timestamp: base + chrono::Duration::seconds(i as i64),
                })
                .collect(),
        };
        Ok(PyRevisionNetwork {
            inner: build_revision_network(&log).map_err(to_py_err)?,
        })
    }

    /// Build from explicit nodes and directed (src, dst) name pairs.
    #[staticmethod]
    fn from_edges(nodes: Vec<String>, edges: Vec<(String, String)>) -> PyResult<Self> {
        let inner = CoreNetwork::from_edge_list(
            nodes.iter().map(String::as_str),
            edges.iter().map(|(s, d)| (s.as_str(), d.as_str())),
        )
        .map_err(to_py_err)?;
        Ok(PyRevisionNetwork { inner })
    }

    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn density(&self) -> f64 {
        self.inner.density()
    }

    fn nodes(&self) -> Vec<String> {
        (0..self.inner.node_count())
            .map(|i| self.inner.node_name(i).to_owned())
            .collect()
    }

    fn edges(&self) -> Vec<(String, String)> {
        self.inner
            .named_edges()
            .into_iter()
            .map(|(s, d)| (s.to_owned(), d.to_owned()))
            .collect()
    }

    fn has_edge(&self, src: &str, dst: &str) -> bool {
        self.inner.has_edge_named(src, dst)
    }

    /// All 16 triad-class counts, keyed by class code in census order.
    fn triad_census<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let census = triad_census(&self.inner);
        let dict = PyDict::new(py);
        for class in TriadClass::ALL {
            dict.set_item(class.code(), census.get(class))?;
        }
        Ok(dict)
    }

    /// Counts of the 13 connected classes in fixed reporting order.
    fn connected_counts(&self) -> Vec<u64> {
        triad_census(&self.inner).connected_counts().to_vec()
    }

    /// Exhaustive-enumeration census (slow; testing aid).
    fn brute_force_census<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let census = brute_force_census(&self.inner);
        let dict = PyDict::new(py);
        for class in TriadClass::ALL {
            dict.set_item(class.code(), census.get(class))?;
        }
        Ok(dict)
    }

    /// Triad class code of the induced subgraph on three node indices.
    fn classify(&self, u: usize, v: usize, w: usize) -> PyResult<String> {
        classify_triple(&self.inner, u, v, w)
            .map(|c| c.code().to_owned())
            .map_err(to_py_err)
    }

    /// Subgraph ratio profile against a seeded G(n, m) ensemble. Returns
    /// (values, degenerate).
    #[pyo3(signature = (samples = 100, seed = 0, epsilon = 4.0))]
    fn srp(&self, samples: usize, seed: u64, epsilon: f64) -> PyResult<(Vec<f64>, bool)> {
        let profile =
            article_srp(&self.inner, &null_config(samples, seed, epsilon)).map_err(to_py_err)?;
        Ok((profile.values().to_vec(), profile.is_degenerate()))
    }

    fn __repr__(&self) -> String {
        format!(
            "RevisionNetwork(nodes={}, edges={})",
            self.inner.node_count(),
            self.inner.edge_count()
        )
    }
}

/// Uniform random simple digraph with exactly n nodes and m arcs.
#[pyfunction]
fn random_digraph(n: usize, m: usize, seed: u64) -> PyResult<PyRevisionNetwork> {
    Ok(PyRevisionNetwork {
        inner: generate_random_digraph(n, m, seed).map_err(to_py_err)?,
    })
}

/// Mean and population SD of connected-triad counts over a G(n, m)
/// ensemble. Returns (mean, std).
#[pyfunction]
#[pyo3(signature = (n, m, samples = 100, seed = 0, epsilon = 4.0))]
fn null_ensemble(
    n: usize,
    m: usize,
    samples: usize,
    seed: u64,
    epsilon: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let stats = ensemble_census(n, m, &null_config(samples, seed, epsilon)).map_err(to_py_err)?;
    Ok((stats.mean.to_vec(), stats.std.to_vec()))
}

/// Normalized profile from observed connected counts and ensemble means.
/// Returns (values, degenerate).
#[pyfunction]
#[pyo3(signature = (real, rand_mean, epsilon = 4.0))]
fn srp_from_counts(
    real: Vec<u64>,
    rand_mean: Vec<f64>,
    epsilon: f64,
) -> PyResult<(Vec<f64>, bool)> {
    if real.len() != SRP_DIM || rand_mean.len() != SRP_DIM {
        return Err(PyValueError::new_err(format!(
            "expected {SRP_DIM} connected-class counts"
        )));
    }
    let mut real_arr = [0u64; SRP_DIM];
    real_arr.copy_from_slice(&real);
    let mut mean_arr = [0.0f64; SRP_DIM];
    mean_arr.copy_from_slice(&rand_mean);
    let delta = compute_delta(&real_arr, &mean_arr, epsilon).map_err(to_py_err)?;
    let profile = normalize_srp(&delta);
    Ok((profile.values().to_vec(), profile.is_degenerate()))
}

/// PCA over profile rows (each of length 13). Returns a dict with mean,
/// components, eigenvalues, and explained_variance.
#[pyfunction]
fn pca<'py>(py: Python<'py>, rows: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
    let mut matrix = SrpMatrix::new();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != SRP_DIM {
            return Err(PyValueError::new_err(format!(
                "row {i} has {} components, expected {SRP_DIM}",
                row.len()
            )));
        }
        let mut values = [0.0f64; SRP_DIM];
        values.copy_from_slice(row);
        matrix
            .push(
                &format!("row{i}"),
                Label::NonControversial,
                &CoreProfile::from_parts(values, false),
            )
            .map_err(to_py_err)?;
    }
    let result = pca_fit(&matrix).map_err(to_py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("mean", result.mean.to_vec())?;
    dict.set_item(
        "components",
        result
            .components
            .iter()
            .map(|c| c.to_vec())
            .collect::<Vec<_>>(),
    )?;
    dict.set_item("eigenvalues", result.eigenvalues.clone())?;
    dict.set_item("explained_variance", result.explained_variance.clone())?;
    Ok(dict)
}

/// The 13 connected triad class codes in fixed reporting order.
#[pyfunction]
fn connected_classes() -> Vec<&'static str> {
    TriadClass::CONNECTED.iter().map(|c| c.code()).collect()
}

/// All 16 triad class codes in census order.
#[pyfunction]
fn triad_classes() -> Vec<&'static str> {
    TriadClass::ALL.iter().map(|c| c.code()).collect()
}

#[pymodule]
fn revmotif(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRevisionNetwork>()?;
    m.add_function(wrap_pyfunction!(random_digraph, m)?)?;
    m.add_function(wrap_pyfunction!(null_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(srp_from_counts, m)?)?;
    m.add_function(wrap_pyfunction!(pca, m)?)?;
    m.add_function(wrap_pyfunction!(connected_classes, m)?)?;
    m.add_function(wrap_pyfunction!(triad_classes, m)?)?;
    Ok(())
}
