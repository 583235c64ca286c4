//! Python bindings. Matrices cross the boundary as lists of rows.

use std::collections::HashMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use tedlearn::costs::{check_pseudometric, metric_projection, nearest_pseudometric, simplex_init};
use tedlearn::experiment::{initial_cost, learn_variant, LearnSettings, LearnedModel, Variant};
use tedlearn::lvq::{knn_evaluate, DistanceHead};
use tedlearn::nalgebra::DMatrix;
use tedlearn::ted::{backtrace_one, count_cooptimal, summarize_cooptimal, ted_dp};
use tedlearn::trees::{parse_tree, serialize_tree};
use tedlearn::verify::{run_named, DemoReport, DEMO_NAMES};

fn py_err(e: tedlearn::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("rows have unequal lengths"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn head(name: &str) -> PyResult<DistanceHead> {
    match name {
        "pseudo" => Ok(DistanceHead::Pseudo),
        "true" => Ok(DistanceHead::TrueTed),
        other => Err(PyValueError::new_err(format!("unknown head {other:?}, expected pseudo or true"))),
    }
}

#[pyclass(name = "Alphabet", frozen, from_py_object)]
#[derive(Clone)]
struct PyAlphabet(tedlearn::Alphabet);

#[pymethods]
impl PyAlphabet {
    #[new]
    fn new(names: Vec<String>) -> PyResult<Self> {
        tedlearn::Alphabet::from_names(&names).map(PyAlphabet).map_err(py_err)
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.0.symbols().iter().map(|s| s.to_string()).collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "Tree", frozen, from_py_object)]
#[derive(Clone)]
struct PyTree(tedlearn::Tree);

#[pymethods]
impl PyTree {
    #[staticmethod]
    fn parse(text: &str, alphabet: &PyAlphabet) -> PyResult<Self> {
        parse_tree(text, &alphabet.0).map(PyTree).map_err(py_err)
    }

    #[getter]
    fn size(&self) -> usize {
        self.0.size()
    }

    fn __str__(&self) -> String {
        serialize_tree(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("Tree({:?})", serialize_tree(&self.0))
    }

    fn __eq__(&self, other: &PyTree) -> bool {
        self.0 == other.0
    }
}

#[pyclass(name = "CostTable", frozen, from_py_object)]
#[derive(Clone)]
struct PyCostTable(tedlearn::CostTable);

#[pymethods]
impl PyCostTable {
    /// Rows and columns follow the alphabet, with the gap last.
    #[new]
    fn new(alphabet: &PyAlphabet, entries: Vec<Vec<f64>>) -> PyResult<Self> {
        tedlearn::CostTable::new(alphabet.0.clone(), matrix(&entries)?)
            .map(PyCostTable)
            .map_err(py_err)
    }

    #[staticmethod]
    fn uniform(alphabet: &PyAlphabet, value: f64) -> Self {
        PyCostTable(tedlearn::CostTable::uniform(alphabet.0.clone(), value))
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        tedlearn::CostTable::from_text(text).map(PyCostTable).map_err(py_err)
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    #[getter]
    fn alphabet(&self) -> PyAlphabet {
        PyAlphabet(self.0.alphabet().clone())
    }

    #[getter]
    fn entries(&self) -> Vec<Vec<f64>> {
        rows(self.0.entries())
    }

    /// Cost of turning `source` into `target`; `-` names the gap.
    fn get(&self, source: &str, target: &str) -> PyResult<f64> {
        self.0.get_named(source, target).map_err(py_err)
    }

    fn is_pseudometric(&self) -> bool {
        check_pseudometric(&self.0).is_pseudometric()
    }

    fn audit(&self) -> String {
        check_pseudometric(&self.0).to_string()
    }

    fn metric_projection(&self) -> Self {
        PyCostTable(metric_projection(&self.0))
    }

    fn nearest_pseudometric(&self) -> Self {
        PyCostTable(nearest_pseudometric(&self.0))
    }

    fn max_abs_diff(&self, other: &PyCostTable) -> f64 {
        self.0.max_abs_diff(&other.0)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

#[pyclass(name = "Dataset", frozen, from_py_object)]
#[derive(Clone)]
struct PyDataset(tedlearn::Dataset);

#[pymethods]
impl PyDataset {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        tedlearn::Dataset::from_json(text).map(PyDataset).map_err(py_err)
    }

    #[staticmethod]
    fn reference() -> Self {
        PyDataset(tedlearn::reference::dataset())
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn alphabet(&self) -> PyAlphabet {
        PyAlphabet(self.0.alphabet.clone())
    }

    #[getter]
    fn trees(&self) -> Vec<PyTree> {
        self.0.records.iter().map(|r| PyTree(r.tree.clone())).collect()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.0.records.iter().map(|r| r.label.clone()).collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyfunction]
fn ted_distance(x: &PyTree, y: &PyTree, cost: &PyCostTable) -> PyResult<f64> {
    tedlearn::ted::ted_distance(&x.0, &y.0, &cost.0).map_err(py_err)
}

/// Distance and one optimal script, one edit per string.
#[pyfunction]
fn edit_script(x: &PyTree, y: &PyTree, cost: &PyCostTable) -> PyResult<(f64, Vec<String>)> {
    let r = ted_dp(&x.0, &y.0, &cost.0).map_err(py_err)?;
    let script = backtrace_one(&r);
    Ok((r.distance, script.edits.iter().map(|e| e.to_string()).collect()))
}

/// Mean edit counts over all co-optimal scripts, indexed like the cost table.
#[pyfunction]
fn cooptimal_summary(x: &PyTree, y: &PyTree, cost: &PyCostTable) -> PyResult<Vec<Vec<f64>>> {
    summarize_cooptimal(&x.0, &y.0, &cost.0)
        .map(|s| rows(s.counts()))
        .map_err(py_err)
}

#[pyfunction]
fn cooptimal_count(x: &PyTree, y: &PyTree, cost: &PyCostTable) -> PyResult<u128> {
    count_cooptimal(&x.0, &y.0, &cost.0).map_err(py_err)
}

#[pyfunction]
fn pairwise_distances(dataset: &PyDataset, cost: &PyCostTable) -> PyResult<Vec<Vec<f64>>> {
    let trees = dataset.0.trees();
    let mut out = vec![vec![0.0; trees.len()]; trees.len()];
    for (i, x) in trees.iter().enumerate() {
        for (j, y) in trees.iter().enumerate() {
            out[i][j] = tedlearn::ted::ted_distance(x, y, &cost.0).map_err(py_err)?;
        }
    }
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (dataset, distances, k = 1))]
fn knn_error(dataset: &PyDataset, distances: Vec<Vec<f64>>, k: usize) -> PyResult<f64> {
    knn_evaluate(&dataset.0, &matrix(&distances)?, k).map_err(py_err)
}

/// Columns are unit vectors at unit distance from each other.
#[pyfunction]
fn simplex(dim: usize) -> Vec<Vec<f64>> {
    rows(&simplex_init(dim))
}

#[pyclass(name = "Model", frozen)]
struct PyModel(LearnedModel);

#[pymethods]
impl PyModel {
    #[getter]
    fn variant(&self) -> String {
        self.0.variant.to_string()
    }

    #[getter]
    fn cost(&self) -> PyCostTable {
        PyCostTable(self.0.cost.clone())
    }

    #[getter]
    fn embedding(&self) -> Option<Vec<Vec<f64>>> {
        self.0.embedding.as_ref().map(|e| rows(e.vectors()))
    }

    #[getter]
    fn loss_trace(&self) -> Vec<(usize, f64)> {
        self.0.diagnostics.loss_trace.clone()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.0.diagnostics.converged
    }

    #[pyo3(signature = (dataset, head = "pseudo"))]
    fn pairwise(&self, dataset: &PyDataset, head: &str) -> PyResult<Vec<Vec<f64>>> {
        let h = self::head(head)?;
        self.0.pairwise(&dataset.0, h).map(|m| rows(&m)).map_err(py_err)
    }
}

/// Learns one of G1, G2, G3, L1, L2 starting from uniform unit costs.
#[pyfunction]
#[pyo3(signature = (dataset, variant, head = "pseudo", beta = 0.1, epochs = 100, learning_rate = 0.05, metric = false))]
fn learn(
    py: Python<'_>,
    dataset: &PyDataset,
    variant: &str,
    head: &str,
    beta: f64,
    epochs: usize,
    learning_rate: f64,
    metric: bool,
) -> PyResult<PyModel> {
    let v: Variant = variant.parse().map_err(py_err)?;
    let h = self::head(head)?;
    let settings = LearnSettings {
        beta,
        epochs,
        learning_rate,
        gesl_metric: metric,
        ..LearnSettings::default()
    };
    let d = &dataset.0;
    py.detach(|| learn_variant(d, v, h, &settings, &initial_cost(d)))
        .map(PyModel)
        .map_err(py_err)
}

#[pyclass(name = "DemoReport", frozen)]
struct PyDemoReport(DemoReport);

#[pymethods]
impl PyDemoReport {
    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }

    #[getter]
    fn passed(&self) -> bool {
        self.0.pass
    }

    #[getter]
    fn quantities(&self) -> HashMap<String, f64> {
        self.0.quantities.iter().cloned().collect()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

#[pyfunction]
fn demo_names() -> Vec<&'static str> {
    DEMO_NAMES.to_vec()
}

#[pyfunction]
fn run_demo(py: Python<'_>, name: &str) -> PyResult<PyDemoReport> {
    py.detach(|| run_named(name)).map(PyDemoReport).map_err(py_err)
}

#[pymodule]
fn tedlearn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAlphabet>()?;
    m.add_class::<PyTree>()?;
    m.add_class::<PyCostTable>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyDemoReport>()?;
    m.add_function(wrap_pyfunction!(ted_distance, m)?)?;
    m.add_function(wrap_pyfunction!(edit_script, m)?)?;
    m.add_function(wrap_pyfunction!(cooptimal_summary, m)?)?;
    m.add_function(wrap_pyfunction!(cooptimal_count, m)?)?;
    m.add_function(wrap_pyfunction!(pairwise_distances, m)?)?;
    m.add_function(wrap_pyfunction!(knn_error, m)?)?;
    m.add_function(wrap_pyfunction!(simplex, m)?)?;
    m.add_function(wrap_pyfunction!(learn, m)?)?;
    m.add_function(wrap_pyfunction!(demo_names, m)?)?;
    m.add_function(wrap_pyfunction!(run_demo, m)?)?;
    Ok(())
}
