//! Python bindings: quotient graphs, the lattice analysis pipeline, exact
//! heat kernels, `a₁` and the Monte Carlo CLT checks.

use crystalwalk::albanese::{rows, LatticeAnalysis};
use crystalwalk::heat_kernel::{a1_numeric, exact_transition, exact_transition_on, lclt_sup_error};
use crystalwalk::lattice::{
    graph_value, load_graph, load_graph_str, parse_params, save_graph, save_graph_string, validate,
};
use crystalwalk::montecarlo::{clt_report, increment_fourth_moments, sample_paths, Mode};
use crystalwalk::perturbation::{a1_analytic, eigen_derivatives};
use crystalwalk::{analyze_with, AnalysisOptions, Builtin, Error, QuotientGraph};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::{json, Value};

fn py_err(e: Error) -> PyErr {
    match e.root() {
        Error::Params(_)
        | Error::Parse { .. }
        | Error::DanglingInverse { .. }
        | Error::UnknownVertex { .. }
        | Error::DimensionMismatch { .. }
        | Error::Invalid(_)
        | Error::Argument(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for x in items {
                list.append(to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, x) in map {
                dict.set_item(k, to_py(py, x)?)?;
            }
            dict.into_any()
        }
    })
}

fn serialize<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(py, &v)
}

fn vertex(g: &QuotientGraph, id: Option<&str>) -> PyResult<usize> {
    match id {
        None => Ok(0),
        Some(id) => g
            .vertex_index(id)
            .ok_or_else(|| PyValueError::new_err(format!("no vertex {id:?}"))),
    }
}

/// Finite quotient graph with translation labels and transition probabilities.
#[pyclass(name = "Graph", module = "pycrystalwalk", frozen)]
#[derive(Clone)]
struct PyGraph {
    inner: QuotientGraph,
}

#[pymethods]
impl PyGraph {
    /// Builtin lattice (`square`, `triangular`, `hexagonal`); `params` is
    /// `"key=value,..."` and defaults to the simple walk.
    #[staticmethod]
    #[pyo3(signature = (name, params=None))]
    fn builtin(name: &str, params: Option<&str>) -> PyResult<Self> {
        let lattice: Builtin = name.parse().map_err(py_err)?;
        let params = match params {
            Some(text) => parse_params(text).map_err(py_err)?,
            None => lattice.simple_params(),
        };
        let inner = lattice.build(&params).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: load_graph_str(text).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: load_graph(path).map_err(py_err)?,
        })
    }

    fn to_json(&self) -> String {
        save_graph_string(&self.inner)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        save_graph(&self.inner, path).map_err(py_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn vertices(&self) -> Vec<String> {
        self.inner.vertices().to_vec()
    }

    /// Edges as dicts `{id, from, to, translation, p, inverse}`.
    #[getter]
    fn edges<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &graph_value(&self.inner)["edges"])
    }

    /// Every violated invariant, as dicts `{kind, subject, message}`.
    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        serialize(py, &validate(&self.inner).violations)
    }

    /// Exact distribution after `n` steps from `(start, 0)`, as
    /// `(vertex, cell, p)` triples with positive mass.
    #[pyo3(signature = (n, start=None))]
    fn heat_kernel(&self, n: usize, start: Option<&str>) -> PyResult<Vec<(String, Vec<i64>, f64)>> {
        let s = vertex(&self.inner, start)?;
        let table = exact_transition_on(&self.inner, s, n).map_err(py_err)?;
        let names = self.inner.vertices();
        Ok(table
            .entries()
            .map(|(v, c, p)| (names[v].clone(), c, p))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(dim={}, vertices={}, edges={})",
            self.inner.dim(),
            self.inner.n_vertices(),
            self.inner.edges().len()
        )
    }
}

/// Period refinement, invariant measure, modified harmonic realization and
/// Albanese metric of a walk.
#[pyclass(name = "Analysis", module = "pycrystalwalk", frozen)]
struct PyAnalysis {
    inner: LatticeAnalysis,
}

#[pymethods]
impl PyAnalysis {
    #[new]
    #[pyo3(signature = (graph, depth=None))]
    fn new(graph: &PyGraph, depth: Option<usize>) -> PyResult<Self> {
        let options = AnalysisOptions {
            search_depth: depth,
        };
        Ok(Self {
            inner: analyze_with(&graph.inner, &options).map_err(py_err)?,
        })
    }

    #[getter]
    fn period_k(&self) -> usize {
        self.inner.period_k
    }

    #[getter]
    fn index(&self) -> usize {
        self.inner.refinement.index
    }

    #[getter]
    fn hnf(&self) -> Vec<Vec<i64>> {
        self.inner.refinement.sublattice_basis.clone()
    }

    /// Volume of the Albanese torus of the refined quotient.
    #[getter]
    fn volume(&self) -> f64 {
        self.inner.albanese.volume
    }

    #[getter]
    fn original_volume(&self) -> f64 {
        self.inner.original_geometry.albanese.volume
    }

    #[getter]
    fn gram(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.albanese.gram)
    }

    #[getter]
    fn metric(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.albanese.metric)
    }

    #[getter]
    fn embedding(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.albanese.embedding)
    }

    #[getter]
    fn rho(&self) -> Vec<f64> {
        self.inner.rho().to_vec()
    }

    #[getter]
    fn measure(&self) -> Vec<f64> {
        self.inner.measure.values.clone()
    }

    #[getter]
    fn positions(&self) -> Vec<Vec<f64>> {
        self.inner.realization.positions.clone()
    }

    #[getter]
    fn vertices(&self) -> Vec<String> {
        self.inner.graph.vertices().to_vec()
    }

    fn refined_graph(&self) -> PyGraph {
        PyGraph {
            inner: self.inner.graph.clone(),
        }
    }

    /// The full analysis report as nested dicts.
    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.report())
    }

    /// Embedded points and edges of the original lattice over a cell box
    /// given as `[(lo, hi), ...]`.
    fn realize<'py>(
        &self,
        py: Python<'py>,
        window: Vec<(i64, i64)>,
    ) -> PyResult<Bound<'py, PyAny>> {
        if window.len() != self.inner.dim() {
            return Err(PyValueError::new_err(
                "window needs one range per dimension",
            ));
        }
        serialize(py, &self.inner.export_realization(&window))
    }

    /// `max_y |(2πn)^{d/2} p(n,x,y)/m(y) − K·vol·exp(−|z|²/2n)|` from the base state.
    fn lclt_sup_error(&self, n: usize) -> PyResult<f64> {
        if n == 0 {
            return Err(PyValueError::new_err("n must be positive"));
        }
        let table =
            exact_transition(&self.inner, self.inner.base_state().vertex, n).map_err(py_err)?;
        Ok(lclt_sup_error(&self.inner, &table, None))
    }

    /// `a₁` between `(x, 0)` and `(y, round(nρ) + shift)` of the original
    /// lattice; `mode` is `analytic`, `numeric` or `both`. The analytic value
    /// is evaluated at the last entry of `n_list`.
    #[pyo3(signature = (n_list, mode="both", x=None, y=None, shift=None))]
    fn a1<'py>(
        &self,
        py: Python<'py>,
        n_list: Vec<usize>,
        mode: &str,
        x: Option<&str>,
        y: Option<&str>,
        shift: Option<Vec<i64>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let a = &self.inner;
        let d = a.dim();
        let (want_a, want_n) = match mode {
            "analytic" => (true, false),
            "numeric" => (false, true),
            "both" => (true, true),
            _ => return Err(PyValueError::new_err(format!("unknown mode {mode:?}"))),
        };
        let n_eval = *n_list
            .last()
            .ok_or_else(|| PyValueError::new_err("n_list is empty"))?;
        let xv = vertex(&a.original, x)?;
        let yv = match y {
            Some(_) => vertex(&a.original, y)?,
            None => xv,
        };
        let shift = shift.unwrap_or_else(|| vec![0; d]);
        if shift.len() != d {
            return Err(PyValueError::new_err(format!("shift needs {d} entries")));
        }
        let xs = a.locate(xv, &vec![0; d]);
        let target = |n: usize| a.drift_target(yv, &shift, n);
        let analytic = if want_a {
            let p = eigen_derivatives(a).map_err(py_err)?;
            Some(a1_analytic(a, &p, &xs, &target(n_eval), n_eval))
        } else {
            None
        };
        let numeric = if want_n {
            Some(a1_numeric(a, &xs, target, &n_list).map_err(py_err)?)
        } else {
            None
        };
        let out = json!({
            "a1_analytic": analytic.as_ref().map(|r| r.value),
            "a1_analytic_printed": analytic.as_ref().map(|r| r.printed),
            "z": analytic.as_ref().map(|r| r.z.clone()),
            "terms": analytic.as_ref().map(|r| r.terms.clone()),
            "a1_numeric": numeric.as_ref().map(|r| r.estimate),
            "numeric": numeric,
        });
        to_py(py, &out)
    }

    /// Monte Carlo CLT report; `mode` is `first` or `second`.
    #[pyo3(signature = (n, t, paths, seed, mode="first"))]
    fn clt<'py>(
        &self,
        py: Python<'py>,
        n: usize,
        t: Vec<f64>,
        paths: usize,
        seed: u64,
        mode: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let mode: Mode = mode.parse().map_err(py_err)?;
        let a = &self.inner;
        let stats = py
            .detach(|| sample_paths(a, n, &t, paths, seed, mode))
            .map_err(py_err)?;
        let report = clt_report(&stats, a, mode).map_err(py_err)?;
        let out = json!({
            "report": report,
            "steps": stats.steps,
            "fourth_moments": increment_fourth_moments(&stats),
        });
        to_py(py, &out)
    }

    fn __repr__(&self) -> String {
        format!(
            "Analysis(K={}, index={}, volume={})",
            self.inner.period_k, self.inner.refinement.index, self.inner.albanese.volume
        )
    }
}

/// Analyse `graph`; the same as `Analysis(graph, depth)`.
#[pyfunction]
#[pyo3(signature = (graph, depth=None))]
fn analyze(graph: &PyGraph, depth: Option<usize>) -> PyResult<PyAnalysis> {
    PyAnalysis::new(graph, depth)
}

#[pymodule]
fn pycrystalwalk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", crystalwalk::VERSION)?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyAnalysis>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    Ok(())
}
