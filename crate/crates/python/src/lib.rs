//! Python bindings: the `Params` class plus `sample`, `fit`, `compare`,
//! `describe` and the bundled datasets. Reports come back as plain dicts.

use clrbte::data;
use clrbte::gof::compare as compare_fits;
use clrbte::properties::describe as describe_params;
use clrbte::sampling::{sample_ar, sample_composition, tune_envelope};
use clrbte::{fit as fit_model, Error, EstimatorId, FitOptions, Model, Params, RngStream, Sample};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::EnvelopeViolation { .. } | Error::ProposalShape(_) | Error::Optimizer(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Serializes through JSON so nested reports become dicts and lists.
fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn draw(p: &Params, n: usize, seed: u64, stream: u64, method: &str) -> PyResult<Vec<f64>> {
    let stream = RngStream::new(seed, stream);
    match method {
        "composition" => sample_composition(p, n, stream).map_err(to_py),
        "ar" => {
            let proposal = tune_envelope(p).map_err(to_py)?;
            Ok(sample_ar(p, &proposal, n, stream).map_err(to_py)?.values)
        }
        other => Err(PyValueError::new_err(format!(
            "unknown method `{other}` (expected composition or ar)"
        ))),
    }
}

fn sample_of(values: Vec<f64>) -> PyResult<Sample> {
    Sample::new(values, "python").map_err(to_py)
}

fn parse_model(name: &str) -> PyResult<Model> {
    name.parse().map_err(to_py)
}

/// CLRBTE(λ, p1, p2).
#[pyclass(name = "Params", frozen, from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: Params,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (lam, p1, p2, relaxed = false))]
    fn new(lam: f64, p1: f64, p2: f64, relaxed: bool) -> PyResult<Self> {
        let inner = if relaxed {
            Params::relaxed(lam, p1, p2)
        } else {
            Params::new(lam, p1, p2)
        };
        inner.map(|inner| PyParams { inner }).map_err(to_py)
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda()
    }

    #[getter]
    fn p1(&self) -> f64 {
        self.inner.p1()
    }

    #[getter]
    fn p2(&self) -> f64 {
        self.inner.p2()
    }

    #[getter]
    fn p3(&self) -> f64 {
        1.0 - self.inner.p1() - self.inner.p2()
    }

    fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x)
    }

    fn survival(&self, x: f64) -> f64 {
        self.inner.survival(x)
    }

    fn pdf(&self, x: f64) -> f64 {
        self.inner.pdf(x)
    }

    fn hazard(&self, x: f64) -> PyResult<f64> {
        self.inner.hazard(x).map_err(to_py)
    }

    fn quantile(&self, u: f64) -> PyResult<f64> {
        self.inner.quantile(u).map_err(to_py)
    }

    fn describe<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &describe_params(&self.inner).map_err(to_py)?)
    }

    #[pyo3(signature = (n, seed = 1, stream = 0, method = "composition"))]
    fn sample(&self, n: usize, seed: u64, stream: u64, method: &str) -> PyResult<Vec<f64>> {
        draw(&self.inner, n, seed, stream, method)
    }

    fn __repr__(&self) -> String {
        format!(
            "Params(lam={}, p1={}, p2={})",
            self.inner.lambda(),
            self.inner.p1(),
            self.inner.p2()
        )
    }
}

/// Moments and shape statistics of CLRBTE(λ, p1, p2).
#[pyfunction]
#[pyo3(signature = (lam, p1, p2, relaxed = false))]
fn describe<'py>(py: Python<'py>, lam: f64, p1: f64, p2: f64, relaxed: bool) -> PyResult<Bound<'py, PyAny>> {
    PyParams::new(lam, p1, p2, relaxed)?.describe(py)
}

/// `n` draws from CLRBTE(λ, p1, p2).
#[pyfunction]
#[pyo3(signature = (n, lam, p1, p2, seed = 1, stream = 0, method = "composition"))]
fn sample(n: usize, lam: f64, p1: f64, p2: f64, seed: u64, stream: u64, method: &str) -> PyResult<Vec<f64>> {
    let p = Params::new(lam, p1, p2).map_err(to_py)?;
    draw(&p, n, seed, stream, method)
}

/// Fits `dist` to `values` with `estimator`; returns the full report.
#[pyfunction]
#[pyo3(signature = (values, dist = "clrbte", estimator = "mle"))]
fn fit<'py>(py: Python<'py>, values: Vec<f64>, dist: &str, estimator: &str) -> PyResult<Bound<'py, PyAny>> {
    let est: EstimatorId = estimator.parse().map_err(to_py)?;
    let s = sample_of(values)?;
    let report = fit_model(parse_model(dist)?, est, &s, &FitOptions::default()).map_err(to_py)?;
    to_dict(py, &report)
}

/// MLE fits of each distribution in `dists`, tabulated by AIC.
#[pyfunction]
#[pyo3(signature = (values, dists = vec!["clrbte".to_string(), "te".to_string(), "e".to_string(), "tgr".to_string()]))]
fn compare<'py>(py: Python<'py>, values: Vec<f64>, dists: Vec<String>) -> PyResult<Bound<'py, PyAny>> {
    let s = sample_of(values)?;
    let fits = dists
        .iter()
        .map(|d| fit_model(parse_model(d)?, EstimatorId::Mle, &s, &FitOptions::default()).map_err(to_py))
        .collect::<PyResult<Vec<_>>>()?;
    to_dict(py, &compare_fits(&s, &fits).map_err(to_py)?)
}

/// One of the bundled datasets: `"survival"` (33 values) or `"failure"` (20).
#[pyfunction]
fn dataset(name: &str) -> PyResult<Vec<f64>> {
    match name {
        "survival" => Ok(data::survival_times()),
        "failure" => Ok(data::failure_times()),
        other => Err(PyValueError::new_err(format!("unknown dataset `{other}`"))),
    }
}

#[pymodule]
fn pyclrbte(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_function(wrap_pyfunction!(describe, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(dataset, m)?)?;
    m.add("ESTIMATORS", EstimatorId::ALL.iter().map(|e| e.id()).collect::<Vec<_>>())?;
    Ok(())
}
