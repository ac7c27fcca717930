//! Python bindings: corpus systems, detectors, dichotomy reports and
//! experiment configs. Structured results come back as plain dicts.

use perdyn::cli::{run_experiment as run_config, ExperimentConfig};
use perdyn::corpus::{self, build_example, BuildParams, CorpusEntry, ExampleId, Property};
use perdyn::detect::{self, DetectorParams};
use perdyn::hitting::{HittingSet, Mode, Role};
use perdyn::space::{Ball, Scope};
use perdyn::system::PeriodicSystem;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Serializes through JSON into Python objects.
fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn params_from(py: Python<'_>, params: Option<&Bound<'_, PyDict>>) -> PyResult<DetectorParams> {
    let Some(d) = params else { return Ok(DetectorParams::default()) };
    let text: String = py.import("json")?.call_method1("dumps", (d,))?.extract()?;
    let p: DetectorParams = serde_json::from_str(&text).map_err(err)?;
    p.validate().map_err(err)?;
    Ok(p)
}

fn parse_scope(s: &str) -> PyResult<Scope> {
    match s {
        "all" => Ok(Scope::All),
        "a" => Ok(Scope::A),
        "b" => Ok(Scope::B),
        _ => Err(err(format!("unknown scope {s:?}"))),
    }
}

fn parse_property(s: &str) -> PyResult<Property> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| err(format!("unknown property {s:?}")))
}

/// A corpus system; `induced=True` selects `g = f_p o ... o f_1`.
#[pyclass(frozen, name = "System")]
struct PySystem {
    entry: CorpusEntry,
    sys: PeriodicSystem,
}

#[pymethods]
impl PySystem {
    #[new]
    #[pyo3(signature = (example, induced = false))]
    fn new(example: &str, induced: bool) -> PyResult<Self> {
        let id: ExampleId = example.parse().map_err(err)?;
        let entry = build_example(id, &BuildParams::default()).map_err(err)?;
        let sys = if induced { entry.system.induced() } else { entry.system.clone() };
        Ok(PySystem { entry, sys })
    }

    #[getter]
    fn id(&self) -> String {
        self.sys.id().to_string()
    }

    #[getter]
    fn period(&self) -> usize {
        self.sys.period()
    }

    #[getter]
    fn space(&self) -> String {
        self.sys.space().id().to_string()
    }

    #[getter]
    fn manifest(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.entry.manifest)
    }

    fn induced(&self) -> PySystem {
        PySystem { entry: self.entry.clone(), sys: self.sys.induced() }
    }

    /// `f_1^n(x)` in text form.
    fn iterate(&self, point: &str, n: u64) -> PyResult<String> {
        let space = self.sys.space();
        let x = space.parse_point(point).map_err(err)?;
        Ok(self.sys.iterate(&x, n).map_err(err)?.to_string())
    }

    fn distance(&self, a: &str, b: &str) -> PyResult<f64> {
        let space = self.sys.space();
        let (a, b) = (space.parse_point(a).map_err(err)?, space.parse_point(b).map_err(err)?);
        space.distance(&a, &b).map_err(err)
    }

    #[pyo3(signature = (n, seed = 0, scope = "all"))]
    fn sample_points(&self, n: usize, seed: u64, scope: &str) -> PyResult<Vec<String>> {
        let pts = self.sys.space().sample_points(n, seed, parse_scope(scope)?).map_err(err)?;
        Ok(pts.iter().map(ToString::to_string).collect())
    }

    /// First visit times to `(center, radius)` targets; `None` marks a miss.
    fn visit_times(&self, point: &str, targets: Vec<(String, f64)>, horizon: u64) -> PyResult<Vec<Option<u64>>> {
        let space = self.sys.space();
        let x = space.parse_point(point).map_err(err)?;
        let balls = targets
            .iter()
            .map(|(c, r)| Ok(Ball::new(space.parse_point(c).map_err(err)?, *r)))
            .collect::<PyResult<Vec<_>>>()?;
        detect::visit_times(&self.sys, &x, &balls, horizon).map_err(err)
    }

    /// Verdict of the detector behind `property`, as a dict.
    #[pyo3(signature = (property, params = None))]
    fn evaluate(&self, py: Python<'_>, property: &str, params: Option<&Bound<'_, PyDict>>) -> PyResult<Py<PyAny>> {
        let p = params_from(py, params)?;
        let q = parse_property(property)?;
        let v = py.detach(|| detect::evaluate(&self.sys, q, &p)).map_err(err)?;
        to_py(py, &v)
    }

    /// Properties on `f` and `g` plus the consistency matrix.
    #[pyo3(signature = (properties, params = None))]
    fn dichotomy_report(
        &self,
        py: Python<'_>,
        properties: Vec<String>,
        params: Option<&Bound<'_, PyDict>>,
    ) -> PyResult<Py<PyAny>> {
        let p = params_from(py, params)?;
        let props = properties.iter().map(|s| parse_property(s)).collect::<PyResult<Vec<_>>>()?;
        let r = py.detach(|| detect::dichotomy_report(&self.entry, &p, &props));
        to_py(py, &r)
    }

    fn __repr__(&self) -> String {
        format!("System({:?}, period={}, space={:?})", self.sys.id(), self.sys.period(), self.space())
    }
}

/// One line per corpus entry.
#[pyfunction]
fn corpus_list() -> PyResult<Vec<String>> {
    corpus::list(&BuildParams::default()).map_err(err)
}

/// Runs an experiment config given as TOML text; returns the report.
#[pyfunction]
fn run_experiment(py: Python<'_>, config: &str) -> PyResult<Py<PyAny>> {
    let cfg = ExperimentConfig::from_toml(config).map_err(err)?;
    let report = py.detach(|| run_config(&cfg)).map_err(err)?;
    to_py(py, &report)
}

/// Classifies `members` within `{0, ..., horizon}`; `mode` is "syndetic" or "thick".
#[pyfunction]
fn classify(py: Python<'_>, members: Vec<u64>, horizon: u64, mode: &str, bound: u64) -> PyResult<Py<PyAny>> {
    let mode = match mode {
        "syndetic" => Mode::Syndetic(bound),
        "thick" => Mode::Thick(bound),
        _ => return Err(err(format!("unknown mode {mode:?}"))),
    };
    let set = HittingSet::new(horizon, Role::Separation, members);
    to_py(py, &set.classify(mode))
}

#[pymodule]
fn perdyn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_function(wrap_pyfunction!(corpus_list, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    Ok(())
}
