//! Python bindings for `fsentropy`.
//!
//! Driving words are lists of 1-based symbols. Circle points are floats in
//! `[0, 1)`; binary points are lists of 0/1 coordinates.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use fsentropy::cli_io::{self, ExperimentConfig, ResultRow, RunOutput, SummaryEntry};
use fsentropy::dynamics::{self as dyns, CircleDoubleRotate, GeneratorSystem, TorusAffine};
use fsentropy::estimators::{self as est, EmpiricalMeasure, LocalCorrSampling, OmegaSampling};
use fsentropy::exact_binary::{self as exact, BinaryPoint, BinaryShiftOdometer};
use fsentropy::limits::{self, LimitMethod};
use fsentropy::symbolic::{self as sym, BernoulliSpec, Streams, SymbolWord};
use fsentropy::{EntropySeries, Error, SeriesRow};

/// Depth of binary points when none is given.
const DEFAULT_DEPTH: usize = 2048;

fn py_err(err: Error) -> PyErr {
    match err {
        Error::IoFailure(msg) => PyOSError::new_err(msg),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for fsentropy::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn word(symbols: Vec<u32>, alphabet: u32) -> PyResult<SymbolWord> {
    SymbolWord::new(symbols, alphabet).py()
}

fn spec(weights: Option<Vec<f64>>, alphabet: u32) -> PyResult<BernoulliSpec> {
    match weights {
        Some(w) => BernoulliSpec::new(w).py(),
        None => BernoulliSpec::uniform(alphabet).py(),
    }
}

fn series_dict<'py>(py: Python<'py>, s: &EntropySeries) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("kind", &s.kind)?;
    d.set_item("epsilon", s.epsilon)?;
    d.set_item("q", s.q)?;
    d.set_item("ks", s.ks())?;
    d.set_item("values", s.values())?;
    d.set_item("stderrs", s.rows.iter().map(|r| r.stderr).collect::<Vec<_>>())?;
    d.set_item("stable", s.rows.iter().map(|r| r.stable).collect::<Vec<_>>())?;
    Ok(d)
}

fn series_list<'py>(py: Python<'py>, all: &[EntropySeries]) -> PyResult<Vec<Bound<'py, PyDict>>> {
    all.iter().map(|s| series_dict(py, s)).collect()
}

fn row_dict<'py>(py: Python<'py>, r: &ResultRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("estimator", &r.estimator)?;
    d.set_item("epsilon", r.epsilon)?;
    d.set_item("k", r.k)?;
    d.set_item("q", r.q)?;
    d.set_item("value", r.value)?;
    d.set_item("stderr", r.stderr)?;
    d.set_item("seed", r.seed)?;
    d.set_item("flags", &r.flags)?;
    Ok(d)
}

fn summary_dict<'py>(py: Python<'py>, s: &SummaryEntry) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("label", &s.label)?;
    d.set_item("epsilon", s.epsilon)?;
    d.set_item("method", &s.method)?;
    d.set_item("window", s.window)?;
    d.set_item("value", s.value)?;
    d.set_item("stderr", s.stderr)?;
    d.set_item("flags", &s.flags)?;
    Ok(d)
}

fn output_dict<'py>(py: Python<'py>, out: &RunOutput) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    let rows: PyResult<Vec<_>> = out.rows.iter().map(|r| row_dict(py, r)).collect();
    let summary: PyResult<Vec<_>> = out.summary.iter().map(|s| summary_dict(py, s)).collect();
    d.set_item("rows", rows?)?;
    d.set_item("summary", summary?)?;
    Ok(d)
}

/// `sigma^steps(w)`.
#[pyfunction]
#[pyo3(signature = (symbols, steps, alphabet = 2))]
fn shift_word(symbols: Vec<u32>, steps: usize, alphabet: u32) -> PyResult<Vec<u32>> {
    Ok(sym::shift(&word(symbols, alphabet)?, steps).py()?.symbols().to_vec())
}

/// Base-`alphabet` word of length `power * len` encoding a word over `alphabet^power` symbols.
#[pyfunction]
#[pyo3(signature = (symbols, power, alphabet = 2))]
fn power_word_map(symbols: Vec<u32>, power: u32, alphabet: u32) -> PyResult<Vec<u32>> {
    let big = sym::power_alphabet(alphabet, power).py()?;
    Ok(sym::power_word_map(&word(symbols, big)?, alphabet, power).py()?.symbols().to_vec())
}

#[pyfunction]
#[pyo3(signature = (symbols, power, alphabet = 2))]
fn power_word_unmap(symbols: Vec<u32>, power: u32, alphabet: u32) -> PyResult<Vec<u32>> {
    Ok(sym::power_word_unmap(&word(symbols, alphabet)?, power).py()?.symbols().to_vec())
}

#[pyfunction]
fn word_probability(symbols: Vec<u32>, weights: Vec<f64>) -> PyResult<f64> {
    let p = BernoulliSpec::new(weights).py()?;
    Ok(p.word_probability(&word(symbols, p.alphabet())?))
}

/// Number of shift steps among the first `k - 1` symbols.
#[pyfunction]
fn s_count(omega: Vec<u32>, k: usize) -> PyResult<usize> {
    exact::s_count(&word(omega, 2)?, k).py()
}

/// Smallest `L` with `2^-L <= eps`.
#[pyfunction]
fn resolution_length(eps: f64) -> PyResult<usize> {
    exact::resolution_length(eps).py()
}

#[pyfunction]
fn bowen_cylinder_len(omega: Vec<u32>, k: usize, eps: f64) -> PyResult<usize> {
    exact::bowen_cylinder_len(&word(omega, 2)?, k, eps).py()
}

#[pyfunction]
#[pyo3(signature = (t, k_max, q = 2.0))]
fn exact_corr_integral_series(py: Python<'_>, t: u32, k_max: usize, q: f64) -> PyResult<Bound<'_, PyDict>> {
    series_dict(py, &exact::exact_corr_integral_series(t, k_max, q).py()?)
}

#[pyfunction]
fn exact_top_entropy_series(py: Python<'_>, t: u32, k_max: usize) -> PyResult<Bound<'_, PyDict>> {
    series_dict(py, &exact::exact_top_entropy_series(t, k_max).py()?)
}

#[pyfunction]
fn exact_measure_entropy_series(py: Python<'_>, k_max: usize) -> PyResult<Bound<'_, PyDict>> {
    series_dict(py, &exact::exact_measure_entropy_series(k_max).py()?)
}

#[pyfunction]
fn exact_power_series(py: Python<'_>, t: u32, power: u32, k_max: usize) -> PyResult<Bound<'_, PyDict>> {
    series_dict(py, &exact::exact_power_series(t, power, k_max).py()?)
}

/// Limit in `k` of a series given as parallel lists.
#[pyfunction]
#[pyo3(signature = (ks, values, stderrs = None, method = "tail-mean", window = None))]
fn k_limit<'py>(
    py: Python<'py>,
    ks: Vec<usize>,
    values: Vec<f64>,
    stderrs: Option<Vec<f64>>,
    method: &str,
    window: Option<(usize, usize)>,
) -> PyResult<Bound<'py, PyDict>> {
    if ks.len() != values.len() || stderrs.as_ref().is_some_and(|s| s.len() != ks.len()) {
        return Err(PyValueError::new_err("ks, values and stderrs must have equal length"));
    }
    let method: LimitMethod = method.parse().py()?;
    let rows = ks
        .iter()
        .zip(&values)
        .enumerate()
        .map(|(i, (&k, &value))| SeriesRow {
            k,
            value,
            stderr: stderrs.as_ref().map_or(0.0, |s| s[i]),
            stable: true,
        })
        .collect();
    let series = EntropySeries {
        kind: "python".into(),
        epsilon: f64::NAN,
        q: None,
        rows,
    };
    let est = limits::k_limit(&series, window, method).py()?;
    let d = PyDict::new(py);
    d.set_item("value", est.value)?;
    d.set_item("stderr", est.stderr)?;
    d.set_item("window", est.window)?;
    d.set_item("method", est.method.to_string())?;
    Ok(d)
}

/// Runs a `key = value` experiment config and returns its rows and summary.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg = ExperimentConfig::parse(config).py()?;
    let out = py.detach(|| cli_io::run_experiment(&cfg)).py()?;
    output_dict(py, &out)
}

/// `(name, passed, value, target)` for each check of the shift/odometer example.
#[pyfunction]
#[pyo3(signature = (seed = 42))]
fn reproduce_paper_example(py: Python<'_>, seed: u64) -> PyResult<Vec<(String, bool, f64, f64)>> {
    let checks = py.detach(|| cli_io::reproduce_paper_example(seed)).py()?;
    Ok(checks
        .into_iter()
        .map(|c| (c.name.clone(), c.passed(), c.value, c.target))
        .collect())
}

#[pyfunction]
fn list_systems() -> Vec<(String, String)> {
    cli_io::SYSTEMS
        .iter()
        .map(|(n, d)| (n.to_string(), d.to_string()))
        .collect()
}

/// Conversion of points between Python and a system.
trait PyPoints: GeneratorSystem {
    fn point(&self, obj: &Bound<'_, PyAny>) -> PyResult<Self::Point>;
    fn to_py<'py>(&self, py: Python<'py>, p: &Self::Point) -> PyResult<Bound<'py, PyAny>>;
}

impl PyPoints for CircleDoubleRotate {
    fn point(&self, obj: &Bound<'_, PyAny>) -> PyResult<f64> {
        obj.extract()
    }

    fn to_py<'py>(&self, py: Python<'py>, p: &f64) -> PyResult<Bound<'py, PyAny>> {
        Ok(p.into_pyobject(py)?.into_any())
    }
}

impl PyPoints for TorusAffine {
    fn point(&self, obj: &Bound<'_, PyAny>) -> PyResult<f64> {
        obj.extract()
    }

    fn to_py<'py>(&self, py: Python<'py>, p: &f64) -> PyResult<Bound<'py, PyAny>> {
        Ok(p.into_pyobject(py)?.into_any())
    }
}

impl PyPoints for BinaryShiftOdometer {
    fn point(&self, obj: &Bound<'_, PyAny>) -> PyResult<BinaryPoint> {
        let bits: Vec<u8> = obj.extract()?;
        BinaryPoint::from_bits(&bits).py()
    }

    fn to_py<'py>(&self, py: Python<'py>, p: &BinaryPoint) -> PyResult<Bound<'py, PyAny>> {
        Ok(p.bits().into_pyobject(py)?.into_any())
    }
}

enum Inner {
    Binary(BinaryShiftOdometer),
    Circle(CircleDoubleRotate),
    Torus(TorusAffine),
}

macro_rules! dispatch {
    ($inner:expr, $sys:ident => $body:expr) => {
        match $inner {
            Inner::Binary($sys) => $body,
            Inner::Circle($sys) => $body,
            Inner::Torus($sys) => $body,
        }
    };
}

/// One of the built-in systems.
#[pyclass(frozen, name = "System")]
struct PySystem {
    inner: Inner,
}

fn omega_sampling(m_omega: usize) -> OmegaSampling {
    OmegaSampling::new(m_omega)
}

fn sample_points<S: PyPoints>(sys: &S, count: usize, seed: u64) -> Vec<S::Point> {
    let streams = Streams::new(seed);
    (0..count as u64).map(|i| sys.sample_point(&mut streams.stream(i))).collect()
}

#[pymethods]
impl PySystem {
    /// `alpha` sets the rotation of circle-double-rotate, `offsets` the
    /// translations of torus-affine, `depth` the coordinates kept by
    /// binary-shift-odometer.
    #[new]
    #[pyo3(signature = (name, alpha = None, offsets = None, depth = None))]
    fn new(name: &str, alpha: Option<f64>, offsets: Option<Vec<f64>>, depth: Option<usize>) -> PyResult<Self> {
        let inner = match name {
            "binary-shift-odometer" => Inner::Binary(BinaryShiftOdometer::new(depth.unwrap_or(DEFAULT_DEPTH)).py()?),
            "circle-double-rotate" => Inner::Circle(match alpha {
                Some(a) => CircleDoubleRotate::new(a).py()?,
                None => CircleDoubleRotate::default(),
            }),
            "torus-affine" => Inner::Torus(match offsets {
                Some(o) => TorusAffine::new(o).py()?,
                None => TorusAffine::default(),
            }),
            other => return Err(py_err(Error::SystemUnknown(other.to_string()))),
        };
        Ok(PySystem { inner })
    }

    #[getter]
    fn name(&self) -> String {
        dispatch!(&self.inner, s => s.name().to_string())
    }

    #[getter]
    fn generators(&self) -> u32 {
        dispatch!(&self.inner, s => s.generators())
    }

    #[getter]
    fn diameter(&self) -> f64 {
        dispatch!(&self.inner, s => s.diameter())
    }

    fn apply<'py>(&self, py: Python<'py>, symbol: u32, x: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        dispatch!(&self.inner, s => {
            let y = s.apply(symbol, &s.point(x)?).py()?;
            s.to_py(py, &y)
        })
    }

    fn distance(&self, x: &Bound<'_, PyAny>, y: &Bound<'_, PyAny>) -> PyResult<f64> {
        dispatch!(&self.inner, s => Ok(s.distance(&s.point(x)?, &s.point(y)?)))
    }

    fn bowen_distance(&self, omega: Vec<u32>, k: usize, x: &Bound<'_, PyAny>, y: &Bound<'_, PyAny>) -> PyResult<f64> {
        dispatch!(&self.inner, s => {
            let w = word(omega, s.generators())?;
            dyns::bowen_distance(s, &w, k, &s.point(x)?, &s.point(y)?).py()
        })
    }

    /// `count` points from the reference measure, point `i` drawn from stream `i`.
    #[pyo3(signature = (count, seed = 42))]
    fn sample_points<'py>(&self, py: Python<'py>, count: usize, seed: u64) -> PyResult<Vec<Bound<'py, PyAny>>> {
        dispatch!(&self.inner, s => sample_points(s, count, seed).iter().map(|p| s.to_py(py, p)).collect())
    }

    /// Correlation sum along random orbits of `x`: `(value, stderr, stable)`.
    #[pyo3(signature = (x, eps, omega, k, n, samples = 8, seed = 42, weights = None))]
    #[allow(clippy::too_many_arguments)]
    fn correlation_sum(
        &self,
        py: Python<'_>,
        x: &Bound<'_, PyAny>,
        eps: f64,
        omega: Vec<u32>,
        k: usize,
        n: usize,
        samples: usize,
        seed: u64,
        weights: Option<Vec<f64>>,
    ) -> PyResult<(f64, f64, bool)> {
        dispatch!(&self.inner, s => {
            let m = s.generators();
            let (x, w, p) = (s.point(x)?, word(omega, m)?, spec(weights, m)?);
            let r = py
                .detach(|| est::correlation_sum(s, &x, eps, &w, k, n, samples, &p, Streams::new(seed)))
                .py()?;
            Ok((r.value, r.stderr, r.stable))
        })
    }

    /// Topological entropy series from greedy separated sets.
    #[pyo3(signature = (eps_list, ks, samples = 1024, m_omega = 64, seed = 42, weights = None))]
    #[allow(clippy::too_many_arguments)]
    fn top_entropy<'py>(
        &self,
        py: Python<'py>,
        eps_list: Vec<f64>,
        ks: Vec<usize>,
        samples: usize,
        m_omega: usize,
        seed: u64,
        weights: Option<Vec<f64>>,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let all = dispatch!(&self.inner, s => {
            let p = spec(weights, s.generators())?;
            py.detach(|| {
                est::top_entropy_series(s, &eps_list, &ks, omega_sampling(m_omega), samples, &p, Streams::new(seed))
            })
            .py()?
        });
        series_list(py, &all)
    }

    /// Correlation entropy of order `q` for an empirical reference measure.
    #[pyo3(signature = (eps_list, ks, q = 2.0, samples = 1024, m_omega = 64, seed = 42, weights = None))]
    #[allow(clippy::too_many_arguments)]
    fn corr_entropy<'py>(
        &self,
        py: Python<'py>,
        eps_list: Vec<f64>,
        ks: Vec<usize>,
        q: f64,
        samples: usize,
        m_omega: usize,
        seed: u64,
        weights: Option<Vec<f64>>,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let all = dispatch!(&self.inner, s => {
            let p = spec(weights, s.generators())?;
            py.detach(|| {
                let streams = Streams::new(seed);
                let em = EmpiricalMeasure::sample(s, samples, streams.derive(est::POINT_DOMAIN))?;
                est::corr_entropy_series(&em, s, &eps_list, &ks, q, omega_sampling(m_omega), &p, streams)
            })
            .py()?
        });
        series_list(py, &all)
    }

    /// Local correlation entropy along random orbits of `x`.
    #[pyo3(signature = (x, eps_list, ks, n = 1000, m_upsilon = 16, m_omega = 64, seed = 42, weights = None))]
    #[allow(clippy::too_many_arguments)]
    fn local_corr_entropy<'py>(
        &self,
        py: Python<'py>,
        x: &Bound<'py, PyAny>,
        eps_list: Vec<f64>,
        ks: Vec<usize>,
        n: usize,
        m_upsilon: usize,
        m_omega: usize,
        seed: u64,
        weights: Option<Vec<f64>>,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let sampling = LocalCorrSampling {
            n,
            upsilon_samples: m_upsilon,
            omega: omega_sampling(m_omega),
        };
        let all = dispatch!(&self.inner, s => {
            let (x, p) = (s.point(x)?, spec(weights, s.generators())?);
            py.detach(|| est::local_corr_entropy_series(s, &x, &eps_list, &ks, sampling, &p, Streams::new(seed)))
                .py()?
        });
        series_list(py, &all)
    }

    fn __repr__(&self) -> String {
        format!("System('{}')", self.name())
    }
}

#[pymodule]
pub fn fsentropy_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_function(wrap_pyfunction!(shift_word, m)?)?;
    m.add_function(wrap_pyfunction!(power_word_map, m)?)?;
    m.add_function(wrap_pyfunction!(power_word_unmap, m)?)?;
    m.add_function(wrap_pyfunction!(word_probability, m)?)?;
    m.add_function(wrap_pyfunction!(s_count, m)?)?;
    m.add_function(wrap_pyfunction!(resolution_length, m)?)?;
    m.add_function(wrap_pyfunction!(bowen_cylinder_len, m)?)?;
    m.add_function(wrap_pyfunction!(exact_corr_integral_series, m)?)?;
    m.add_function(wrap_pyfunction!(exact_top_entropy_series, m)?)?;
    m.add_function(wrap_pyfunction!(exact_measure_entropy_series, m)?)?;
    m.add_function(wrap_pyfunction!(exact_power_series, m)?)?;
    m.add_function(wrap_pyfunction!(k_limit, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce_paper_example, m)?)?;
    m.add_function(wrap_pyfunction!(list_systems, m)?)?;
    Ok(())
}
