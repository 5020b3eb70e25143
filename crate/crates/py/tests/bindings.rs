use std::f64::consts::LN_2;

use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

fn with_module<F: for<'py> FnOnce(Python<'py>, &Bound<'py, PyModule>) -> PyResult<()>>(f: F) {
    Python::attach(|py| {
        let m = PyModule::new(py, "fsentropy_py")?;
        fsentropy_py::fsentropy_py(&m)?;
        f(py, &m)
    })
    .unwrap();
}

#[test]
fn word_helpers() {
    with_module(|_, m| {
        let shifted: Vec<u32> = m.getattr("shift_word")?.call1((vec![1u32, 2, 2, 1], 2))?.extract()?;
        assert_eq!(shifted, vec![2, 1]);
        let mapped: Vec<u32> = m.getattr("power_word_map")?.call1((vec![3u32, 2], 2))?.extract()?;
        assert_eq!(mapped, vec![1, 2, 2, 1]);
        let back: Vec<u32> = m.getattr("power_word_unmap")?.call1((mapped, 2))?.extract()?;
        assert_eq!(back, vec![3, 2]);
        let s: usize = m.getattr("s_count")?.call1((vec![1u32, 2, 1, 1], 4))?.extract()?;
        assert_eq!(s, 2);
        let len: usize = m.getattr("bowen_cylinder_len")?.call1((vec![1u32, 2, 1], 4, 3.0 * 0.5f64.powi(5)))?.extract()?;
        assert_eq!(len, 4 + 2);
        let p: f64 = m.getattr("word_probability")?.call1((vec![1u32, 2, 2], vec![0.25, 0.75]))?.extract()?;
        assert!((p - 0.25 * 0.75 * 0.75).abs() < 1e-15);
        Ok(())
    });
}

#[test]
fn errors_become_value_errors() {
    with_module(|py, m| {
        let err = m.getattr("shift_word")?.call1((vec![1u32, 3], 1)).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let err = m.getattr("run_experiment")?.call1(("estimator = nothing\n",)).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        Ok(())
    });
}

#[test]
fn exact_series_and_limit() {
    with_module(|_, m| {
        let s = m.getattr("exact_top_entropy_series")?.call1((2, 64))?;
        let ks: Vec<usize> = s.get_item("ks")?.extract()?;
        let values: Vec<f64> = s.get_item("values")?.extract()?;
        assert_eq!(ks.len(), 64);
        let kw = PyDict::new(m.py());
        kw.set_item("method", "slope-fit")?;
        kw.set_item("window", (8, 64))?;
        let est = m.getattr("k_limit")?.call((ks, values), Some(&kw))?;
        let value: f64 = est.get_item("value")?.extract()?;
        assert!((value - LN_2 / 2.0).abs() < 1e-9);
        Ok(())
    });
}

#[test]
fn run_experiment_returns_rows_and_summary() {
    with_module(|_, m| {
        let out = m.getattr("run_experiment")?.call1(("estimator = exact-series\nt = 2, 3\nks = 1..16\n",))?;
        let rows = out.get_item("rows")?.cast_into::<PyList>()?;
        assert_eq!(rows.len(), 32);
        let summary = out.get_item("summary")?.cast_into::<PyList>()?;
        let headline = summary
            .iter()
            .find(|s| s.get_item("method").unwrap().extract::<String>().unwrap() == "headline")
            .unwrap();
        let value: f64 = headline.get_item("value")?.extract()?;
        assert!((value - LN_2 / 2.0).abs() < 1e-9);
        Ok(())
    });
}

#[test]
fn system_class() {
    with_module(|_, m| {
        let circle = m.getattr("System")?.call1(("circle-double-rotate",))?;
        assert_eq!(circle.getattr("generators")?.extract::<u32>()?, 2);
        let y: f64 = circle.call_method1("apply", (1, 0.3))?.extract()?;
        assert!((y - 0.6).abs() < 1e-15);
        let d: f64 = circle.call_method1("bowen_distance", (vec![1u32], 2, 0.1, 0.12))?.extract()?;
        assert!((d - 0.04).abs() < 1e-12);
        let pts: Vec<f64> = circle.call_method1("sample_points", (5,))?.extract()?;
        assert_eq!(pts.len(), 5);
        let (value, _, _): (f64, f64, bool) =
            circle.call_method1("correlation_sum", (0.2, 0.01, vec![1u32, 2], 3, 1))?.extract()?;
        assert_eq!(value, 1.0);

        let binary = m.getattr("System")?.call1(("binary-shift-odometer",))?;
        let z: Vec<u8> = binary.call_method1("apply", (2, vec![1u8, 1, 0, 1]))?.extract()?;
        assert_eq!(z, vec![0, 0, 1, 1]);
        let kw = PyDict::new(m.py());
        kw.set_item("samples", 256)?;
        kw.set_item("m_omega", 4)?;
        let series = binary.call_method("top_entropy", (vec![0.25], vec![1, 2]), Some(&kw))?;
        let first = series.get_item(0)?;
        let values: Vec<f64> = first.get_item("values")?.extract()?;
        assert!((values[0] - 2.0 * LN_2).abs() < 1e-12);
        Ok(())
    });
}
