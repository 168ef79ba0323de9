//! Python module `pytabeval`: strings in, numbers out.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tabeval::MetricConfig;

/// RNSS and transposition-aware RMS for a predicted table against a gold
/// table, both in linearized `a | b` form.
#[pyfunction]
#[pyo3(signature = (pred, gold, tau = 0.5, theta = 0.5))]
fn score<'py>(py: Python<'py>, pred: &str, gold: &str, tau: f64, theta: f64) -> PyResult<Bound<'py, PyDict>> {
    let cfg = MetricConfig::new(tau, theta).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let s = tabeval::score_texts(pred, gold, &cfg).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let out = PyDict::new(py);
    out.set_item("rnss", s.rnss)?;
    out.set_item("rms_precision", s.rms_precision)?;
    out.set_item("rms_recall", s.rms_recall)?;
    out.set_item("rms_f1", s.rms_f1)?;
    Ok(out)
}

/// Exact match after normalization, with 5% tolerance for numbers.
#[pyfunction]
fn relaxed_accuracy(pred: &str, gold: &str) -> bool {
    tabeval::relaxed_accuracy(pred, gold)
}

#[pymodule]
fn pytabeval(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(relaxed_accuracy, m)?)?;
    Ok(())
}
