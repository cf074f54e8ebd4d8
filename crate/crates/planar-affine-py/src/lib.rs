//! Python bindings: field parsing, classification and the command-line reports.

use planar_affine::cli::{self, Mode};
use planar_affine::fields::classify;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn mode_of(mode: Option<&str>) -> PyResult<Mode> {
    match mode {
        None | Some("auto") => Ok(Mode::Auto),
        Some("exact") => Ok(Mode::Exact),
        Some("float") => Ok(Mode::Float),
        Some(m) => Err(PyValueError::new_err(format!("unknown mode '{m}'"))),
    }
}

fn err(e: planar_affine::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn loads<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// Parse a field and return its canonical text.
#[pyfunction]
#[pyo3(signature = (field, order = 12, mode = None))]
fn parse(field: &str, order: u32, mode: Option<&str>) -> PyResult<String> {
    let f = cli::parse_field(field, order, mode_of(mode)?).map_err(err)?;
    Ok(cli::print_field(&f))
}

/// Singular-point class at the origin as a dict.
#[pyfunction]
#[pyo3(signature = (field, order = 12, mode = None))]
fn classify_field<'py>(py: Python<'py>, field: &str, order: u32, mode: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let f = cli::parse_field(field, order, mode_of(mode)?).map_err(err)?;
    let c = classify(&f).map_err(err)?;
    loads(py, &cli::class_json(&c).to_string())
}

/// Run a property suite; returns the JSON report as a dict.
#[pyfunction]
#[pyo3(signature = (suite, trials = None, seed = 1))]
fn verify<'py>(py: Python<'py>, suite: &str, trials: Option<usize>, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let rep = cli::verify::run_suite(suite, trials, seed).map_err(err)?;
    loads(py, &rep.to_json().to_string())
}

/// Any command-line invocation, without the program name; returns (exit code, stdout).
#[pyfunction]
fn run(args: Vec<String>) -> (i32, String) {
    let argv = std::iter::once("planar-affine".to_string()).chain(args);
    let out = cli::run(argv);
    (out.code, out.stdout)
}

#[pymodule]
fn planar_affine_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(classify_field, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
