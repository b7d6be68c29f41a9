//! Python bindings: parameters, order parameters, generalization error,
//! averages, theory integration and the finite-N simulator.
//!
//! Trajectories are returned column-wise as `dict[str, list[float]]`
//! (keys `t`, `R_B`, `R_J`, `R_BJ`, `l_B`, `l_J`, `eg_B`, `eg_J`).

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use teachsim_core as core;
use teachsim_core::averages::AVERAGE_NAMES;
use teachsim_core::cli::csv::TRAJECTORY_COLUMNS;
use teachsim_core::theory::Record;

create_exception!(teachsim, NumericalError, PyRuntimeError);

fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::InvalidParameter(msg) => PyValueError::new_err(msg),
        other => NumericalError::new_err(other.to_string()),
    }
}

fn quadrature(abs_tol: f64) -> PyResult<core::QuadratureSpec> {
    let spec = core::QuadratureSpec {
        abs_tol,
        ..Default::default()
    };
    spec.validate().map_err(to_py)?;
    Ok(spec)
}

#[pyclass(name = "ModelParams", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyModelParams(core::ModelParams);

#[pymethods]
impl PyModelParams {
    #[new]
    fn new(a: f64, eta_b: f64, eta_j: f64) -> PyResult<Self> {
        core::ModelParams::new(a, eta_b, eta_j).map(Self).map_err(to_py)
    }

    #[getter]
    fn a(&self) -> f64 {
        self.0.a
    }

    #[getter]
    fn eta_b(&self) -> f64 {
        self.0.eta_b
    }

    #[getter]
    fn eta_j(&self) -> f64 {
        self.0.eta_j
    }

    fn is_monotone_regime(&self) -> bool {
        self.0.is_monotone_regime()
    }

    fn __repr__(&self) -> String {
        format!("ModelParams(a={}, eta_b={}, eta_j={})", self.0.a, self.0.eta_b, self.0.eta_j)
    }
}

#[pyclass(name = "MacroState", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyMacroState(core::MacroState);

#[pymethods]
impl PyMacroState {
    #[new]
    fn new(r_b: f64, r_j: f64, r_bj: f64, l_b: f64, l_j: f64) -> PyResult<Self> {
        let s = core::MacroState::new(r_b, r_j, r_bj, l_b, l_j);
        s.validate().map_err(to_py)?;
        Ok(Self(s))
    }

    /// Independent unit-variance initial vectors in the large-N limit.
    #[staticmethod]
    fn standard() -> Self {
        Self(core::standard_init())
    }

    #[getter]
    fn r_b(&self) -> f64 {
        self.0.r_b
    }

    #[getter]
    fn r_j(&self) -> f64 {
        self.0.r_j
    }

    #[getter]
    fn r_bj(&self) -> f64 {
        self.0.r_bj
    }

    #[getter]
    fn l_b(&self) -> f64 {
        self.0.l_b
    }

    #[getter]
    fn l_j(&self) -> f64 {
        self.0.l_j
    }

    fn gram_determinant(&self) -> f64 {
        self.0.gram_determinant()
    }

    fn as_tuple(&self) -> (f64, f64, f64, f64, f64) {
        let [a, b, c, d, e] = self.0.as_array();
        (a, b, c, d, e)
    }

    fn __repr__(&self) -> String {
        let s = self.0;
        format!(
            "MacroState(r_b={}, r_j={}, r_bj={}, l_b={}, l_j={})",
            s.r_b, s.r_j, s.r_bj, s.l_b, s.l_j
        )
    }
}

#[pyfunction]
fn h_tail(u: f64) -> f64 {
    core::gaussmath::h_tail(u)
}

/// Generalization error of a perceptron at direction cosine `r` to the
/// nonmonotonic teacher with threshold `a`.
#[pyfunction]
#[pyo3(signature = (r, a, abs_tol = 1e-10))]
fn gen_error(r: f64, a: f64, abs_tol: f64) -> PyResult<f64> {
    core::gen_error(r, a, &quadrature(abs_tol)?).map(|e| e.value).map_err(to_py)
}

/// `(R*, monotone)`: the minimizer of the generalization error on [0, 1].
#[pyfunction]
fn optimal_r(a: f64) -> (f64, bool) {
    let o = core::optimal_r(a);
    (o.r, o.monotone)
}

/// The nine averages at `state`, keyed `gv`, `g2`, `fu`, `f2`, `gu`, `fv`, `gf`, `fy`, `gy`.
#[pyfunction]
#[pyo3(signature = (state, params, abs_tol = 1e-10))]
fn averages<'py>(
    py: Python<'py>,
    state: PyMacroState,
    params: PyModelParams,
    abs_tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = quadrature(abs_tol)?;
    let avg = py
        .detach(|| core::compute_all(&state.0, &params.0, &spec))
        .map_err(to_py)?;
    let out = PyDict::new(py);
    for (name, v) in AVERAGE_NAMES.iter().zip(avg.as_array()) {
        out.set_item(*name, v)?;
    }
    Ok(out)
}

/// Monte Carlo estimates `{name: (mean, std_err)}` of the nine averages.
#[pyfunction]
#[pyo3(signature = (state, params, n_samples = 1_000_000, seed = 0))]
fn oracle_averages<'py>(
    py: Python<'py>,
    state: PyMacroState,
    params: PyModelParams,
    n_samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let est = py
        .detach(|| core::oracle_all(&state.0, &params.0, n_samples, seed))
        .map_err(to_py)?;
    let out = PyDict::new(py);
    for (name, e) in AVERAGE_NAMES.iter().zip(est) {
        out.set_item(*name, (e.mean, e.std_err))?;
    }
    Ok(out)
}

fn columns<'py>(py: Python<'py>, records: &[Record]) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(records.len()); TRAJECTORY_COLUMNS.len()];
    for r in records {
        let s = r.state;
        for (c, v) in cols.iter_mut().zip([r.t, s.r_b, s.r_j, s.r_bj, s.l_b, s.l_j, r.eg_b, r.eg_j]) {
            c.push(v);
        }
    }
    for (name, c) in TRAJECTORY_COLUMNS.iter().zip(cols) {
        out.set_item(*name, c)?;
    }
    Ok(out)
}

/// RK4 integration of the order-parameter equations.
#[pyfunction]
#[pyo3(signature = (params, t_max = 50.0, dt = 0.01, record_interval = 0.5, init = None, abs_tol = 1e-10))]
fn integrate<'py>(
    py: Python<'py>,
    params: PyModelParams,
    t_max: f64,
    dt: f64,
    record_interval: f64,
    init: Option<PyMacroState>,
    abs_tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = quadrature(abs_tol)?;
    let cfg = core::TheoryConfig {
        dt,
        t_max,
        record_interval,
    };
    let init = init.map_or_else(core::standard_init, |s| s.0);
    let traj = py
        .detach(|| core::integrate(&params.0, &init, &cfg, &spec))
        .map_err(to_py)?;
    columns(py, &traj.records)
}

/// Finite-N simulation. Returns `{"mean": ..., "std": ..., "trials": [...]}`.
#[pyfunction]
#[pyo3(signature = (params, n = 2000, t_max = 50.0, record_interval = 0.5, seed = 1, trials = 1, test_inputs = 0))]
#[allow(clippy::too_many_arguments)]
fn run_simulation<'py>(
    py: Python<'py>,
    params: PyModelParams,
    n: usize,
    t_max: f64,
    record_interval: f64,
    seed: u64,
    trials: usize,
    test_inputs: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = core::SimConfig {
        n,
        seed,
        t_max,
        record_interval,
        test_inputs,
        trials,
    };
    let spec = core::QuadratureSpec::default();
    let res = py
        .detach(|| core::run_simulation(&cfg, &params.0, &spec))
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("mean", columns(py, &res.mean.records)?)?;
    out.set_item("std", columns(py, &res.std_dev)?)?;
    let per_trial = res
        .trials
        .iter()
        .map(|t| columns(py, &t.records))
        .collect::<PyResult<Vec<_>>>()?;
    out.set_item("trials", per_trial)?;
    Ok(out)
}

#[pymodule]
fn teachsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyMacroState>()?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_function(wrap_pyfunction!(h_tail, m)?)?;
    m.add_function(wrap_pyfunction!(gen_error, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_r, m)?)?;
    m.add_function(wrap_pyfunction!(averages, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_averages, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(run_simulation, m)?)?;
    Ok(())
}
