//! Python bindings: presets, validators, the three solver stages, and the
//! Monte Carlo estimator, driven in-process from Python.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use qvi_core::discretization::{build_grid, BoundaryMode, Grid};
use qvi_core::dual_game::{estimate_payoff, IntensityPolicy, McConfig};
use qvi_core::elliptic::{default_n_schedule, solve_elliptic, DEFAULT_TOL};
use qvi_core::ergodic::extract_ergodic;
use qvi_core::model::{
    check_dissipativity_in, check_no_free_loop, check_terminal_consistency, preset,
    SwitchingModel, PRESET_NAMES,
};
use qvi_core::parabolic::solve_parabolic;
use std::sync::Arc;

fn to_py_err(e: qvi_core::Error) -> PyErr {
    match e {
        qvi_core::Error::InvalidArgument(_) | qvi_core::Error::Config { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn make_grid(x_min: f64, x_max: f64, n_nodes: usize) -> PyResult<Grid> {
    build_grid(x_min, x_max, n_nodes, BoundaryMode::NeumannZeroSlope).map_err(to_py_err)
}

/// A switching-control model handle.
#[pyclass(frozen)]
struct Model {
    inner: Arc<SwitchingModel>,
}

#[pymethods]
impl Model {
    /// Load one of the built-in benchmark models.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Model> {
        Ok(Model { inner: Arc::new(preset(name).map_err(to_py_err)?) })
    }

    /// Build a model from a columnar coefficient table on disk.
    #[staticmethod]
    #[pyo3(signature = (path, controls, gamma, lipschitz_f, cost_constant_in_x = true))]
    fn from_table(
        path: &str,
        controls: Vec<f64>,
        gamma: f64,
        lipschitz_f: f64,
        cost_constant_in_x: bool,
    ) -> PyResult<Model> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PyValueError::new_err(format!("cannot read '{path}': {e}")))?;
        let points = controls.into_iter().map(|u| vec![u]).collect();
        let model = qvi_core::tabulated::model_from_table(
            &text,
            &format!("table:{path}"),
            points,
            gamma,
            lipschitz_f,
            cost_constant_in_x,
        )
        .map_err(to_py_err)?;
        Ok(Model { inner: Arc::new(model) })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn controls(&self) -> Vec<Vec<f64>> {
        self.inner.controls.clone()
    }

    fn __repr__(&self) -> String {
        format!("Model(name='{}', m={}, dim={})", self.inner.name, self.inner.m, self.inner.dim)
    }
}

/// Names of the built-in presets.
#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    PRESET_NAMES.to_vec()
}

/// Runs the three structural audits on the grid domain; returns
/// `(check, passed, worst_violation)` triples.
#[pyfunction]
fn validate(model: &Model, x_min: f64, x_max: f64, n_nodes: usize) -> PyResult<Vec<(String, bool, f64)>> {
    let grid = make_grid(x_min, x_max, n_nodes)?;
    let reports = [
        check_dissipativity_in(&model.inner, (x_min, x_max), 256, 0x5eed).map_err(to_py_err)?,
        check_no_free_loop(&model.inner, 33).map_err(to_py_err)?,
        check_terminal_consistency(&model.inner, &grid).map_err(to_py_err)?,
    ];
    Ok(reports
        .into_iter()
        .map(|r| (r.check, r.passed, r.worst_violation))
        .collect())
}

/// Discounted value field at one discount rate.
#[pyclass(frozen)]
struct EllipticResult {
    #[pyo3(get)]
    beta: f64,
    #[pyo3(get)]
    xs: Vec<f64>,
    /// `values[node][regime]`.
    #[pyo3(get)]
    values: Vec<Vec<f64>>,
    #[pyo3(get)]
    obstacle_residual: f64,
    #[pyo3(get)]
    converged: bool,
}

#[pyfunction]
#[pyo3(name = "solve_elliptic", signature = (model, x_min, x_max, n_nodes, beta, tol = DEFAULT_TOL))]
fn solve_elliptic_py(
    model: &Model,
    x_min: f64,
    x_max: f64,
    n_nodes: usize,
    beta: f64,
    tol: f64,
) -> PyResult<EllipticResult> {
    let grid = make_grid(x_min, x_max, n_nodes)?;
    let solve =
        solve_elliptic(&model.inner, &grid, beta, &default_n_schedule(), tol).map_err(to_py_err)?;
    let xs = (0..grid.n_nodes).map(|k| grid.node(k)).collect();
    let values = (0..grid.n_nodes)
        .map(|k| (0..model.inner.m).map(|i| solve.field.get(k, i)).collect())
        .collect();
    Ok(EllipticResult {
        beta,
        xs,
        values,
        obstacle_residual: solve.obstacle_residual,
        converged: solve.converged,
    })
}

/// Vanishing-discount summary.
#[pyclass(frozen)]
struct ErgodicResult {
    /// `beta V^beta` at the reference point for the smallest discount.
    #[pyo3(get)]
    lambda_raw: f64,
    #[pyo3(get)]
    lambda_richardson: f64,
    /// `(beta, beta V^beta)` pairs along the schedule.
    #[pyo3(get)]
    lambda_per_beta: Vec<(f64, f64)>,
    #[pyo3(get)]
    probe_spreads: Vec<f64>,
    #[pyo3(get)]
    residual: f64,
}

#[pyfunction]
#[pyo3(name = "extract_ergodic", signature = (model, x_min, x_max, n_nodes, betas, probe_x = 0.0, probe_regime = 1))]
fn extract_ergodic_py(
    model: &Model,
    x_min: f64,
    x_max: f64,
    n_nodes: usize,
    betas: Vec<f64>,
    probe_x: f64,
    probe_regime: usize,
) -> PyResult<ErgodicResult> {
    if probe_regime == 0 || probe_regime > model.inner.m {
        return Err(PyValueError::new_err(format!(
            "probe_regime {probe_regime} out of range 1..={}",
            model.inner.m
        )));
    }
    let grid = make_grid(x_min, x_max, n_nodes)?;
    let est = extract_ergodic(&model.inner, &grid, &betas, probe_x, probe_regime - 1)
        .map_err(to_py_err)?;
    Ok(ErgodicResult {
        lambda_raw: est.lambda,
        lambda_richardson: est.richardson_lambda,
        lambda_per_beta: est.lambda_per_beta,
        probe_spreads: est.probe_spreads,
        residual: est.residual,
    })
}

/// Long-run averages `(T, V(T, probe)/T)` from the forward march.
#[pyfunction]
#[pyo3(name = "solve_parabolic", signature = (model, x_min, x_max, n_nodes, t_max, snapshots = vec![], probe_x = 0.0, probe_regime = 1))]
#[allow(clippy::too_many_arguments)]
fn solve_parabolic_py(
    model: &Model,
    x_min: f64,
    x_max: f64,
    n_nodes: usize,
    t_max: f64,
    snapshots: Vec<f64>,
    probe_x: f64,
    probe_regime: usize,
) -> PyResult<Vec<(f64, f64)>> {
    if probe_regime == 0 || probe_regime > model.inner.m {
        return Err(PyValueError::new_err(format!(
            "probe_regime {probe_regime} out of range 1..={}",
            model.inner.m
        )));
    }
    let grid = make_grid(x_min, x_max, n_nodes)?;
    let run = solve_parabolic(&model.inner, &grid, t_max, &snapshots, probe_x, probe_regime - 1)
        .map_err(to_py_err)?;
    Ok(run.averages)
}

/// Monte Carlo estimate `(mean, stderr)` of the discounted dual payoff
/// under constant-intensity tilts.
#[pyfunction]
#[pyo3(name = "estimate_payoff", signature = (model, x, beta, n_paths, dt, horizon, seed, regime = 1, control = 1, xi_level = 1e-3, nu_level = 1.0, tail_tol = 0.01))]
#[allow(clippy::too_many_arguments)]
fn estimate_payoff_py(
    model: &Model,
    x: f64,
    beta: f64,
    n_paths: usize,
    dt: f64,
    horizon: f64,
    seed: u64,
    regime: usize,
    control: usize,
    xi_level: f64,
    nu_level: f64,
    tail_tol: f64,
) -> PyResult<(f64, f64)> {
    if regime == 0 || regime > model.inner.m {
        return Err(PyValueError::new_err(format!(
            "regime {regime} out of range 1..={}",
            model.inner.m
        )));
    }
    if control == 0 || control > model.inner.controls.len() {
        return Err(PyValueError::new_err(format!(
            "control {control} out of range 1..={}",
            model.inner.controls.len()
        )));
    }
    let cfg = McConfig {
        tail_tol,
        ..McConfig::uniform(&model.inner, n_paths, dt, horizon, seed)
    };
    let policy = IntensityPolicy::constant(vec![xi_level; model.inner.m], nu_level);
    let est = estimate_payoff(&model.inner, x, regime - 1, control - 1, &policy, beta, &cfg)
        .map_err(to_py_err)?;
    Ok((est.mean, est.stderr))
}

#[pymodule]
fn qvi_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_class::<EllipticResult>()?;
    m.add_class::<ErgodicResult>()?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(solve_elliptic_py, m)?)?;
    m.add_function(wrap_pyfunction!(extract_ergodic_py, m)?)?;
    m.add_function(wrap_pyfunction!(solve_parabolic_py, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_payoff_py, m)?)?;
    Ok(())
}
