//! Python bindings for the `dglab` solver.
//!
//! Arrays cross the boundary as plain Python lists of floats.

use std::collections::HashMap;

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use dglab::basis::{gauss_lobatto_legendre, legendre_eval, modal_to_nodal, nodal_to_modal};
use dglab::config::RunConfig;
use dglab::diagnostics::{sample_field, sod_exact};
use dglab::scenario::{Primitive, Scenario};
use dglab::sensor::{modified_score, smoothness_indicator, strength_from_score};
use dglab::solver;
use dglab::{DgError, ViscosityDistribution, ViscosityKind};

create_exception!(dglab_py, SimulationError, PyRuntimeError, "A run failed numerically.");

fn to_py(e: DgError) -> PyErr {
    match e {
        DgError::BlowUp { .. } | DgError::InadmissibleState { .. } | DgError::NoConvergence { .. } => {
            SimulationError::new_err(e.to_string())
        }
        DgError::Io(_) | DgError::Csv(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_kind(kind: &str) -> PyResult<ViscosityKind> {
    serde_json::from_value(serde_json::Value::String(kind.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown viscosity kind '{kind}'")))
}

/// Gauss-Lobatto-Legendre reference element of degree `p`.
#[pyclass(name = "ReferenceElement", module = "dglab_py", frozen)]
struct PyReferenceElement {
    inner: dglab::ReferenceElement,
}

#[pymethods]
impl PyReferenceElement {
    #[new]
    fn new(p: usize) -> PyResult<Self> {
        Ok(Self {
            inner: dglab::ReferenceElement::new(p).map_err(to_py)?,
        })
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.inner.nodes.clone()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.quad_weights.clone()
    }

    fn nodal_to_modal(&self, values: Vec<f64>) -> PyResult<Vec<f64>> {
        nodal_to_modal(&values, &self.inner).map_err(to_py)
    }

    fn modal_to_nodal(&self, modal: Vec<f64>) -> PyResult<Vec<f64>> {
        modal_to_nodal(&modal, &self.inner).map_err(to_py)
    }

    /// Evaluate the nodal interpolant of `values` at `x` in [-1, 1].
    fn eval_nodal(&self, values: Vec<f64>, x: f64) -> PyResult<f64> {
        if values.len() != self.inner.n_nodes() {
            return Err(to_py(DgError::LengthMismatch {
                expected: self.inner.n_nodes(),
                found: values.len(),
            }));
        }
        Ok(self.inner.eval_nodal(&values, x))
    }

    fn __repr__(&self) -> String {
        format!("ReferenceElement(p={})", self.inner.degree())
    }
}

/// A configured run that can be advanced step by step.
#[pyclass(name = "Simulation", module = "dglab_py")]
struct PySimulation {
    inner: solver::Simulation,
}

#[pymethods]
impl PySimulation {
    /// Build from a JSON config string plus optional `key=value` overrides.
    #[new]
    #[pyo3(signature = (config, overrides = Vec::new()))]
    fn new(config: &str, overrides: Vec<String>) -> PyResult<Self> {
        let config = RunConfig::from_json_str(config, &overrides).map_err(to_py)?;
        Ok(Self {
            inner: solver::Simulation::new(&config).map_err(to_py)?,
        })
    }

    #[getter]
    fn time(&self) -> f64 {
        self.inner.time()
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps()
    }

    #[getter]
    fn variables(&self) -> Vec<&'static str> {
        self.inner.law().variable_names().to_vec()
    }

    /// Take one step no longer than `max_dt`; returns the step size used.
    #[pyo3(signature = (max_dt = f64::INFINITY))]
    fn step(&mut self, py: Python<'_>, max_dt: f64) -> PyResult<f64> {
        py.detach(|| self.inner.step(max_dt)).map_err(to_py)
    }

    fn advance_to(&mut self, py: Python<'_>, t: f64) -> PyResult<()> {
        py.detach(|| self.inner.advance_to(t)).map_err(to_py)
    }

    /// Solution on the oversampled output grid: `(x, {variable: values})`.
    fn sample(&self) -> (Vec<f64>, HashMap<&'static str, Vec<f64>>) {
        let (xs, vals) = sample_field(self.inner.field(), self.inner.elem(), self.inner.mesh());
        let names = self.inner.law().variable_names();
        (xs, names.iter().copied().zip(vals).collect())
    }

    /// Viscosity strength of every element for the current state.
    fn element_viscosity(&self) -> PyResult<Vec<f64>> {
        let state = self.inner.current_viscosity().map_err(to_py)?;
        let field = &state.field;
        Ok((0..field.n_elements())
            .map(|e| field.element(e).iter().copied().fold(0.0, f64::max))
            .collect())
    }

    /// Trace rows as dictionaries with keys `t`, `mass`, `entropy`,
    /// `max_eps`, `flagged` and `dt`.
    fn trace<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, pyo3::types::PyDict>>> {
        self.inner
            .trace()
            .rows
            .iter()
            .map(|r| {
                let d = pyo3::types::PyDict::new(py);
                d.set_item("t", r.t)?;
                d.set_item("mass", r.mass.clone())?;
                d.set_item("entropy", r.entropy)?;
                d.set_item("max_eps", r.max_eps)?;
                d.set_item("flagged", r.flagged)?;
                d.set_item("dt", r.dt)?;
                Ok(d)
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Simulation(t={}, steps={})", self.inner.time(), self.inner.steps())
    }
}

/// Gauss-Lobatto-Legendre nodes and weights for degree `p`.
#[pyfunction]
fn gll(p: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    gauss_lobatto_legendre(p).map_err(to_py)
}

/// Legendre polynomial `P_k(x)`.
#[pyfunction]
fn legendre(k: usize, x: f64) -> PyResult<f64> {
    legendre_eval(k, x).map_err(to_py)
}

/// Viscosity distribution `kind` evaluated at `x` in [-1, 1].
#[pyfunction]
#[pyo3(signature = (kind, x, lam = None))]
fn viscosity_value(kind: &str, x: f64, lam: Option<f64>) -> PyResult<f64> {
    let kind = parse_kind(kind)?;
    let dist = match lam {
        Some(l) => ViscosityDistribution::with_lambda(kind, l),
        None => ViscosityDistribution::new(kind),
    };
    dist.value(x).map_err(to_py)
}

/// Highest-mode energy fraction of orthonormal modal coefficients.
#[pyfunction]
fn sensor_indicator(modal: Vec<f64>) -> f64 {
    smoothness_indicator(&modal)
}

#[pyfunction]
fn sensor_score(indicator: f64, p: usize, c: f64) -> f64 {
    modified_score(indicator, p, c)
}

#[pyfunction]
fn sensor_strength(s: f64, s_ref: f64, kappa: f64, eps_max: f64) -> f64 {
    strength_from_score(s, s_ref, kappa, eps_max)
}

/// Exact Sod solution `(rho, v, p)` at `(x, t)`.
#[pyfunction]
#[pyo3(signature = (x, t, left = (1.0, 0.0, 1.0), right = (0.125, 0.0, 0.1), gamma = 1.4, x0 = 0.5))]
fn sod(
    x: f64,
    t: f64,
    left: (f64, f64, f64),
    right: (f64, f64, f64),
    gamma: f64,
    x0: f64,
) -> PyResult<(f64, f64, f64)> {
    let prim = |(rho, v, p): (f64, f64, f64)| Primitive { rho, v, p };
    let s = sod_exact(x, t, prim(left), prim(right), gamma, x0).map_err(to_py)?;
    Ok((s.rho, s.velocity(), s.pressure(gamma)))
}

/// Run a JSON config to completion and write its outputs; returns the
/// contents of `meta.json` as a JSON string.
#[pyfunction]
#[pyo3(signature = (config, overrides = Vec::new()))]
fn run(py: Python<'_>, config: &str, overrides: Vec<String>) -> PyResult<String> {
    let config = RunConfig::from_json_str(config, &overrides).map_err(to_py)?;
    py.detach(|| {
        let start = std::time::Instant::now();
        let outcome = solver::run(&config)?;
        let meta = dglab::output::write_run(&config.output_dir(), &config, &outcome, start.elapsed().as_secs_f64())?;
        Ok(serde_json::to_string(&meta)?)
    })
    .map_err(to_py)
}

#[pyfunction]
fn list_scenarios() -> Vec<&'static str> {
    Scenario::ALL.iter().map(|s| s.name()).collect()
}

#[pymodule]
fn dglab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SimulationError", m.py().get_type::<SimulationError>())?;
    m.add_class::<PyReferenceElement>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(gll, m)?)?;
    m.add_function(wrap_pyfunction!(legendre, m)?)?;
    m.add_function(wrap_pyfunction!(viscosity_value, m)?)?;
    m.add_function(wrap_pyfunction!(sensor_indicator, m)?)?;
    m.add_function(wrap_pyfunction!(sensor_score, m)?)?;
    m.add_function(wrap_pyfunction!(sensor_strength, m)?)?;
    m.add_function(wrap_pyfunction!(sod, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(list_scenarios, m)?)?;
    Ok(())
}
