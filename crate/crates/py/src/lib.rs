//! Python bindings: lattice configurations, rate kernels, simulation, the
//! PDE solver and the validation reports.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use binex_core::harness::{self, ExperimentConfig, Mutation, SimulateParams, ValidateOptions};
use binex_core::pde::{self, Mode, PdeGrid};
use binex_core::Profile;

/// Sample times, grid points and one state per time.
type PdeOutput = (Vec<f64>, Vec<f64>, Vec<Vec<f64>>);

fn err(e: binex_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Particle configuration on the discrete torus.
#[pyclass(name = "Configuration", module = "binex", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyConfiguration(binex_core::Configuration);

#[pymethods]
impl PyConfiguration {
    #[new]
    fn new(occupations: Vec<u8>) -> PyResult<Self> {
        binex_core::Configuration::from_occupations(occupations)
            .map(Self)
            .map_err(err)
    }

    /// Parses a string of `0`/`1` characters.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        text.parse().map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn particle_count(&self) -> usize {
        self.0.particle_count()
    }

    fn occupations(&self) -> Vec<u8> {
        self.0.occupations().to_vec()
    }

    /// Configuration with sites `x` and `x + 1` swapped.
    fn exchange(&self, x: usize) -> Self {
        Self(self.0.exchange(x % self.0.n()))
    }

    fn __len__(&self) -> usize {
        self.0.n()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Configuration.parse('{}')", self.0)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

/// Truncated interpolating rate kernel for exponent `m` on a torus of size `n`.
#[pyclass(name = "RateKernel", module = "binex", frozen)]
struct PyRateKernel(binex_core::RateKernel);

#[pymethods]
impl PyRateKernel {
    #[new]
    fn new(m: f64, ell: usize, n: usize) -> PyResult<Self> {
        binex_core::RateKernel::new(m, ell, n).map(Self).map_err(err)
    }

    #[getter]
    fn m(&self) -> f64 {
        self.0.m()
    }

    #[getter]
    fn ell(&self) -> usize {
        self.0.ell()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    /// Constraint for gap distances `x0 >= 1`, `x1 >= 2`.
    fn gap_value(&self, x0: usize, x1: usize) -> PyResult<f64> {
        if x0 < 1 || x1 < 2 {
            return Err(PyValueError::new_err("need x0 >= 1 and x1 >= 2"));
        }
        Ok(self.0.gap_value(x0, x1))
    }

    /// Constraint at edge `(edge, edge + 1)`.
    fn constraint(&self, config: &PyConfiguration, edge: usize) -> PyResult<f64> {
        self.0.interp_constraint(&config.0, edge).map_err(err)
    }

    /// Constraint times the exclusion factor at edge `(edge, edge + 1)`.
    fn rate(&self, config: &PyConfiguration, edge: usize) -> PyResult<f64> {
        self.0.interp_rate(&config.0, edge).map_err(err)
    }

    /// `size x size` table; row `x0 - 1`, column `x1 - 2`.
    fn gap_table(&self, size: usize) -> Vec<Vec<f64>> {
        let table = self.0.build_gap_table(size);
        (1..=size)
            .map(|x0| (2..=size + 1).map(|x1| table.get(x0, x1)).collect())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("RateKernel(m={}, ell={}, n={})", self.0.m(), self.0.ell(), self.0.n())
    }
}

/// Runs `replicas` trajectories; each is a dict with `times`, `density`
/// (one row of box averages per time), `frozen_at` and `events`.
#[pyfunction]
#[pyo3(signature = (n, m, t_final, samples=10, eps=1.0/32.0, profile="cosine", replicas=1, seed=0, ell=None))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    n: usize,
    m: f64,
    t_final: f64,
    samples: usize,
    eps: f64,
    profile: &str,
    replicas: usize,
    seed: u64,
    ell: Option<usize>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let params = SimulateParams {
        n,
        m,
        ell,
        t_final,
        samples,
        eps,
        profile: profile.to_string(),
        replicas,
        seed,
    };
    let outputs = py.detach(|| harness::simulate(&params)).map_err(err)?;
    outputs
        .into_iter()
        .map(|o| {
            let d = PyDict::new(py);
            d.set_item("times", o.snapshots.iter().map(|s| s.t).collect::<Vec<_>>())?;
            d.set_item(
                "density",
                o.snapshots.into_iter().map(|s| s.density.values).collect::<Vec<_>>(),
            )?;
            d.set_item("frozen_at", o.frozen_at)?;
            d.set_item("events", o.events)?;
            Ok(d)
        })
        .collect()
}

/// Solves on `grid` cells; returns `(times, u, states)` with the initial
/// state first.
#[pyfunction]
#[pyo3(signature = (m, t_final, mode="exact", profile="cosine", grid=512, samples=10))]
fn solve_pde(
    py: Python<'_>,
    m: f64,
    t_final: f64,
    mode: &str,
    profile: &str,
    grid: usize,
    samples: usize,
) -> PyResult<PdeOutput> {
    let mode: Mode = mode.parse().map_err(err)?;
    let profile = Profile::parse(profile).map_err(err)?;
    let traj = py
        .detach(|| {
            let start = PdeGrid::from_profile(&profile, m, mode, grid)?;
            pde::solve(start, &pde::uniform_times(t_final, samples))
        })
        .map_err(err)?;
    let u = (0..grid).map(|i| i as f64 / grid as f64).collect();
    Ok((traj.times, u, traj.states))
}

/// Gap tables for each exponent, as returned by `RateKernel.gap_table`.
#[pyfunction]
#[pyo3(signature = (ms, ell=40, size=40))]
fn rate_tables(ms: Vec<f64>, ell: usize, size: usize) -> PyResult<Vec<Vec<Vec<f64>>>> {
    let tables = harness::rate_tables(&ms, ell, size).map_err(err)?;
    Ok(tables
        .iter()
        .map(|t| {
            (1..=size)
                .map(|x0| (2..=size + 1).map(|x1| t.get(x0, x1)).collect())
                .collect()
        })
        .collect())
}

#[pyfunction]
#[pyo3(signature = (m, ell, rho, n=8, seed=0, functions=20))]
fn check_invariance<'py>(
    py: Python<'py>,
    m: f64,
    ell: usize,
    rho: f64,
    n: usize,
    seed: u64,
    functions: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let report = py
        .detach(|| harness::invariance_report(n, m, ell, rho, seed, functions))
        .map_err(err)?;
    to_py(py, &report)
}

/// Runs every validator; `mutation` is `"binom-sign-flip"` or `"edge-defect"`.
#[pyfunction]
#[pyo3(signature = (seed=0, samples=1000, mutation=None))]
fn validate<'py>(
    py: Python<'py>,
    seed: u64,
    samples: usize,
    mutation: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let mutation = mutation
        .map(|s| s.parse::<Mutation>())
        .transpose()
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let options = ValidateOptions {
        seed,
        samples,
        mutation,
    };
    let report = py.detach(|| harness::validate_all(&options)).map_err(err)?;
    to_py(py, &report)
}

/// Runs the comparison described by a TOML experiment configuration.
#[pyfunction]
fn hydro_compare<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyAny>> {
    let config = ExperimentConfig::from_toml(config).map_err(err)?;
    let report = py.detach(|| harness::hydro_compare(&config)).map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
fn binex(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfiguration>()?;
    m.add_class::<PyRateKernel>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(solve_pde, m)?)?;
    m.add_function(wrap_pyfunction!(rate_tables, m)?)?;
    m.add_function(wrap_pyfunction!(check_invariance, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(hydro_compare, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
