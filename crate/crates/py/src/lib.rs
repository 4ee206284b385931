//! Python bindings: parameters, runs, trajectory comparison, symbol roots,
//! Littlewood–Paley checks and sweeps.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use relaxlab_core::experiments::{
    compare_trajectories, fit_rate, pressure_relaxation_sweep, time_relaxation_sweep, ErrorNorm, Quantity, RescaleRule,
    SweepSpec,
};
use relaxlab_core::lp::{j_tau, property_suite};
use relaxlab_core::models::{Params as CoreParams, PressureLaw};
use relaxlab_core::solver::{integrate, InitialCondition, RunConfig, System};
use relaxlab_core::spectral::{self, SymbolParams, DEFAULT_RATIO_THRESHOLD};
use relaxlab_core::trajectory::{Trajectory as CoreTrajectory, LEDGER_COLUMNS};
use relaxlab_core::{Error, Grid};

fn value_err(e: Error) -> PyErr {
    match e {
        Error::BlowUp { .. } | Error::NonConvergence { .. } | Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_system(s: &str) -> PyResult<System> {
    match s {
        "BN" => Ok(System::BN),
        "K" => Ok(System::K),
        "KTAU" => Ok(System::KTAU),
        "PM" => Ok(System::PM),
        other => Err(PyValueError::new_err(format!("unknown system '{other}', expected BN, K, KTAU or PM"))),
    }
}

/// Relaxation times, pressure laws and the derived equilibrium.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Params {
    inner: CoreParams,
}

#[pymethods]
impl Params {
    #[new]
    #[pyo3(signature = (epsilon, tau, law_plus, law_minus, alpha_bar_plus, rho_bar_plus))]
    fn new(
        epsilon: f64,
        tau: f64,
        law_plus: (f64, f64),
        law_minus: (f64, f64),
        alpha_bar_plus: f64,
        rho_bar_plus: f64,
    ) -> PyResult<Self> {
        let lp = PressureLaw { a: law_plus.0, gamma: law_plus.1 };
        let lm = PressureLaw { a: law_minus.0, gamma: law_minus.1 };
        CoreParams::new(epsilon, tau, lp, lm, alpha_bar_plus, rho_bar_plus).map(|inner| Params { inner }).map_err(value_err)
    }

    /// γ₊ = 2, γ₋ = 1.4, unit coefficients, ᾱ₊ = 1/2, ρ̄₊ = 1.
    #[staticmethod]
    fn reference(epsilon: f64, tau: f64) -> PyResult<Self> {
        CoreParams::reference(epsilon, tau).map(|inner| Params { inner }).map_err(value_err)
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau
    }

    #[getter]
    fn rho_bar_minus(&self) -> f64 {
        self.inner.rho_bar_minus
    }

    #[getter]
    fn p_bar(&self) -> f64 {
        self.inner.p_bar
    }

    #[getter]
    fn fbar(&self) -> [f64; 4] {
        self.inner.fbar
    }

    fn __repr__(&self) -> String {
        format!("Params(epsilon={}, tau={}, p_bar={})", self.inner.epsilon, self.inner.tau, self.inner.p_bar)
    }
}

/// Sampled states and the per-sample diagnostic ledger of one run.
#[pyclass(frozen)]
struct Trajectory {
    inner: CoreTrajectory,
}

#[pymethods]
impl Trajectory {
    #[getter]
    fn system(&self) -> &'static str {
        self.inner.system.as_str()
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Ledger column by name, one value per sample.
    fn ledger(&self, column: &str) -> PyResult<Vec<f64>> {
        let k = LEDGER_COLUMNS
            .iter()
            .position(|c| *c == column)
            .ok_or_else(|| PyValueError::new_err(format!("unknown ledger column '{column}'")))?;
        Ok(self.inner.ledger.iter().map(|r| r.values()[k]).collect())
    }

    /// `(alpha_plus, rho_plus, rho_minus, u)` at sample `index`.
    #[allow(clippy::type_complexity)]
    fn state(&self, index: usize) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
        let s = self.inner.states.get(index).ok_or_else(|| PyValueError::new_err("sample index out of range"))?;
        Ok((s.alpha_plus.clone(), s.rho_plus.clone(), s.rho_minus.clone(), s.u.clone()))
    }
}

#[pyfunction]
#[pyo3(signature = (system, params, n, t_end, seed, amplitude, band, samples=10, dim=1, well_prepared=true, gap_scale=0.0))]
#[allow(clippy::too_many_arguments)]
fn run(
    py: Python<'_>,
    system: &str,
    params: &Params,
    n: usize,
    t_end: f64,
    seed: u64,
    amplitude: f64,
    band: [u32; 2],
    samples: usize,
    dim: usize,
    well_prepared: bool,
    gap_scale: f64,
) -> PyResult<Trajectory> {
    let grid = Grid::for_solver(dim, n).map_err(value_err)?;
    let mut ic = InitialCondition::new(seed, amplitude, band);
    ic.well_prepared = well_prepared;
    ic.gap_scale = gap_scale;
    let mut cfg = RunConfig::new(parse_system(system)?, params.inner, grid, t_end, ic);
    cfg.samples = samples;
    cfg.validate().map_err(value_err)?;
    let tr = py.detach(|| integrate(&cfg)).map_err(|f| value_err(f.error))?;
    Ok(Trajectory { inner: tr })
}

/// Per-sample L² errors between two trajectories for one quantity
/// (`alpha`, `rho_plus`, `rho_minus`, `densities`, `velocity`, `state`,
/// `combined`); `tau` applies the diffusive rescaling to the first.
#[pyfunction]
#[pyo3(signature = (a, b, quantity="state", tau=None))]
fn compare(a: &Trajectory, b: &Trajectory, quantity: &str, tau: Option<f64>) -> PyResult<Vec<f64>> {
    let q = match quantity {
        "alpha" => Quantity::Alpha,
        "rho_plus" => Quantity::RhoPlus,
        "rho_minus" => Quantity::RhoMinus,
        "densities" => Quantity::Densities,
        "velocity" => Quantity::Velocity,
        "state" => Quantity::State,
        "combined" => Quantity::Combined,
        other => return Err(PyValueError::new_err(format!("unknown quantity '{other}'"))),
    };
    let rule = tau.map_or(RescaleRule::Identity, |tau| RescaleRule::Diffusive { tau });
    let e = compare_trajectories(&a.inner, &b.inner, ErrorNorm::L2, rule).map_err(value_err)?;
    Ok(e.series(q))
}

/// Roots of `λ³ + a₂λ² + a₁λ + a₀`.
#[pyfunction]
fn cubic_roots(a2: f64, a1: f64, a0: f64) -> [Complex64; 3] {
    spectral::cubic_roots(a2, a1, a0).lambda
}

/// Exact symbol roots at one frequency and the regime label.
#[pyfunction]
fn symbol_roots(epsilon: f64, tau: f64, gamma_gap: f64, xi: f64) -> PyResult<([Complex64; 3], &'static str)> {
    let p = SymbolParams::new(epsilon, tau, gamma_gap, xi).map_err(value_err)?;
    let e = spectral::symbol_roots(&p, DEFAULT_RATIO_THRESHOLD);
    Ok((e.sorted(), e.regime.map_or("unclassified", |r| r.as_str())))
}

#[pyfunction]
fn damped_euler_decay(tau: f64, xi: f64) -> f64 {
    spectral::damped_euler_decay(tau, xi)
}

/// Rows `(friction, rate, is_peak)` on a log grid, plus the exact peak.
#[pyfunction]
fn overdamping_curve(xi: f64, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64, bool)> {
    spectral::overdamping_curve(xi, lo, hi, n).into_iter().map(|r| (r.friction, r.rate, r.peak)).collect()
}

#[pyfunction]
#[pyo3(name = "j_tau", signature = (tau, k=-2))]
fn py_j_tau(tau: f64, k: i32) -> i32 {
    j_tau(tau, k)
}

/// Partition residual, reconstruction error and Bernstein ratio range.
#[pyfunction]
#[pyo3(signature = (dim, n, fields=100, seed=0))]
fn lp_check(dim: usize, n: usize, fields: usize, seed: u64) -> PyResult<(f64, f64, f64, f64, bool)> {
    let grid = Grid::new(dim, n).map_err(value_err)?;
    let r = property_suite(grid, fields, seed).map_err(value_err)?;
    Ok((r.unity_residual, r.reconstruction, r.bernstein_min, r.bernstein_max, r.passed()))
}

/// Least-squares log-log slope: `(slope, intercept, r_squared)`.
#[pyfunction]
fn fit(pairs: Vec<(f64, f64)>) -> PyResult<(f64, f64, f64)> {
    let f = fit_rate(&pairs).map_err(value_err)?;
    Ok((f.slope, f.intercept, f.r_squared))
}

/// Runs a `pressure` or `time` sweep from a JSON sweep spec and returns the
/// JSON report.
#[pyfunction]
#[pyo3(signature = (kind, spec_json, workers=0))]
fn sweep(py: Python<'_>, kind: &str, spec_json: &str, workers: usize) -> PyResult<String> {
    let spec: SweepSpec = serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    spec.validate().map_err(value_err)?;
    let result = py.detach(|| match kind {
        "pressure" => Ok(pressure_relaxation_sweep(&spec, workers)),
        "time" => Ok(time_relaxation_sweep(&spec, workers)),
        other => Err(PyValueError::new_err(format!("unknown sweep kind '{other}'"))),
    })?;
    let report = result.map_err(|f| value_err(f.error))?;
    serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn relaxlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Params>()?;
    m.add_class::<Trajectory>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(cubic_roots, m)?)?;
    m.add_function(wrap_pyfunction!(symbol_roots, m)?)?;
    m.add_function(wrap_pyfunction!(damped_euler_decay, m)?)?;
    m.add_function(wrap_pyfunction!(overdamping_curve, m)?)?;
    m.add_function(wrap_pyfunction!(py_j_tau, m)?)?;
    m.add_function(wrap_pyfunction!(lp_check, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add("LEDGER_COLUMNS", LEDGER_COLUMNS.to_vec())?;
    Ok(())
}
