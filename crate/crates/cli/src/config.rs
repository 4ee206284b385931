//! Strict TOML schema. Physical parameters have no defaults; only numerical
//! knobs do.

use std::path::{Path, PathBuf};

use relaxlab_core::experiments::{Coupling, SweepSpec, Vary};
use relaxlab_core::models::{Params, PressureLaw};
use relaxlab_core::solver::{InitialCondition, RunConfig, Scheme, System, DEFAULT_CFL};
use relaxlab_core::spectral::DEFAULT_RATIO_THRESHOLD;
use relaxlab_core::{Error, Grid, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub snapshots: Option<bool>,
    pub physics: Option<Physics>,
    pub run: Option<RunSection>,
    pub sweep: Option<SweepSection>,
    pub spectrum: Option<SpectrumSection>,
    pub lp: Option<LpSection>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Law {
    pub a: f64,
    pub gamma: f64,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    pub epsilon: f64,
    pub tau: f64,
    pub alpha_bar_plus: f64,
    pub rho_bar_plus: f64,
    pub law_plus: Law,
    pub law_minus: Law,
}

fn default_cfl() -> f64 {
    DEFAULT_CFL
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Required by `run`; sweeps pick their own pair of systems.
    pub system: Option<System>,
    pub dim: usize,
    pub n: usize,
    pub t_end: f64,
    pub samples: usize,
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub output_times: Vec<f64>,
    pub ic: InitialCondition,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Synthetic {
    pub coefficient: f64,
    pub exponent: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub vary: Vary,
    pub values: Vec<f64>,
    #[serde(default)]
    pub couple: Coupling,
    /// Inject `coefficient·valueᵉˣᵖᵒⁿᵉⁿᵗ` instead of running the solver.
    pub synthetic: Option<Synthetic>,
}

fn default_threshold() -> f64 {
    DEFAULT_RATIO_THRESHOLD
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Overdamping {
    pub xi: f64,
    pub friction_min: f64,
    pub friction_max: f64,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub epsilon: f64,
    pub tau: f64,
    pub gamma_gap: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub xi_points: usize,
    /// Prepend a `ξ = 0` row.
    #[serde(default)]
    pub include_zero: bool,
    #[serde(default = "default_threshold")]
    pub ratio_threshold: f64,
    pub overdamping: Overdamping,
}

fn default_fields() -> usize {
    100
}

fn default_k() -> i32 {
    relaxlab_core::lp::DEFAULT_K
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LpSection {
    pub dim: usize,
    pub n: usize,
    pub tau: f64,
    #[serde(default = "default_k")]
    pub k: i32,
    #[serde(default = "default_fields")]
    pub fields: usize,
    #[serde(default)]
    pub seed: u64,
}

pub fn load(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

fn missing(section: &str) -> Error {
    Error::Config(format!("missing required section [{section}]"))
}

impl ConfigFile {
    pub fn params(&self) -> Result<Params> {
        let p = self.physics.ok_or_else(|| missing("physics"))?;
        Params::new(
            p.epsilon,
            p.tau,
            PressureLaw { a: p.law_plus.a, gamma: p.law_plus.gamma },
            PressureLaw { a: p.law_minus.a, gamma: p.law_minus.gamma },
            p.alpha_bar_plus,
            p.rho_bar_plus,
        )
    }

    /// Run configuration; `system` falls back to `fallback` when absent.
    pub fn run_config(&self, seed: Option<u64>, fallback: Option<System>) -> Result<RunConfig> {
        let r = self.run.as_ref().ok_or_else(|| missing("run"))?;
        let system = r.system.or(fallback).ok_or_else(|| Error::Config("missing key run.system".into()))?;
        let grid = Grid::for_solver(r.dim, r.n)?;
        let mut ic = r.ic.clone();
        if let Some(s) = seed {
            ic.seed = s;
        }
        let mut cfg = RunConfig::new(system, self.params()?, grid, r.t_end, ic);
        cfg.samples = r.samples;
        cfg.dt = r.dt;
        cfg.cfl = r.cfl;
        cfg.scheme = r.scheme;
        cfg.output_times = r.output_times.clone();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sweep_spec(&self, seed: Option<u64>, fallback: System) -> Result<SweepSpec> {
        let s = self.sweep.as_ref().ok_or_else(|| missing("sweep"))?;
        let spec = SweepSpec {
            base: self.run_config(seed, Some(fallback))?,
            vary: s.vary,
            values: s.values.clone(),
            couple: s.couple,
        };
        spec.validate()?;
        Ok(spec)
    }
}
