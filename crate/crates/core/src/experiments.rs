//! Error norms between trajectories, log-log rate fits, parameter sweeps
//! and diagnostic ledgers.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Fourier, Grid, SpectralField};
use crate::lp::{besov_norm, build_partition, chemin_lerner_norm, time_norm, BesovSpec, DyadicPartition, TimeNorm};
use crate::models::{aux_unknowns, mixture_closure, MixtureState, Params};
use crate::solver::{integrate, RunConfig, System};
use crate::trajectory::{diffusive_rescale, Trajectory};

/// Change of variables applied to the first trajectory before differencing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RescaleRule {
    Identity,
    /// `(t, u) ↦ (τt, u/τ)`.
    Diffusive { tau: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ErrorNorm {
    L2,
    Besov(BesovSpec),
}

/// Per-sample norms of the differences of like unknowns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSeries {
    pub times: Vec<f64>,
    pub alpha: Vec<f64>,
    pub rho_plus: Vec<f64>,
    pub rho_minus: Vec<f64>,
    pub velocity: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Alpha,
    RhoPlus,
    RhoMinus,
    Velocity,
    /// `(δρ₊, δρ₋)`.
    Densities,
    /// `(δα₊, δρ₊, δρ₋)`.
    State,
    /// `(δα₊, δρ₊, δρ₋, δu)`.
    Combined,
}

impl ErrorSeries {
    pub fn series(&self, q: Quantity) -> Vec<f64> {
        let rss = |parts: &[&Vec<f64>]| -> Vec<f64> {
            (0..self.times.len()).map(|i| parts.iter().map(|p| p[i] * p[i]).sum::<f64>().sqrt()).collect()
        };
        match q {
            Quantity::Alpha => self.alpha.clone(),
            Quantity::RhoPlus => self.rho_plus.clone(),
            Quantity::RhoMinus => self.rho_minus.clone(),
            Quantity::Velocity => self.velocity.clone(),
            Quantity::Densities => rss(&[&self.rho_plus, &self.rho_minus]),
            Quantity::State => rss(&[&self.alpha, &self.rho_plus, &self.rho_minus]),
            Quantity::Combined => rss(&[&self.alpha, &self.rho_plus, &self.rho_minus, &self.velocity]),
        }
    }

    /// Max over stored samples.
    pub fn sup(&self, q: Quantity) -> f64 {
        self.series(q).into_iter().fold(0.0, f64::max)
    }

    /// Trapezoid `L¹`-in-time.
    pub fn l1(&self, q: Quantity) -> Result<f64> {
        time_norm(&self.times, &self.series(q), TimeNorm::L1)
    }
}

/// Norm evaluator shared by all samples of a comparison.
struct NormEval {
    grid: Grid,
    norm: ErrorNorm,
    part: Option<DyadicPartition>,
}

impl NormEval {
    fn new(grid: Grid, norm: ErrorNorm) -> Result<Self> {
        let part = match norm {
            ErrorNorm::L2 => None,
            ErrorNorm::Besov(_) => Some(build_partition(grid)?),
        };
        Ok(NormEval { grid, norm, part })
    }

    fn scalar(&self, f: Vec<f64>) -> Result<f64> {
        match (&self.norm, &self.part) {
            (ErrorNorm::Besov(spec), Some(part)) => Ok(besov_norm(&SpectralField::from_phys(self.grid, f)?, spec, part)),
            _ => Ok(self.grid.l2_norm(&f)),
        }
    }

    fn diff(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.scalar(a.iter().zip(b).map(|(x, y)| x - y).collect())
    }

    fn vector_diff(&self, a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
        let mut s = 0.0;
        for (x, y) in a.iter().zip(b) {
            s += self.diff(x, y)?.powi(2);
        }
        Ok(s.sqrt())
    }
}

fn apply_rule(traj: &Trajectory, rule: RescaleRule) -> Trajectory {
    match rule {
        RescaleRule::Identity => traj.clone(),
        RescaleRule::Diffusive { tau } => diffusive_rescale(traj, tau),
    }
}

/// Difference norms of `rule(a)` against `b` at the samples of `rule(a)`
/// lying in the span of `b` (interpolating `b` between its samples).
pub fn compare_trajectories(a: &Trajectory, b: &Trajectory, norm: ErrorNorm, rule: RescaleRule) -> Result<ErrorSeries> {
    if a.grid != b.grid {
        return Err(Error::Shape(format!("grids differ: {:?} vs {:?}", a.grid, b.grid)));
    }
    let a = apply_rule(a, rule);
    let (b0, b1) = b.span().ok_or_else(|| Error::Range("empty trajectory".into()))?;
    let eval = NormEval::new(a.grid, norm)?;
    let mut out = ErrorSeries { times: vec![], alpha: vec![], rho_plus: vec![], rho_minus: vec![], velocity: vec![] };
    for (t, sa) in a.times.iter().zip(&a.states) {
        let tol = 1e-12 * t.abs().max(1.0);
        if *t < b0 - tol || *t > b1 + tol {
            continue;
        }
        let sb = b.state_at(t.clamp(b0, b1))?;
        out.times.push(*t);
        out.alpha.push(eval.diff(&sa.alpha_plus, &sb.alpha_plus)?);
        out.rho_plus.push(eval.diff(&sa.rho_plus, &sb.rho_plus)?);
        out.rho_minus.push(eval.diff(&sa.rho_minus, &sb.rho_minus)?);
        out.velocity.push(eval.vector_diff(&sa.u, &sb.u)?);
    }
    if out.times.is_empty() {
        return Err(Error::Range("the trajectories share no time span".into()));
    }
    Ok(out)
}

/// Log-log least-squares fit `log e = slope·log p + intercept`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub pairs: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Pairs left out by the fit window.
    #[serde(default)]
    pub excluded: Vec<(f64, f64)>,
}

pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 3 {
        return Err(Error::Domain(format!("a rate fit needs at least 3 pairs, got {}", pairs.len())));
    }
    if let Some(&(p, e)) = pairs.iter().find(|(p, e)| !(*p > 0.0 && *e > 0.0 && p.is_finite() && e.is_finite())) {
        return Err(Error::Domain(format!("rate fits need positive finite pairs, got ({p}, {e})")));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|(p, _)| p.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|(_, e)| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("rate fits need at least two distinct parameters".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy <= 1e-30 * (1.0 + my * my) { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(RateFit { pairs: pairs.to_vec(), slope, intercept, r_squared, excluded: vec![] })
}

/// Fit on all pairs; if `r² < r2_min` and at least four pairs are present,
/// refit without the largest parameter and record the exclusion.
pub fn fit_rate_windowed(pairs: &[(f64, f64)], r2_min: f64) -> Result<RateFit> {
    let full = fit_rate(pairs)?;
    if full.r_squared >= r2_min || pairs.len() < 4 {
        return Ok(full);
    }
    let imax = (0..pairs.len()).max_by(|&i, &j| pairs[i].0.partial_cmp(&pairs[j].0).unwrap()).unwrap();
    let kept: Vec<(f64, f64)> = pairs.iter().enumerate().filter(|(i, _)| *i != imax).map(|(_, p)| *p).collect();
    let mut fit = fit_rate(&kept)?;
    fit.excluded = vec![pairs[imax]];
    Ok(fit)
}

pub const FIT_R2_WINDOW: f64 = 0.98;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vary {
    Epsilon,
    Tau,
}

/// How the parameter that is not varied follows the varied one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Coupling {
    #[default]
    None,
    EpsilonEqualsTau,
    EpsilonFraction { fraction: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: RunConfig,
    pub vary: Vary,
    pub values: Vec<f64>,
    #[serde(default)]
    pub couple: Coupling,
}

impl SweepSpec {
    pub fn params_for(&self, value: f64) -> Result<Params> {
        let base = &self.base.params;
        let (eps, tau) = match (self.vary, self.couple) {
            (Vary::Epsilon, Coupling::None) => (value, base.tau),
            (Vary::Epsilon, Coupling::EpsilonEqualsTau) => (value, value),
            (Vary::Epsilon, Coupling::EpsilonFraction { fraction }) => (value, value / fraction),
            (Vary::Tau, Coupling::None) => (base.epsilon, value),
            (Vary::Tau, Coupling::EpsilonEqualsTau) => (value, value),
            (Vary::Tau, Coupling::EpsilonFraction { fraction }) => (fraction * value, value),
        };
        base.with_relaxation(eps, tau)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.values.len() < 3 {
            return Err(Error::Config(format!("a sweep needs at least 3 values, got {}", self.values.len())));
        }
        if self.values.windows(2).any(|w| !(w[1] < w[0])) || self.values.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Config("sweep values must be positive and strictly decreasing".into()));
        }
        if let Coupling::EpsilonFraction { fraction } = self.couple {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(Error::Config(format!("coupling fraction must lie in (0, 1], got {fraction}")));
            }
        }
        for &v in &self.values {
            self.params_for(v).map_err(|e| Error::Config(format!("sweep value {v}: {e}")))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub errors: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub kind: String,
    pub vary: Vary,
    /// Error column the slope is fitted on.
    pub fit_column: String,
    pub fit: Option<RateFit>,
    pub rows: Vec<SweepRow>,
    pub partial: bool,
    pub synthetic: bool,
    /// Time sweep: whether the velocity error decreases along the sequence.
    pub velocity_monotone: Option<bool>,
    pub failures: Vec<String>,
}

impl SweepReport {
    pub fn column(&self, name: &str) -> Vec<(f64, f64)> {
        self.rows.iter().filter_map(|r| r.errors.get(name).map(|e| (r.value, *e))).collect()
    }
}

/// A sweep that lost at least one run, with the rows that completed.
#[derive(Clone, Debug)]
pub struct SweepFailure {
    pub error: Error,
    pub partial: SweepReport,
}

impl std::fmt::Display for SweepFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({} of the sweep rows completed)", self.error, self.partial.rows.len())
    }
}

impl std::error::Error for SweepFailure {}

pub type SweepResult = std::result::Result<SweepReport, Box<SweepFailure>>;

/// Map `f` over `values` on a pool of `workers` threads (0: rayon default),
/// returning results in input order.
pub fn run_pool<T: Send>(workers: usize, values: &[f64], f: impl Fn(f64) -> T + Sync + Send) -> Result<Vec<T>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(|| values.par_iter().map(|&v| f(v)).collect()))
}

fn finish(
    kind: &str,
    vary: Vary,
    fit_column: &str,
    results: Vec<Result<SweepRow>>,
    values: &[f64],
    velocity_column: Option<&str>,
) -> SweepResult {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (r, v) in results.into_iter().zip(values) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(format!("value {v}: {e}")),
        }
    }
    let mut report = SweepReport {
        kind: kind.into(),
        vary,
        fit_column: fit_column.into(),
        fit: None,
        rows,
        partial: !failures.is_empty(),
        synthetic: false,
        velocity_monotone: None,
        failures,
    };
    if let Some(col) = velocity_column {
        let v = report.column(col);
        report.velocity_monotone = Some(v.windows(2).all(|w| w[1].1 < w[0].1));
    }
    if report.partial {
        let error = Error::BlowUp { time: f64::NAN, reason: report.failures.join("; ") };
        return Err(Box::new(SweepFailure { error, partial: report }));
    }
    let pairs = report.column(fit_column);
    match fit_rate_windowed(&pairs, FIT_R2_WINDOW) {
        Ok(fit) => report.fit = Some(fit),
        Err(error) => return Err(Box::new(SweepFailure { error, partial: report })),
    }
    Ok(report)
}

fn run_error(e: Box<crate::solver::RunFailure>) -> Error {
    e.error
}

/// Dimension-dependent index `d/2 − 1` of the critical Besov space.
pub fn critical_index(grid: Grid) -> f64 {
    grid.dim() as f64 / 2.0 - 1.0
}

/// BN against K from the same `(Y, P, u)` data, one pair of runs per value.
/// Error columns: sup-in-time `L²` norms of the combined, state and
/// velocity differences and the sup-in-time critical Besov norm.
pub fn pressure_relaxation_sweep(spec: &SweepSpec, workers: usize) -> SweepResult {
    let fail = |error| Box::new(SweepFailure { error, partial: empty_report("pressure", spec.vary) });
    spec.validate().map_err(fail)?;
    let one = |value: f64| -> Result<SweepRow> {
        let params = spec.params_for(value)?;
        let mut bn = spec.base.clone();
        bn.system = System::BN;
        bn.params = params;
        let mut k = bn.clone();
        k.system = System::K;
        let a = integrate(&bn).map_err(run_error)?;
        let b = integrate(&k).map_err(run_error)?;
        let l2 = compare_trajectories(&a, &b, ErrorNorm::L2, RescaleRule::Identity)?;
        let bes = compare_trajectories(
            &a,
            &b,
            ErrorNorm::Besov(BesovSpec::plain(critical_index(spec.base.grid))),
            RescaleRule::Identity,
        )?;
        let mut errors = BTreeMap::new();
        errors.insert("sup_l2".into(), l2.sup(Quantity::Combined));
        errors.insert("sup_l2_state".into(), l2.sup(Quantity::State));
        errors.insert("sup_l2_velocity".into(), l2.sup(Quantity::Velocity));
        errors.insert("l1_l2".into(), l2.l1(Quantity::Combined)?);
        errors.insert("sup_besov".into(), bes.sup(Quantity::Combined));
        Ok(SweepRow { value, epsilon: params.epsilon, tau: params.tau, errors })
    };
    let results = run_pool(workers, &spec.values, one).map_err(fail)?;
    finish("pressure", spec.vary, "sup_l2", results, &spec.values, None)
}

/// Geometric sample instants in `(0, horizon]` resolving initial layers.
pub fn layer_times(horizon: f64, count: usize, decades: f64) -> Vec<f64> {
    (0..count).map(|k| horizon * 10f64.powf(-decades + decades * k as f64 / count as f64)).collect()
}

pub const LAYER_SAMPLES: usize = 40;
pub const LAYER_DECADES: f64 = 6.0;

/// Diffusively rescaled K against PM, from shared `(α, ρ±)` data.
/// `base.t_end` is the horizon in the diffusive time `s`.
pub fn time_relaxation_sweep(spec: &SweepSpec, workers: usize) -> SweepResult {
    let fail = |error| Box::new(SweepFailure { error, partial: empty_report("time", spec.vary) });
    spec.validate().map_err(fail)?;
    let s_end = spec.base.t_end;
    let mut s_times = spec.base.output_times.clone();
    s_times.extend(layer_times(s_end, LAYER_SAMPLES, LAYER_DECADES));
    let one = |value: f64| -> Result<SweepRow> {
        let params = spec.params_for(value)?;
        let tau = params.tau;
        let mut pm = spec.base.clone();
        pm.system = System::PM;
        pm.params = params;
        pm.output_times = s_times.clone();
        let mut k = pm.clone();
        k.system = System::K;
        k.t_end = s_end / tau;
        k.output_times = s_times.iter().map(|s| s / tau).collect();
        let b = integrate(&pm).map_err(run_error)?;
        let a = integrate(&k).map_err(run_error)?;
        let rule = RescaleRule::Diffusive { tau };
        let l2 = compare_trajectories(&a, &b, ErrorNorm::L2, rule)?;
        let bes =
            compare_trajectories(&a, &b, ErrorNorm::Besov(BesovSpec::plain(critical_index(spec.base.grid))), rule)?;
        let mut errors = BTreeMap::new();
        errors.insert("sup_rho".into(), l2.sup(Quantity::Densities));
        errors.insert("sup_state".into(), l2.sup(Quantity::State));
        errors.insert("l1_velocity".into(), l2.l1(Quantity::Velocity)?);
        errors.insert("sup_besov_rho".into(), bes.sup(Quantity::Densities));
        Ok(SweepRow { value, epsilon: params.epsilon, tau, errors })
    };
    let results = run_pool(workers, &spec.values, one).map_err(fail)?;
    finish("time", spec.vary, "sup_rho", results, &spec.values, Some("l1_velocity"))
}

fn empty_report(kind: &str, vary: Vary) -> SweepReport {
    SweepReport {
        kind: kind.into(),
        vary,
        fit_column: String::new(),
        fit: None,
        rows: vec![],
        partial: true,
        synthetic: false,
        velocity_monotone: None,
        failures: vec![],
    }
}

/// Sweep report from injected errors `coefficient·valueᵉˣᵖᵒⁿᵉⁿᵗ`, no PDE runs.
pub fn synthetic_sweep(kind: &str, vary: Vary, values: &[f64], coefficient: f64, exponent: f64) -> SweepResult {
    let rows: Vec<Result<SweepRow>> = values
        .iter()
        .map(|&v| {
            let mut errors = BTreeMap::new();
            errors.insert("synthetic".into(), coefficient * v.powf(exponent));
            Ok(SweepRow { value: v, epsilon: f64::NAN, tau: f64::NAN, errors })
        })
        .collect();
    let mut out = finish(kind, vary, "synthetic", rows, values, None)?;
    out.synthetic = true;
    Ok(out)
}

fn besov_series(grid: Grid, part: &DyadicPartition, fields: &[Vec<f64>], s: &[f64]) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|f| {
            let sf = SpectralField::from_phys(grid, f.clone())?;
            Ok(s.iter().map(|&si| besov_norm(&sf, &BesovSpec::plain(si), part)).sum())
        })
        .collect()
}

/// Discrete counterparts of the left-hand-side groups of the uniform
/// estimate, keyed by name. Intersections of Besov spaces are measured by
/// the sum of the two norms; vector quantities by the sum over components.
pub fn uniform_bounds_ledger(traj: &Trajectory) -> Result<BTreeMap<String, f64>> {
    let grid = traj.grid;
    let p = &traj.params;
    let part = build_partition(grid)?;
    let fourier = Fourier::new(grid);
    let h = grid.dim() as f64 / 2.0;
    let t = &traj.times;
    let per_sample = |f: &dyn Fn(&MixtureState) -> Vec<Vec<f64>>, s: &[f64]| -> Result<Vec<f64>> {
        traj.states
            .iter()
            .map(|st| Ok(besov_series(grid, &part, &f(st), s)?.iter().sum()))
            .collect()
    };
    let dev = |v: &[f64], c: f64| -> Vec<f64> { v.iter().map(|x| x - c).collect() };
    let state_dev = |s: &MixtureState| {
        let mut v = vec![
            dev(&s.alpha_plus, p.alpha_bar_plus),
            dev(&s.rho_plus, p.rho_bar_plus),
            dev(&s.rho_minus, p.rho_bar_minus),
        ];
        v.extend(s.u.iter().cloned());
        v
    };
    let gap = |s: &MixtureState| vec![s.pressure_gap(p)];
    let pdev = |s: &MixtureState| vec![dev(&mixture_closure(s, p).1, p.p_bar)];
    let vel = |s: &MixtureState| s.u.clone();
    let flux = |s: &MixtureState| {
        let (rho, pr) = mixture_closure(s, p);
        let grad = fourier.gradient(&pr, false);
        s.u.iter()
            .zip(grad)
            .map(|(uc, gc)| (0..grid.len()).map(|i| rho[i] * uc[i] / p.tau + gc[i]).collect())
            .collect::<Vec<Vec<f64>>>()
    };
    let l = |v: Vec<f64>, n: TimeNorm| time_norm(t, &v, n);
    let mut out = BTreeMap::new();
    out.insert("state_sup".into(), l(per_sample(&state_dev, &[h - 1.0, h + 1.0])?, TimeNorm::Linf)?);
    out.insert("gap_l1_over_eps".into(), l(per_sample(&gap, &[h - 1.0, h])?, TimeNorm::L1)? / p.epsilon);
    out.insert(
        "gap_l2_over_sqrt_eps".into(),
        l(per_sample(&gap, &[h - 1.0, h + 1.0])?, TimeNorm::L2)? / p.epsilon.sqrt(),
    );
    out.insert("pressure_l1_tau".into(), p.tau * l(per_sample(&pdev, &[h + 1.0])?, TimeNorm::L1)?);
    out.insert("pressure_l2_sqrt_tau".into(), p.tau.sqrt() * l(per_sample(&pdev, &[h, h + 1.0])?, TimeNorm::L2)?);
    out.insert("u_l1".into(), l(per_sample(&vel, &[h, h + 1.0])?, TimeNorm::L1)?);
    out.insert("u_l2_over_sqrt_tau".into(), l(per_sample(&vel, &[h - 1.0, h + 1.0])?, TimeNorm::L2)? / p.tau.sqrt());
    out.insert("effective_flux_l1".into(), l(per_sample(&flux, &[h - 1.0, h])?, TimeNorm::L1)?);
    Ok(out)
}

/// Initial-layer behaviour of the pressure gap `P₊ − P₋`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapDecayReport {
    /// `L̃∞_t(Ḃ^{d/2−2} ∩ Ḃ^{d/2−1})` norm of the gap.
    pub sup_gap: f64,
    /// `ε^{-1/2} L̃²_t(Ḃ^{d/2−1})` norm of the gap.
    pub l2_gap_over_sqrt_eps: f64,
    pub sup_gap_l2: f64,
    /// `sup_gap / √(ετ)`.
    pub ratio: f64,
    /// Exponential rate fitted to `‖P₊ − P₋‖_{L²}` over the layer window.
    pub fitted_rate: Option<f64>,
    /// `F̄₂/ε`.
    pub predicted_rate: f64,
    pub window_end: f64,
}

/// Number of linear e-folding times spanned by the decay-rate fit window.
pub const GAP_WINDOW_EFOLDS: f64 = 2.0;

/// Least-squares rate `λ` of `v ≈ C e^{−λt}`; needs three positive samples.
pub fn fit_decay_rate(times: &[f64], values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times.iter().zip(values).filter(|(_, v)| **v > 0.0).map(|(t, v)| (*t, v.ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let stv: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mv)).sum();
    (stt > 0.0).then(|| -stv / stt)
}

pub fn pressure_gap_decay(traj: &Trajectory) -> Result<GapDecayReport> {
    let grid = traj.grid;
    let p = &traj.params;
    let part = build_partition(grid)?;
    let h = grid.dim() as f64 / 2.0;
    let gaps: Vec<Vec<f64>> = traj.states.iter().map(|s| s.pressure_gap(p)).collect();
    let fields: Vec<SpectralField> =
        gaps.iter().map(|g| SpectralField::from_phys(grid, g.clone())).collect::<Result<_>>()?;
    let t = &traj.times;
    let sup_gap = chemin_lerner_norm(t, &fields, &BesovSpec::plain(h - 2.0), TimeNorm::Linf, &part)?
        + chemin_lerner_norm(t, &fields, &BesovSpec::plain(h - 1.0), TimeNorm::Linf, &part)?;
    let l2_gap = chemin_lerner_norm(t, &fields, &BesovSpec::plain(h - 1.0), TimeNorm::L2, &part)?;
    let l2: Vec<f64> = gaps.iter().map(|g| grid.l2_norm(g)).collect();
    let predicted_rate = p.c_star() / p.epsilon;
    let window_end = GAP_WINDOW_EFOLDS / predicted_rate;
    let (wt, wv): (Vec<f64>, Vec<f64>) = t.iter().zip(&l2).filter(|(ti, _)| **ti <= window_end * (1.0 + 1e-12)).unzip();
    Ok(GapDecayReport {
        sup_gap,
        l2_gap_over_sqrt_eps: l2_gap / p.epsilon.sqrt(),
        sup_gap_l2: l2.iter().copied().fold(0.0, f64::max),
        ratio: sup_gap / (p.epsilon * p.tau).sqrt(),
        fitted_rate: fit_decay_rate(&wt, &wv),
        predicted_rate,
        window_end,
    })
}

/// Norm series of the auxiliary unknowns of a pair of trajectories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxReport {
    pub times: Vec<f64>,
    /// Mass-fraction difference `δY` (`δZ` for a relaxation/limit pair).
    pub delta_y: Vec<f64>,
    /// `δQ = Q_a − Q_b` with `Q = P − Γ₁(P₊ − P₋)`.
    pub delta_q: Vec<f64>,
    pub delta_alpha: Vec<f64>,
    pub sup_delta_y: f64,
    pub sup_delta_q: f64,
    pub sup_delta_alpha: f64,
    /// Whether `sup δY ≤ sup δα + 1e-12` held (reported only).
    pub y_below_alpha: bool,
}

pub fn aux_diagnostics(a: &Trajectory, b: &Trajectory, norm: ErrorNorm, rule: RescaleRule) -> Result<AuxReport> {
    if a.grid != b.grid {
        return Err(Error::Shape("grids differ".into()));
    }
    let a = apply_rule(a, rule);
    let eval = NormEval::new(a.grid, norm)?;
    let (b0, b1) = b.span().ok_or_else(|| Error::Range("empty trajectory".into()))?;
    let mut rep = AuxReport {
        times: vec![],
        delta_y: vec![],
        delta_q: vec![],
        delta_alpha: vec![],
        sup_delta_y: 0.0,
        sup_delta_q: 0.0,
        sup_delta_alpha: 0.0,
        y_below_alpha: true,
    };
    for (t, sa) in a.times.iter().zip(&a.states) {
        let tol = 1e-12 * t.abs().max(1.0);
        if *t < b0 - tol || *t > b1 + tol {
            continue;
        }
        let sb = b.state_at(t.clamp(b0, b1))?;
        let xa = aux_unknowns(sa, &a.params)?;
        let xb = aux_unknowns(&sb, &b.params)?;
        rep.times.push(*t);
        rep.delta_y.push(eval.diff(&xa.y, &xb.y)?);
        rep.delta_q.push(eval.diff(&xa.q, &xb.q)?);
        rep.delta_alpha.push(eval.diff(&sa.alpha_plus, &sb.alpha_plus)?);
    }
    if rep.times.is_empty() {
        return Err(Error::Range("the trajectories share no time span".into()));
    }
    let sup = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    rep.sup_delta_y = sup(&rep.delta_y);
    rep.sup_delta_q = sup(&rep.delta_q);
    rep.sup_delta_alpha = sup(&rep.delta_alpha);
    rep.y_below_alpha = rep.sup_delta_y <= rep.sup_delta_alpha + 1e-12;
    Ok(rep)
}
