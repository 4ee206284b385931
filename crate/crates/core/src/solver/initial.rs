//! Seeded, band-limited initial data around the constant equilibrium.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::models::{primitive_from_ypg, unreformulate, MixtureState, PMState, Params, ReformState};

use super::state::System;

/// Initial-condition descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    pub seed: u64,
    /// Max norm of each perturbation field.
    pub amplitude: f64,
    /// Inclusive range of excited wavenumber magnitudes.
    pub band: [u32; 2],
    /// Start from equal phase pressures (`w = 0`).
    #[serde(default)]
    pub well_prepared: bool,
    /// BN only: add a pressure gap of max norm `gap_scale·√(ετ)`.
    #[serde(default)]
    pub gap_scale: f64,
}

impl InitialCondition {
    pub fn new(seed: u64, amplitude: f64, band: [u32; 2]) -> Self {
        InitialCondition { seed, amplitude, band, well_prepared: true, gap_scale: 0.0 }
    }

    pub fn validate(&self, grid: Grid) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::Config(format!("ic.amplitude must be non-negative, got {}", self.amplitude)));
        }
        if !(self.gap_scale >= 0.0 && self.gap_scale.is_finite()) {
            return Err(Error::Config(format!("ic.gap_scale must be non-negative, got {}", self.gap_scale)));
        }
        let [lo, hi] = self.band;
        if lo == 0 || lo > hi || 3 * hi as usize > grid.n() {
            return Err(Error::Config(format!(
                "ic.band [{lo}, {hi}] must satisfy 1 <= lo <= hi <= N/3 = {}",
                grid.n() / 3
            )));
        }
        Ok(())
    }
}

/// Random trigonometric sum over wavevectors with `|k|` in the band,
/// rescaled to max norm `amplitude`.
pub fn band_limited_field(rng: &mut ChaCha8Rng, grid: Grid, band: [u32; 2], amplitude: f64) -> Vec<f64> {
    let (lo, hi) = (band[0] as f64, band[1] as f64);
    let hi_i = band[1] as i64;
    let mut modes = Vec::new();
    match grid.dim() {
        1 => {
            for k in band[0] as i64..=hi_i {
                modes.push([k, 0]);
            }
        }
        _ => {
            for kx in 0..=hi_i {
                for ky in -hi_i..=hi_i {
                    if kx == 0 && ky <= 0 {
                        continue;
                    }
                    let m = ((kx * kx + ky * ky) as f64).sqrt();
                    if m >= lo && m <= hi {
                        modes.push([kx, ky]);
                    }
                }
            }
        }
    }
    let coefs: Vec<(f64, f64)> = modes
        .iter()
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    let mut f = grid.sample(|x| {
        modes
            .iter()
            .zip(&coefs)
            .map(|(k, (a, ph))| a * (k[0] as f64 * x[0] + k[1] as f64 * x[1] + ph).cos())
            .sum()
    });
    let m = f.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let s = if m > 0.0 { amplitude / m } else { 0.0 };
    for v in f.iter_mut() {
        *v *= s;
    }
    f
}

/// Random perturbation unknowns, drawn in the order `y, w, r, u₁…u_d`,
/// followed by the unit gap profile.
pub fn perturbation(grid: Grid, ic: &InitialCondition) -> (ReformState, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(ic.seed);
    let a = ic.amplitude;
    let y = band_limited_field(&mut rng, grid, ic.band, a);
    let mut w = band_limited_field(&mut rng, grid, ic.band, a);
    let r = band_limited_field(&mut rng, grid, ic.band, a);
    let u = (0..grid.dim()).map(|_| band_limited_field(&mut rng, grid, ic.band, a)).collect();
    let gap = band_limited_field(&mut rng, grid, ic.band, 1.0);
    if ic.well_prepared {
        w.iter_mut().for_each(|v| *v = 0.0);
    }
    (ReformState { grid, y, w, r, u }, gap)
}

/// Initial state of `system`.
///
/// All systems share the mass fraction `Y`, mixture pressure `P` and velocity
/// `u` of the perturbed state. BN keeps its pressure gap (plus the injected
/// one); K, KTAU and PM start from equal phase pressures. For KTAU the
/// velocity is the diffusive one, `u/τ`; for PM the velocity is dropped.
pub fn make_initial_data(system: System, params: &Params, grid: Grid, ic: &InitialCondition) -> Result<MixtureState> {
    ic.validate(grid)?;
    let (re, profile) = perturbation(grid, ic);
    let base = unreformulate(&re, params)?;
    let n = grid.len();
    let inject = if system == System::BN { ic.gap_scale * (params.epsilon * params.tau).sqrt() } else { 0.0 };
    let mut out = base.clone();
    for i in 0..n {
        let ap = base.alpha_plus[i];
        let (rp, rm) = (base.rho_plus[i], base.rho_minus[i]);
        let (pp, pm) = (params.law_plus.p(rp), params.law_minus.p(rm));
        let rho = ap * rp + (1.0 - ap) * rm;
        let y = ap * rp / rho;
        let p = ap * pp + (1.0 - ap) * pm;
        let gap = if system == System::BN { pp - pm + inject * profile[i] } else { 0.0 };
        let prim = primitive_from_ypg(params, y, p, gap, i)?;
        out.alpha_plus[i] = prim.alpha_plus;
        out.rho_plus[i] = prim.rho_plus;
        out.rho_minus[i] = prim.rho_minus;
    }
    match system {
        System::KTAU => {
            for c in out.u.iter_mut() {
                c.iter_mut().for_each(|v| *v /= params.tau);
            }
        }
        System::PM => {
            for c in out.u.iter_mut() {
                c.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        _ => {}
    }
    out.validate()?;
    Ok(out)
}

pub fn make_pm_initial_data(params: &Params, grid: Grid, ic: &InitialCondition) -> Result<PMState> {
    let m = make_initial_data(System::PM, params, grid, ic)?;
    Ok(PMState { grid, beta_plus: m.alpha_plus, varrho_plus: m.rho_plus, varrho_minus: m.rho_minus })
}
