//! Stored samples of a run and the diffusive change of variables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Fourier, Grid};
use crate::models::{MixtureState, Params};
use crate::solver::state::{conservation, System};

/// Per-sample diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub time: f64,
    pub m_plus: f64,
    pub m_minus: f64,
    pub m_total: f64,
    /// `‖P₊ − P₋‖_{L²}` and `‖P₊ − P₋‖_{L∞}`.
    pub gap_l2: f64,
    pub gap_linf: f64,
    /// `‖P − P̄‖_{L²}` of the mixture pressure.
    pub p_dev_l2: f64,
    pub u_l2: f64,
    /// `‖ρu/τ + ∇P‖_{L²}`; in diffusive variables `‖ϱv + ∇Π‖_{L²}`.
    pub flux_l2: f64,
}

pub const LEDGER_COLUMNS: [&str; 9] =
    ["time", "m_plus", "m_minus", "m_total", "gap_l2", "gap_linf", "p_dev_l2", "u_l2", "flux_l2"];

impl LedgerRow {
    pub fn values(&self) -> [f64; 9] {
        [
            self.time,
            self.m_plus,
            self.m_minus,
            self.m_total,
            self.gap_l2,
            self.gap_linf,
            self.p_dev_l2,
            self.u_l2,
            self.flux_l2,
        ]
    }
}

pub fn vector_l2(grid: Grid, u: &[Vec<f64>]) -> f64 {
    u.iter().map(|c| grid.l2_norm(c).powi(2)).sum::<f64>().sqrt()
}

pub fn ledger_row(system: System, params: &Params, fourier: &Fourier, time: f64, state: &MixtureState) -> LedgerRow {
    let grid = state.grid;
    let (m_plus, m_minus, m_total) = conservation(state);
    let gap = state.pressure_gap(params);
    let (rho, p) = crate::models::mixture_closure(state, params);
    let p_dev: Vec<f64> = p.iter().map(|v| v - params.p_bar).collect();
    let scale = match system {
        System::BN | System::K => 1.0 / params.tau,
        System::KTAU | System::PM => 1.0,
    };
    let grad = fourier.gradient(&p, false);
    let flux: Vec<Vec<f64>> = state
        .u
        .iter()
        .zip(&grad)
        .map(|(uc, gc)| (0..grid.len()).map(|i| scale * rho[i] * uc[i] + gc[i]).collect())
        .collect();
    LedgerRow {
        time,
        m_plus,
        m_minus,
        m_total,
        gap_l2: grid.l2_norm(&gap),
        gap_linf: gap.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
        p_dev_l2: grid.l2_norm(&p_dev),
        u_l2: vector_l2(grid, &state.u),
        flux_l2: vector_l2(grid, &flux),
    }
}

/// Samples of one integration. For PM the stored velocity is the Darcy
/// velocity; for KTAU it is the diffusive velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub system: System,
    pub params: Params,
    pub grid: Grid,
    pub times: Vec<f64>,
    pub states: Vec<MixtureState>,
    pub ledger: Vec<LedgerRow>,
}

impl Trajectory {
    pub fn new(system: System, params: Params, grid: Grid) -> Self {
        Trajectory { system, params, grid, times: Vec::new(), states: Vec::new(), ledger: Vec::new() }
    }

    pub fn push(&mut self, time: f64, state: MixtureState, row: LedgerRow) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(time > last) {
                return Err(Error::Sampling(format!("sample time {time} does not exceed {last}")));
            }
        }
        self.times.push(time);
        self.states.push(state);
        self.ledger.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &MixtureState)> {
        self.times.last().map(|&t| (t, self.states.last().unwrap()))
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((*self.times.first()?, *self.times.last()?))
    }

    /// Index of a stored sample within `rel_tol` of `t`.
    pub fn find_time(&self, t: f64, rel_tol: f64) -> Option<usize> {
        let scale = t.abs().max(1.0);
        let i = self.times.partition_point(|&s| s < t - rel_tol * scale);
        (i < self.len() && (self.times[i] - t).abs() <= rel_tol * scale).then_some(i)
    }

    /// State at `t`: the stored sample if one matches, otherwise four-point
    /// Lagrange interpolation on the nearest samples.
    pub fn state_at(&self, t: f64) -> Result<MixtureState> {
        let (t0, t1) = self.span().ok_or_else(|| Error::Range("empty trajectory".into()))?;
        if let Some(i) = self.find_time(t, 1e-12) {
            return Ok(self.states[i].clone());
        }
        if t < t0 || t > t1 {
            return Err(Error::Range(format!("time {t} outside [{t0}, {t1}]")));
        }
        if self.len() < 4 {
            return Err(Error::Sampling("interpolation needs at least 4 samples".into()));
        }
        let k = self.times.partition_point(|&s| s <= t);
        let start = k.saturating_sub(2).min(self.len() - 4);
        let idx: Vec<usize> = (start..start + 4).collect();
        let w: Vec<f64> = idx
            .iter()
            .map(|&i| {
                idx.iter()
                    .filter(|&&j| j != i)
                    .map(|&j| (t - self.times[j]) / (self.times[i] - self.times[j]))
                    .product()
            })
            .collect();
        let mix = |get: &dyn Fn(&MixtureState) -> &Vec<f64>| -> Vec<f64> {
            let n = self.grid.len();
            let mut out = vec![0.0; n];
            for (&i, &wi) in idx.iter().zip(&w) {
                for (o, v) in out.iter_mut().zip(get(&self.states[i])) {
                    *o += wi * v;
                }
            }
            out
        };
        Ok(MixtureState {
            grid: self.grid,
            alpha_plus: mix(&|s| &s.alpha_plus),
            rho_plus: mix(&|s| &s.rho_plus),
            rho_minus: mix(&|s| &s.rho_minus),
            u: (0..self.grid.dim()).map(|c| mix(&|s| &s.u[c])).collect(),
        })
    }
}

/// `(t, u) ↦ (s, v) = (τt, u/τ)`.
pub fn diffusive_rescale(traj: &Trajectory, tau: f64) -> Trajectory {
    map_time_velocity(traj, tau, 1.0 / tau)
}

/// Inverse of [`diffusive_rescale`].
pub fn diffusive_unscale(traj: &Trajectory, tau: f64) -> Trajectory {
    map_time_velocity(traj, 1.0 / tau, tau)
}

fn map_time_velocity(traj: &Trajectory, time_factor: f64, velocity_factor: f64) -> Trajectory {
    let mut out = traj.clone();
    for t in out.times.iter_mut() {
        *t *= time_factor;
    }
    for s in out.states.iter_mut() {
        for c in s.u.iter_mut() {
            c.iter_mut().for_each(|v| *v *= velocity_factor);
        }
    }
    for row in out.ledger.iter_mut() {
        row.time *= time_factor;
        row.u_l2 *= velocity_factor;
    }
    out
}
