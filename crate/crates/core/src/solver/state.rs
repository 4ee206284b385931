//! Evolved-variable layouts and the reconstruction of primitive fields.
//!
//! | system | evolved fields                     |
//! |--------|------------------------------------|
//! | BN     | `m₊, ρ, q₁..q_d, P₊−P₋`            |
//! | K      | `m₊, ρ, q₁..q_d`                   |
//! | KTAU   | `m₊, ϱ, ϱv₁..ϱv_d` (diffusive time) |
//! | PM     | `m₊ − Ȳϱ, ϱ`                       |
//!
//! Here `m₊ = α₊ρ₊` and `q = ρu`. The volume fraction is recovered from
//! the phase masses and the pressure gap (zero for K, KTAU and PM).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::models::{fraction_from_masses, MixtureState, PMState, Params};

use super::stepper::Fields;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum System {
    BN,
    K,
    KTAU,
    PM,
}

impl System {
    pub fn as_str(&self) -> &'static str {
        match self {
            System::BN => "BN",
            System::K => "K",
            System::KTAU => "KTAU",
            System::PM => "PM",
        }
    }

    pub fn field_count(&self, dim: usize) -> usize {
        match self {
            System::BN => 3 + dim,
            System::K | System::KTAU => 2 + dim,
            System::PM => 2,
        }
    }

    pub fn has_velocity(&self) -> bool {
        !matches!(self, System::PM)
    }
}

impl std::str::FromStr for System {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "BN" => Ok(System::BN),
            "K" => Ok(System::K),
            "KTAU" => Ok(System::KTAU),
            "PM" => Ok(System::PM),
            other => Err(Error::Config(format!("unknown system \"{other}\""))),
        }
    }
}

/// Pointwise primitive fields decoded from the evolved variables.
#[derive(Clone, Debug)]
pub struct Decoded {
    pub alpha: Vec<f64>,
    pub rho_plus: Vec<f64>,
    pub rho_minus: Vec<f64>,
    pub rho: Vec<f64>,
    pub m_plus: Vec<f64>,
    pub p_plus: Vec<f64>,
    pub p_minus: Vec<f64>,
    /// Mixture pressure `α₊P₊ + α₋P₋`.
    pub p: Vec<f64>,
    /// Velocity components (`q/ρ`); empty for PM.
    pub u: Vec<Vec<f64>>,
}

fn check_finite(y: &Fields) -> Result<()> {
    for f in y {
        if let Some(i) = f.iter().position(|v| !v.is_finite()) {
            return Err(Error::Inadmissible { index: i, reason: "non-finite value".into() });
        }
    }
    Ok(())
}

pub fn decode(system: System, params: &Params, grid: Grid, y: &Fields) -> Result<Decoded> {
    check_finite(y)?;
    let n = grid.len();
    let d = grid.dim();
    let (m_plus, rho): (Vec<f64>, Vec<f64>) = match system {
        System::PM => {
            let yb = params.y_bar();
            (y[0].iter().zip(&y[1]).map(|(a, r)| a + yb * r).collect(), y[1].clone())
        }
        _ => (y[0].clone(), y[1].clone()),
    };
    let mut out = Decoded {
        alpha: Vec::with_capacity(n),
        rho_plus: Vec::with_capacity(n),
        rho_minus: Vec::with_capacity(n),
        rho: rho.clone(),
        m_plus: m_plus.clone(),
        p_plus: Vec::with_capacity(n),
        p_minus: Vec::with_capacity(n),
        p: Vec::with_capacity(n),
        u: Vec::new(),
    };
    for i in 0..n {
        let gap = if system == System::BN { y[2 + d][i] } else { 0.0 };
        let prim = fraction_from_masses(params, m_plus[i], rho[i] - m_plus[i], gap, params.alpha_bar_plus, i)?;
        let pp = params.law_plus.p(prim.rho_plus);
        let pm = params.law_minus.p(prim.rho_minus);
        out.alpha.push(prim.alpha_plus);
        out.rho_plus.push(prim.rho_plus);
        out.rho_minus.push(prim.rho_minus);
        out.p_plus.push(pp);
        out.p_minus.push(pm);
        out.p.push(prim.alpha_plus * pp + (1.0 - prim.alpha_plus) * pm);
    }
    if system.has_velocity() {
        out.u = (0..d).map(|c| y[2 + c].iter().zip(&rho).map(|(q, r)| q / r).collect()).collect();
    }
    Ok(out)
}

/// Evolved variables of a mixture state. For KTAU the velocity of the state
/// is the diffusive velocity `v`.
pub fn encode(system: System, params: &Params, state: &MixtureState) -> Result<Fields> {
    state.validate()?;
    let n = state.grid.len();
    let m_plus = state.mass_plus();
    let rho: Vec<f64> = (0..n)
        .map(|i| {
            let a = state.alpha_plus[i];
            a * state.rho_plus[i] + (1.0 - a) * state.rho_minus[i]
        })
        .collect();
    let mut out = Vec::new();
    match system {
        System::PM => {
            let yb = params.y_bar();
            out.push(m_plus.iter().zip(&rho).map(|(m, r)| m - yb * r).collect());
            out.push(rho);
        }
        _ => {
            out.push(m_plus);
            for c in &state.u {
                out.push(c.iter().zip(&rho).map(|(u, r)| u * r).collect());
            }
            out.insert(1, rho);
            if system == System::BN {
                out.push(state.pressure_gap(params));
            }
        }
    }
    Ok(out)
}

/// Mixture state from decoded fields; `u` overrides the stored velocity.
pub fn to_mixture(grid: Grid, dec: &Decoded, u: Option<Vec<Vec<f64>>>) -> MixtureState {
    MixtureState {
        grid,
        alpha_plus: dec.alpha.clone(),
        rho_plus: dec.rho_plus.clone(),
        rho_minus: dec.rho_minus.clone(),
        u: u.unwrap_or_else(|| dec.u.clone()),
    }
}

pub fn to_pm_state(grid: Grid, dec: &Decoded) -> PMState {
    PMState {
        grid,
        beta_plus: dec.alpha.clone(),
        varrho_plus: dec.rho_plus.clone(),
        varrho_minus: dec.rho_minus.clone(),
    }
}

/// Domain integrals `(∫α₊ρ₊, ∫α₋ρ₋, ∫ρ)`.
pub fn conservation(state: &MixtureState) -> (f64, f64, f64) {
    let grid = state.grid;
    let mp = grid.integral(&state.mass_plus());
    let rho: Vec<f64> = (0..grid.len())
        .map(|i| {
            let a = state.alpha_plus[i];
            a * state.rho_plus[i] + (1.0 - a) * state.rho_minus[i]
        })
        .collect();
    let total = grid.integral(&rho);
    (mp, total - mp, total)
}
