//! Physical parameterization of the two-phase systems: gamma pressure laws,
//! equilibrium constants, primitive and perturbation unknowns, coefficient
//! fields and the derived quantities used by the solver and diagnostics.
//!
//! Every operation here is a pure function of its inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Fourier, Grid};

/// Fractions below this value (on either side) are rejected as degenerate.
pub const MIN_FRACTION: f64 = 1e-8;

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 50;

/// Gamma law `P(s) = A s^γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureLaw {
    pub a: f64,
    pub gamma: f64,
}

impl PressureLaw {
    pub fn new(a: f64, gamma: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParams(format!("pressure coefficient must be positive, got {a}")));
        }
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(Error::InvalidParams(format!("adiabatic exponent must be >= 1, got {gamma}")));
        }
        Ok(PressureLaw { a, gamma })
    }

    /// `A s^γ` without the positivity check; callers guarantee `s > 0`.
    #[inline]
    pub fn p(&self, s: f64) -> f64 {
        self.a * s.powf(self.gamma)
    }

    /// Inverse law `s = (p / A)^{1/γ}`.
    #[inline]
    pub fn density(&self, p: f64) -> f64 {
        (p / self.a).powf(1.0 / self.gamma)
    }
}

pub fn pressure_eval(law: &PressureLaw, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("non-positive density {s} passed to a pressure law")));
    }
    Ok(law.p(s))
}

/// Density of the minus phase in pressure equilibrium with `rho_bar_plus`.
pub fn equilibrium_close(law_plus: &PressureLaw, law_minus: &PressureLaw, rho_bar_plus: f64) -> Result<f64> {
    let p = pressure_eval(law_plus, rho_bar_plus)?;
    Ok(law_minus.density(p))
}

/// Relaxation times, pressure laws and the equilibrium they determine.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub epsilon: f64,
    pub tau: f64,
    pub law_plus: PressureLaw,
    pub law_minus: PressureLaw,
    pub alpha_bar_plus: f64,
    pub rho_bar_plus: f64,
    pub rho_bar_minus: f64,
    pub rho_bar: f64,
    pub p_bar: f64,
    /// `F̄₀ … F̄₃`.
    pub fbar: [f64; 4],
}

impl Params {
    pub fn new(
        epsilon: f64,
        tau: f64,
        law_plus: PressureLaw,
        law_minus: PressureLaw,
        alpha_bar_plus: f64,
        rho_bar_plus: f64,
    ) -> Result<Self> {
        let law_plus = PressureLaw::new(law_plus.a, law_plus.gamma)?;
        let law_minus = PressureLaw::new(law_minus.a, law_minus.gamma)?;
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidParams(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::InvalidParams(format!("tau must lie in (0, 1], got {tau}")));
        }
        if epsilon > tau {
            return Err(Error::InvalidParams(format!(
                "epsilon ({epsilon}) must not exceed tau ({tau})"
            )));
        }
        if law_minus.gamma >= law_plus.gamma {
            return Err(Error::InvalidParams(format!(
                "need gamma_minus < gamma_plus, got {} and {}",
                law_minus.gamma, law_plus.gamma
            )));
        }
        if !(alpha_bar_plus > 0.0 && alpha_bar_plus < 1.0) {
            return Err(Error::InvalidParams(format!(
                "alpha_bar_plus must lie in (0, 1), got {alpha_bar_plus}"
            )));
        }
        if !(rho_bar_plus > 0.0 && rho_bar_plus.is_finite()) {
            return Err(Error::InvalidParams(format!("rho_bar_plus must be positive, got {rho_bar_plus}")));
        }
        let rho_bar_minus = equilibrium_close(&law_plus, &law_minus, rho_bar_plus)?;
        let am = 1.0 - alpha_bar_plus;
        let rho_bar = alpha_bar_plus * rho_bar_plus + am * rho_bar_minus;
        let p_bar = law_plus.p(rho_bar_plus);
        let (gp, gm) = (law_plus.gamma, law_minus.gamma);
        let den = gp * am + gm * alpha_bar_plus;
        let fbar = [
            1.0 / rho_bar,
            (gp - gm) * alpha_bar_plus * am * p_bar / den,
            den * p_bar,
            gp * gm * p_bar / den,
        ];
        Ok(Params {
            epsilon,
            tau,
            law_plus,
            law_minus,
            alpha_bar_plus,
            rho_bar_plus,
            rho_bar_minus,
            rho_bar,
            p_bar,
            fbar,
        })
    }

    /// γ₊ = 2, γ₋ = 1.4, A± = 1, ᾱ₊ = 1/2, ρ̄₊ = 1.
    pub fn reference(epsilon: f64, tau: f64) -> Result<Self> {
        Params::new(
            epsilon,
            tau,
            PressureLaw { a: 1.0, gamma: 2.0 },
            PressureLaw { a: 1.0, gamma: 1.4 },
            0.5,
            1.0,
        )
    }

    /// Same laws and equilibrium, different relaxation times.
    pub fn with_relaxation(&self, epsilon: f64, tau: f64) -> Result<Self> {
        Params::new(epsilon, tau, self.law_plus, self.law_minus, self.alpha_bar_plus, self.rho_bar_plus)
    }

    pub fn alpha_bar_minus(&self) -> f64 {
        1.0 - self.alpha_bar_plus
    }

    pub fn gamma_plus(&self) -> f64 {
        self.law_plus.gamma
    }

    pub fn gamma_minus(&self) -> f64 {
        self.law_minus.gamma
    }

    pub fn gamma_gap(&self) -> f64 {
        self.law_plus.gamma - self.law_minus.gamma
    }

    /// Equilibrium mass fraction `ᾱ₊ρ̄₊/ρ̄`.
    pub fn y_bar(&self) -> f64 {
        self.alpha_bar_plus * self.rho_bar_plus / self.rho_bar
    }

    /// Linear damping coefficient of the pressure gap, equal to `F̄₂`.
    pub fn c_star(&self) -> f64 {
        self.fbar[2]
    }

    /// Diffusion coefficient of the limiting pressure equation.
    pub fn c_bar(&self) -> f64 {
        self.fbar[3] / self.rho_bar
    }

    /// Sound-speed scale of the linearized hyperbolic part.
    pub fn wave_speed(&self) -> f64 {
        (self.fbar[0] * (self.fbar[3] + self.gamma_gap() * self.fbar[1])).sqrt()
    }
}

/// Primitive unknowns of the one-velocity two-phase systems.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureState {
    pub grid: Grid,
    pub alpha_plus: Vec<f64>,
    pub rho_plus: Vec<f64>,
    pub rho_minus: Vec<f64>,
    /// One vector per spatial component.
    pub u: Vec<Vec<f64>>,
}

impl MixtureState {
    pub fn equilibrium(grid: Grid, params: &Params) -> Self {
        let n = grid.len();
        MixtureState {
            grid,
            alpha_plus: vec![params.alpha_bar_plus; n],
            rho_plus: vec![params.rho_bar_plus; n],
            rho_minus: vec![params.rho_bar_minus; n],
            u: vec![vec![0.0; n]; grid.dim()],
        }
    }

    pub fn check_shape(&self) -> Result<()> {
        let n = self.grid.len();
        let ok = self.alpha_plus.len() == n
            && self.rho_plus.len() == n
            && self.rho_minus.len() == n
            && self.u.len() == self.grid.dim()
            && self.u.iter().all(|c| c.len() == n);
        if ok {
            Ok(())
        } else {
            Err(Error::Shape("mixture state fields do not match the grid".into()))
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.check_shape()?;
        for i in 0..self.grid.len() {
            let a = self.alpha_plus[i];
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::Inadmissible { index: i, reason: format!("alpha_plus = {a}") });
            }
            if !(self.rho_plus[i] > 0.0) || !(self.rho_minus[i] > 0.0) {
                return Err(Error::Inadmissible {
                    index: i,
                    reason: format!("densities ({}, {})", self.rho_plus[i], self.rho_minus[i]),
                });
            }
            if self.u.iter().any(|c| !c[i].is_finite()) {
                return Err(Error::Inadmissible { index: i, reason: "non-finite velocity".into() });
            }
        }
        Ok(())
    }

    /// Phase pressures `(P₊(ρ₊), P₋(ρ₋))`.
    pub fn phase_pressures(&self, params: &Params) -> (Vec<f64>, Vec<f64>) {
        let pp = self.rho_plus.iter().map(|&r| params.law_plus.p(r)).collect();
        let pm = self.rho_minus.iter().map(|&r| params.law_minus.p(r)).collect();
        (pp, pm)
    }

    pub fn pressure_gap(&self, params: &Params) -> Vec<f64> {
        let (pp, pm) = self.phase_pressures(params);
        pp.iter().zip(&pm).map(|(a, b)| a - b).collect()
    }

    pub fn mass_plus(&self) -> Vec<f64> {
        self.alpha_plus.iter().zip(&self.rho_plus).map(|(a, r)| a * r).collect()
    }
}

/// Mixture density and pressure `(ρ, P)`.
pub fn mixture_closure(state: &MixtureState, params: &Params) -> (Vec<f64>, Vec<f64>) {
    let n = state.grid.len();
    let mut rho = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    for i in 0..n {
        let a = state.alpha_plus[i];
        let (rp, rm) = (state.rho_plus[i], state.rho_minus[i]);
        rho.push(a * rp + (1.0 - a) * rm);
        p.push(a * params.law_plus.p(rp) + (1.0 - a) * params.law_minus.p(rm));
    }
    (rho, p)
}

/// Perturbation unknowns `(y, w, r, u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReformState {
    pub grid: Grid,
    pub y: Vec<f64>,
    pub w: Vec<f64>,
    pub r: Vec<f64>,
    pub u: Vec<Vec<f64>>,
}

impl ReformState {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        ReformState {
            grid,
            y: vec![0.0; n],
            w: vec![0.0; n],
            r: vec![0.0; n],
            u: vec![vec![0.0; n]; grid.dim()],
        }
    }

    /// Max norm over the scalar unknowns and velocity components.
    pub fn max_abs(&self) -> f64 {
        let fields = [&self.y, &self.w, &self.r].into_iter().chain(self.u.iter());
        fields.flat_map(|f| f.iter()).fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

pub fn reformulate(state: &MixtureState, params: &Params) -> ReformState {
    let (gp, gm) = (params.gamma_plus(), params.gamma_minus());
    let y_bar = params.y_bar();
    let n = state.grid.len();
    let mut out = ReformState::zeros(state.grid);
    for i in 0..n {
        let ap = state.alpha_plus[i];
        let am = 1.0 - ap;
        let (rp, rm) = (state.rho_plus[i], state.rho_minus[i]);
        let (pp, pm) = (params.law_plus.p(rp), params.law_minus.p(rm));
        let rho = ap * rp + am * rm;
        let p = ap * pp + am * pm;
        out.y[i] = ap * rp / rho - y_bar;
        out.w[i] = ap * am * (pp - pm) / (gp * am + gm * ap);
        out.r[i] = p - params.p_bar - (gp - gm) * out.w[i];
    }
    out.u = state.u.clone();
    out
}

/// Pointwise primitive values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    pub alpha_plus: f64,
    pub rho_plus: f64,
    pub rho_minus: f64,
}

/// Solve for the state with mass fraction `y_target`, mixture pressure `p`
/// and pressure gap `gap(α)` by damped Newton in `α₊`.
fn solve_fraction(
    params: &Params,
    y_target: f64,
    p: f64,
    gap: impl Fn(f64) -> (f64, f64),
    index: usize,
) -> Result<Primitive> {
    let (lp, lm) = (params.law_plus, params.law_minus);
    let eval = |a: f64| -> Option<(f64, f64, Primitive)> {
        let (g, dg) = gap(a);
        let pp = p + (1.0 - a) * g;
        let pm = p - a * g;
        if !(pp > 0.0 && pm > 0.0) {
            return None;
        }
        let dpp = -g + (1.0 - a) * dg;
        let dpm = -g - a * dg;
        let rp = lp.density(pp);
        let rm = lm.density(pm);
        let drp = rp / (lp.gamma * pp) * dpp;
        let drm = rm / (lm.gamma * pm) * dpm;
        let rho = a * rp + (1.0 - a) * rm;
        let drho = rp + a * drp - rm + (1.0 - a) * drm;
        let y = a * rp / rho;
        let dy = ((rp + a * drp) * rho - a * rp * drho) / (rho * rho);
        Some((y - y_target, dy, Primitive { alpha_plus: a, rho_plus: rp, rho_minus: rm }))
    };

    // Start at equilibrium; if the phase pressures are not positive there,
    // fall back to the first admissible point of a coarse scan.
    let start = std::iter::once(params.alpha_bar_plus)
        .chain((1..64).map(|k| k as f64 / 64.0))
        .find_map(|a| eval(a).map(|e| (a, e)));
    let Some((mut a, (mut res, mut dres, mut prim))) = start else {
        return Err(Error::NonConvergence { index, iterations: 0, residual: f64::INFINITY });
    };
    for _ in 0..NEWTON_MAX_ITER {
        if res.abs() < NEWTON_TOL {
            return Ok(prim);
        }
        if !(dres.is_finite()) || dres == 0.0 {
            break;
        }
        let step = res / dres;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = a - lambda * step;
            if cand > 0.0 && cand < 1.0 {
                if let Some((r2, d2, p2)) = eval(cand) {
                    if r2.abs() < res.abs() || lambda < 1e-6 {
                        a = cand;
                        res = r2;
                        dres = d2;
                        prim = p2;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res.abs() < NEWTON_TOL {
        return Ok(prim);
    }
    Err(Error::NonConvergence { index, iterations: NEWTON_MAX_ITER, residual: res.abs() })
}

fn check_primitive(p: Primitive, index: usize) -> Result<Primitive> {
    let a = p.alpha_plus;
    if !(a > 0.0 && a < 1.0) || !(p.rho_plus > 0.0) || !(p.rho_minus > 0.0) {
        return Err(Error::Inadmissible {
            index,
            reason: format!("reconstructed ({a}, {}, {})", p.rho_plus, p.rho_minus),
        });
    }
    Ok(p)
}

/// Pointwise inverse of [`reformulate`] for scalar values `(y, w, r)`.
pub fn unreformulate_point(params: &Params, y: f64, w: f64, r: f64, index: usize) -> Result<Primitive> {
    let (gp, gm) = (params.gamma_plus(), params.gamma_minus());
    let p = params.p_bar + r + (gp - gm) * w;
    if !(p > 0.0) {
        return Err(Error::Inadmissible { index, reason: format!("mixture pressure {p}") });
    }
    let gap = |a: f64| {
        let b = 1.0 - a;
        let num = gp * b + gm * a;
        let den = a * b;
        let s = num / den;
        let ds = ((gm - gp) * den - num * (1.0 - 2.0 * a)) / (den * den);
        (w * s, w * ds)
    };
    solve_fraction(params, params.y_bar() + y, p, gap, index).and_then(|q| check_primitive(q, index))
}

/// Primitive values from mass fraction `Y`, mixture pressure and pressure gap.
pub fn primitive_from_ypg(params: &Params, y_frac: f64, p: f64, gap: f64, index: usize) -> Result<Primitive> {
    if !(p > 0.0) {
        return Err(Error::Inadmissible { index, reason: format!("mixture pressure {p}") });
    }
    solve_fraction(params, y_frac, p, |_| (gap, 0.0), index).and_then(|q| check_primitive(q, index))
}

pub fn unreformulate(re: &ReformState, params: &Params) -> Result<MixtureState> {
    let mut out = MixtureState::equilibrium(re.grid, params);
    for i in 0..re.grid.len() {
        let p = unreformulate_point(params, re.y[i], re.w[i], re.r[i], i)?;
        out.alpha_plus[i] = p.alpha_plus;
        out.rho_plus[i] = p.rho_plus;
        out.rho_minus[i] = p.rho_minus;
    }
    out.u = re.u.clone();
    Ok(out)
}

/// Volume fraction from the phase masses `m± = α±ρ±` and the pressure gap
/// `P₊ − P₋`. The gap is strictly decreasing in `α₊`, so a bracketed
/// Newton iteration always converges.
pub fn fraction_from_masses(
    params: &Params,
    m_plus: f64,
    m_minus: f64,
    gap: f64,
    guess: f64,
    index: usize,
) -> Result<Primitive> {
    if !(m_plus > 0.0 && m_minus > 0.0) {
        return Err(Error::Inadmissible {
            index,
            reason: format!("phase masses ({m_plus}, {m_minus})"),
        });
    }
    let (lp, lm) = (params.law_plus, params.law_minus);
    let f = |a: f64| {
        let rp = m_plus / a;
        let rm = m_minus / (1.0 - a);
        let pp = lp.p(rp);
        let pm = lm.p(rm);
        let val = pp - pm - gap;
        let dval = -lp.gamma * pp / a - lm.gamma * pm / (1.0 - a);
        (val, dval)
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut a = if guess > 0.0 && guess < 1.0 { guess } else { params.alpha_bar_plus };
    for _ in 0..200 {
        let (v, dv) = f(a);
        if v == 0.0 {
            break;
        }
        if v > 0.0 {
            lo = a;
        } else {
            hi = a;
        }
        let mut next = a - v / dv;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - a).abs() <= 1e-15 * a.max(1e-300) {
            a = next;
            break;
        }
        a = next;
    }
    let prim = Primitive {
        alpha_plus: a,
        rho_plus: m_plus / a,
        rho_minus: m_minus / (1.0 - a),
    };
    if a.min(1.0 - a) < MIN_FRACTION {
        return Err(Error::DegenerateFraction { index, value: a.min(1.0 - a) });
    }
    check_primitive(prim, index)
}

/// Coefficient fields `F₀…F₄`, deviations `G₀…G₃` and `Γ₁…Γ₃`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coeffs {
    pub f: [Vec<f64>; 5],
    pub g: [Vec<f64>; 4],
    pub gamma1: Vec<f64>,
    pub gamma2: Vec<f64>,
    pub gamma3: Vec<f64>,
}

/// Scalar coefficient values at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointCoeffs {
    pub f: [f64; 5],
    pub gamma: [f64; 3],
}

fn guard_fraction(a: f64, index: usize) -> Result<()> {
    let m = a.min(1.0 - a);
    if !(m >= MIN_FRACTION) {
        return Err(Error::DegenerateFraction { index, value: m });
    }
    Ok(())
}

pub fn point_coeffs(params: &Params, prim: Primitive, index: usize) -> Result<PointCoeffs> {
    let ap = prim.alpha_plus;
    guard_fraction(ap, index)?;
    let am = 1.0 - ap;
    let (gp, gm) = (params.gamma_plus(), params.gamma_minus());
    let pp = params.law_plus.p(prim.rho_plus);
    let pm = params.law_minus.p(prim.rho_minus);
    let rho = ap * prim.rho_plus + am * prim.rho_minus;
    let p = ap * pp + am * pm;
    let den = gp * am + gm * ap;
    let w = ap * am * (pp - pm) / den;
    let r = p - params.p_bar - (gp - gm) * w;
    let pr = params.p_bar + r;
    let f0 = 1.0 / rho;
    let f1 = (gp - gm) * ap * am / den * pr + (gp * gp * am + gm * gm * ap) / den * w;
    let f2 = den * pr - ((gp - gp * gp) * am * am - (gm - gm * gm) * ap * ap) / (ap * am) * w;
    let f3 = gp * gm * p / den;
    let f4 = gp * gm / (ap * am) * (1.0 - gp * am - gm * ap);
    let d = gp * am * pp + gm * ap * pm;
    let g1 = ap * am * ((gp - 1.0) * pp - (gm - 1.0) * pm) / d;
    let g2 = gp * gm * pp * pm / d;
    let g3 = ap * am * (gp * pp - gm * pm) / d;
    Ok(PointCoeffs { f: [f0, f1, f2, f3, f4], gamma: [g1, g2, g3] })
}

fn primitive_at(state: &MixtureState, i: usize) -> Primitive {
    Primitive {
        alpha_plus: state.alpha_plus[i],
        rho_plus: state.rho_plus[i],
        rho_minus: state.rho_minus[i],
    }
}

pub fn coeffs(state: &MixtureState, params: &Params) -> Result<Coeffs> {
    let n = state.grid.len();
    let mut f: [Vec<f64>; 5] = Default::default();
    let mut g: [Vec<f64>; 4] = Default::default();
    let mut gam: [Vec<f64>; 3] = Default::default();
    for v in f.iter_mut().chain(g.iter_mut()).chain(gam.iter_mut()) {
        v.reserve(n);
    }
    for i in 0..n {
        let pc = point_coeffs(params, primitive_at(state, i), i)?;
        for k in 0..5 {
            f[k].push(pc.f[k]);
        }
        for k in 0..4 {
            g[k].push(pc.f[k] - params.fbar[k]);
        }
        for k in 0..3 {
            gam[k].push(pc.gamma[k]);
        }
    }
    let [gamma1, gamma2, gamma3] = gam;
    Ok(Coeffs { f, g, gamma1, gamma2, gamma3 })
}

/// `z = u + τ(F̄₀ + H₄)∇r`.
pub fn effective_flux(
    fourier: &Fourier,
    u: &[Vec<f64>],
    r: &[f64],
    h4: &[f64],
    params: &Params,
) -> Vec<Vec<f64>> {
    let grad = fourier.gradient(r, false);
    u.iter()
        .zip(grad)
        .map(|(uc, gc)| {
            uc.iter()
                .zip(&gc)
                .zip(h4)
                .map(|((&ui, &gi), &hi)| ui + params.tau * (params.fbar[0] + hi) * gi)
                .collect()
        })
        .collect()
}

/// Limit-system unknowns `(β₊, ϱ₊, ϱ₋)` sharing the pressure `Π`.
#[derive(Clone, Debug, PartialEq)]
pub struct PMState {
    pub grid: Grid,
    pub beta_plus: Vec<f64>,
    pub varrho_plus: Vec<f64>,
    pub varrho_minus: Vec<f64>,
}

impl PMState {
    pub fn equilibrium(grid: Grid, params: &Params) -> Self {
        let n = grid.len();
        PMState {
            grid,
            beta_plus: vec![params.alpha_bar_plus; n],
            varrho_plus: vec![params.rho_bar_plus; n],
            varrho_minus: vec![params.rho_bar_minus; n],
        }
    }

    /// Build from fractions and the common pressure; densities follow from the laws.
    pub fn from_pressure(grid: Grid, beta_plus: Vec<f64>, pi: &[f64], params: &Params) -> Result<Self> {
        if beta_plus.len() != grid.len() || pi.len() != grid.len() {
            return Err(Error::Shape("porous-media fields do not match the grid".into()));
        }
        for (i, &p) in pi.iter().enumerate() {
            if !(p > 0.0) {
                return Err(Error::Inadmissible { index: i, reason: format!("pressure {p}") });
            }
        }
        let state = PMState {
            grid,
            varrho_plus: pi.iter().map(|&p| params.law_plus.density(p)).collect(),
            varrho_minus: pi.iter().map(|&p| params.law_minus.density(p)).collect(),
            beta_plus,
        };
        state.validate(params)?;
        Ok(state)
    }

    pub fn pressure(&self, params: &Params) -> Vec<f64> {
        self.varrho_plus.iter().map(|&r| params.law_plus.p(r)).collect()
    }

    pub fn density(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| {
                let b = self.beta_plus[i];
                b * self.varrho_plus[i] + (1.0 - b) * self.varrho_minus[i]
            })
            .collect()
    }

    pub fn validate(&self, params: &Params) -> Result<()> {
        let n = self.grid.len();
        if self.beta_plus.len() != n || self.varrho_plus.len() != n || self.varrho_minus.len() != n {
            return Err(Error::Shape("porous-media fields do not match the grid".into()));
        }
        for i in 0..n {
            let b = self.beta_plus[i];
            if !(b > 0.0 && b < 1.0) || !(self.varrho_plus[i] > 0.0) || !(self.varrho_minus[i] > 0.0) {
                return Err(Error::Inadmissible { index: i, reason: "fraction or density out of range".into() });
            }
            let d = params.law_plus.p(self.varrho_plus[i]) - params.law_minus.p(self.varrho_minus[i]);
            if d.abs() >= 1e-10 * params.p_bar {
                return Err(Error::Inadmissible { index: i, reason: format!("phase pressures differ by {d:.3e}") });
            }
        }
        Ok(())
    }

    /// View as a mixture state with zero velocity.
    pub fn to_mixture(&self) -> MixtureState {
        MixtureState {
            grid: self.grid,
            alpha_plus: self.beta_plus.clone(),
            rho_plus: self.varrho_plus.clone(),
            rho_minus: self.varrho_minus.clone(),
            u: vec![vec![0.0; self.grid.len()]; self.grid.dim()],
        }
    }
}

/// Darcy velocity `v = −∇Π/ϱ`.
pub fn darcy_velocity(fourier: &Fourier, pm: &PMState, params: &Params) -> Vec<Vec<f64>> {
    let pi = pm.pressure(params);
    let rho = pm.density();
    fourier
        .gradient(&pi, false)
        .into_iter()
        .map(|g| g.iter().zip(&rho).map(|(gi, ri)| -gi / ri).collect())
        .collect()
}

/// Auxiliary unknowns `Q = P − Γ₁(P₊−P₋)`, `Y = α₊ρ₊/ρ` and the pressure gap.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxFields {
    pub q: Vec<f64>,
    pub y: Vec<f64>,
    pub pgap: Vec<f64>,
}

pub fn aux_unknowns(state: &MixtureState, params: &Params) -> Result<AuxFields> {
    let n = state.grid.len();
    let mut out = AuxFields { q: Vec::with_capacity(n), y: Vec::with_capacity(n), pgap: Vec::with_capacity(n) };
    for i in 0..n {
        let prim = primitive_at(state, i);
        let pc = point_coeffs(params, prim, i)?;
        let ap = prim.alpha_plus;
        let pp = params.law_plus.p(prim.rho_plus);
        let pm = params.law_minus.p(prim.rho_minus);
        let gap = pp - pm;
        let p = ap * pp + (1.0 - ap) * pm;
        let rho = ap * prim.rho_plus + (1.0 - ap) * prim.rho_minus;
        out.q.push(p - pc.gamma[0] * gap);
        out.y.push(ap * prim.rho_plus / rho);
        out.pgap.push(gap);
    }
    Ok(out)
}
