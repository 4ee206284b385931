//! Eigenvalues of the linearized symbol in the `(w, r, m)` variables,
//! their regime asymptotics and the decay curve of the damped Euler model.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the normalized symbol (all `F̄ᵢ = 1`, `F̄₁ = γ₊ − γ₋`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolParams {
    pub epsilon: f64,
    pub tau: f64,
    pub gamma_gap: f64,
    pub xi: f64,
}

impl SymbolParams {
    pub fn new(epsilon: f64, tau: f64, gamma_gap: f64, xi: f64) -> Result<Self> {
        if !(epsilon > 0.0 && tau > 0.0 && xi >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "symbol needs epsilon, tau > 0 and xi >= 0, got ({epsilon}, {tau}, {xi})"
            )));
        }
        Ok(SymbolParams { epsilon, tau, gamma_gap, xi })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Low,
    Medium,
    High,
    Boundary,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Low => "low",
            Regime::Medium => "medium",
            Regime::High => "high",
            Regime::Boundary => "boundary",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenTriple {
    pub lambda: [Complex64; 3],
    pub regime: Option<Regime>,
}

impl EigenTriple {
    pub fn max_re(&self) -> f64 {
        self.lambda.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Root with the largest real part (the slowest decaying mode).
    pub fn slowest(&self) -> Complex64 {
        *self
            .lambda
            .iter()
            .max_by(|a, b| a.re.total_cmp(&b.re))
            .expect("three roots")
    }

    /// Roots sorted by real part, then imaginary part.
    pub fn sorted(&self) -> [Complex64; 3] {
        let mut r = self.lambda;
        r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        r
    }

    /// Root closest to `target`.
    pub fn nearest(&self, target: Complex64) -> Complex64 {
        *self
            .lambda
            .iter()
            .min_by(|a, b| (*a - target).norm().total_cmp(&(*b - target).norm()))
            .expect("three roots")
    }
}

/// `(a₂, a₁, a₀)` of `λ³ + a₂λ² + a₁λ + a₀`.
pub fn cubic_coeffs(p: &SymbolParams) -> (f64, f64, f64) {
    let xi2 = p.xi * p.xi;
    let g2 = p.gamma_gap * p.gamma_gap;
    (
        1.0 / p.tau + 1.0 / p.epsilon,
        1.0 / (p.epsilon * p.tau) + (g2 + 1.0) * xi2,
        xi2 / p.epsilon,
    )
}

/// Cubic coefficients of the symbol with general constants `F̄₀…F̄₃`.
pub fn cubic_coeffs_general(p: &SymbolParams, fbar: [f64; 4]) -> (f64, f64, f64) {
    let [f0, f1, f2, f3] = fbar;
    let xi2 = p.xi * p.xi;
    let a = f2 / p.epsilon;
    let b = 1.0 / p.tau;
    (a + b, a * b + f0 * (f3 + p.gamma_gap * f1) * xi2, a * f0 * f3 * xi2)
}

fn eval_cubic(a2: f64, a1: f64, a0: f64, z: Complex64) -> (Complex64, Complex64) {
    let f = ((z + a2) * z + a1) * z + a0;
    let df = (3.0 * z + 2.0 * a2) * z + a1;
    (f, df)
}

/// Relative residual `|f(λ)| / max(1, |λ|³)`.
pub fn cubic_residual(a2: f64, a1: f64, a0: f64, z: Complex64) -> f64 {
    eval_cubic(a2, a1, a0, z).0.norm() / z.norm().powi(3).max(1.0)
}

/// Backward error `|f(λ)| / (|λ|³ + |a₂||λ|² + |a₁||λ| + |a₀|)`: the
/// relative coefficient perturbation that makes `λ` an exact root. Unlike
/// [`cubic_residual`] it stays at rounding level when the coefficients are
/// large and the root is small.
pub fn cubic_backward_error(a2: f64, a1: f64, a0: f64, z: Complex64) -> f64 {
    let m = z.norm();
    let scale = ((m + a2.abs()) * m + a1.abs()) * m + a0.abs();
    if scale == 0.0 {
        return 0.0;
    }
    eval_cubic(a2, a1, a0, z).0.norm() / scale
}

fn polish(a2: f64, a1: f64, a0: f64, mut z: Complex64) -> Complex64 {
    let mut f = eval_cubic(a2, a1, a0, z).0.norm();
    for _ in 0..3 {
        let (fz, dz) = eval_cubic(a2, a1, a0, z);
        if dz.norm() == 0.0 || fz.norm() == 0.0 {
            break;
        }
        let cand = z - fz / dz;
        let fc = eval_cubic(a2, a1, a0, cand).0.norm();
        if !(fc < f) {
            break;
        }
        z = cand;
        f = fc;
    }
    z
}

const DISC_DEAD_ZONE: f64 = 1e-13;

/// Roots of `λ³ + a₂λ² + a₁λ + a₀` by Cardano's formula with a guarded
/// Newton polish. A conjugate pair is returned in slots 1 and 2.
pub fn cubic_roots(a2: f64, a1: f64, a0: f64) -> EigenTriple {
    let shift = a2 / 3.0;
    let p = a1 - a2 * shift;
    let q = 2.0 * shift * shift * shift - shift * a1 + a0;
    let hq = 0.5 * q;
    let tp = p / 3.0;
    let disc = hq * hq + tp * tp * tp;
    let scale = hq * hq + (tp * tp * tp).abs();
    let real = |t: f64| Complex64::new(t - shift, 0.0);

    let roots = if scale == 0.0 {
        [real(0.0); 3]
    } else if disc.abs() <= DISC_DEAD_ZONE * scale {
        // Repeated root: t₁ = 3q/p, t₂ = t₃ = −3q/(2p).
        if tp.abs() < 1e-300 {
            [real(0.0); 3]
        } else {
            let t1 = 3.0 * q / p;
            let t2 = -1.5 * q / p;
            [real(t1), real(t2), real(t2)]
        }
    } else if disc > 0.0 {
        let sq = disc.sqrt();
        let s = if hq >= 0.0 { -hq - sq } else { -hq + sq };
        let u = s.cbrt();
        let v = if u == 0.0 { 0.0 } else { -tp / u };
        let t1 = u + v;
        let re = -0.5 * t1;
        let im = 0.5 * 3f64.sqrt() * (u - v).abs();
        [real(t1), Complex64::new(re - shift, im), Complex64::new(re - shift, -im)]
    } else {
        let m = 2.0 * (-tp).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let two_pi_3 = 2.0 * std::f64::consts::PI / 3.0;
        [
            real(m * theta.cos()),
            real(m * (theta - two_pi_3).cos()),
            real(m * (theta - 2.0 * two_pi_3).cos()),
        ]
    };

    let mut out = [Complex64::default(); 3];
    out[0] = polish(a2, a1, a0, roots[0]);
    if roots[1].im != 0.0 {
        let z = polish(a2, a1, a0, roots[1]);
        out[1] = z;
        out[2] = z.conj();
    } else {
        out[1] = polish(a2, a1, a0, roots[1]);
        out[2] = polish(a2, a1, a0, roots[2]);
        out[1].im = 0.0;
        out[2].im = 0.0;
    }
    out[0].im = 0.0;
    EigenTriple { lambda: out, regime: None }
}

/// Exact eigenvalues of the normalized symbol, with the regime attached.
pub fn symbol_roots(p: &SymbolParams, ratio_threshold: f64) -> EigenTriple {
    let (a2, a1, a0) = cubic_coeffs(p);
    let mut e = cubic_roots(a2, a1, a0);
    e.regime = Some(regime_classify(p, ratio_threshold));
    e
}

pub const DEFAULT_RATIO_THRESHOLD: f64 = 0.1;

/// Quantitative version of the `≪` relations defining the three regions.
pub fn regime_classify(p: &SymbolParams, ratio_threshold: f64) -> Regime {
    let xt = p.xi * p.tau;
    let xe = p.xi * p.epsilon;
    let thr = ratio_threshold;
    if xt <= thr {
        Regime::Low
    } else if xe >= 1.0 / thr {
        Regime::High
    } else if xt >= 1.0 / thr && xe <= thr {
        Regime::Medium
    } else {
        Regime::Boundary
    }
}

/// Leading-order eigenvalue predictions in the low and high regions.
pub fn asymptotic_roots(p: &SymbolParams, regime: Regime) -> Result<EigenTriple> {
    let (e, t, xi) = (p.epsilon, p.tau, p.xi);
    let g2 = p.gamma_gap * p.gamma_gap;
    let lambda = match regime {
        Regime::Low => [
            Complex64::new(-1.0 / e, 0.0),
            Complex64::new(-t * xi * xi, 0.0),
            Complex64::new(-1.0 / t, 0.0),
        ],
        Regime::High => {
            let re = -1.0 / (2.0 * t) - g2 / ((g2 + 1.0) * 2.0 * e);
            let im = (g2 + 1.0).sqrt() * xi;
            [
                Complex64::new(-1.0 / ((g2 + 1.0) * e), 0.0),
                Complex64::new(re, im),
                Complex64::new(re, -im),
            ]
        }
        Regime::Medium | Regime::Boundary => {
            return Err(Error::Unsupported(format!(
                "no point prediction in the {} region; only Re λ ≲ −1/τ is available",
                regime.as_str()
            )))
        }
    };
    Ok(EigenTriple { lambda, regime: Some(regime) })
}

/// Reference scale `−1/τ` for the real parts in the medium region.
pub fn medium_real_part_scale(p: &SymbolParams) -> f64 {
    -1.0 / p.tau
}

/// Decay rate of the incompressible part, `1/τ`.
pub fn incompressible_decay(tau: f64) -> f64 {
    1.0 / tau
}

/// Slowest decay rate of the damped Euler symbol `λ² + λ/τ + ξ² = 0`.
pub fn damped_euler_decay(tau: f64, xi: f64) -> f64 {
    let s = 4.0 * tau * tau * xi * xi;
    if s <= 1.0 {
        2.0 * tau * xi * xi / (1.0 + (1.0 - s).sqrt())
    } else {
        1.0 / (2.0 * tau)
    }
}

/// Critical friction and peak rate `(2ξ, ξ)`.
pub fn overdamping_peak(xi: f64) -> (f64, f64) {
    (2.0 * xi, xi)
}

/// One row of the decay-rate-versus-friction table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverdampingRow {
    pub friction: f64,
    pub rate: f64,
    pub peak: bool,
}

/// Decay rate on `n` log-spaced frictions in `[lo, hi]`, plus the exact peak row.
pub fn overdamping_curve(xi: f64, lo: f64, hi: f64, n: usize) -> Vec<OverdampingRow> {
    let (f_star, _) = overdamping_peak(xi);
    let mut rows: Vec<OverdampingRow> = log_grid(lo, hi, n)
        .into_iter()
        .map(|f| OverdampingRow { friction: f, rate: damped_euler_decay(1.0 / f, xi), peak: false })
        .collect();
    rows.retain(|r| r.friction != f_star);
    rows.push(OverdampingRow { friction: f_star, rate: damped_euler_decay(1.0 / f_star, xi), peak: true });
    rows.sort_by(|a, b| a.friction.total_cmp(&b.friction));
    rows
}

/// `n` points geometrically spaced from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeRow {
    pub epsilon: f64,
    pub tau: f64,
    pub xi: f64,
    pub roots: [Complex64; 3],
    pub regime: Regime,
}

/// Exact roots over a list of frequencies.
pub fn landscape(epsilon: f64, tau: f64, gamma_gap: f64, xis: &[f64], ratio_threshold: f64) -> Result<Vec<LandscapeRow>> {
    xis.iter()
        .map(|&xi| {
            let p = SymbolParams::new(epsilon, tau, gamma_gap, xi)?;
            let e = symbol_roots(&p, ratio_threshold);
            Ok(LandscapeRow { epsilon, tau, xi, roots: e.sorted(), regime: e.regime.expect("set above") })
        })
        .collect()
}
