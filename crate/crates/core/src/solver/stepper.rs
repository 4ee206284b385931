//! Exponential time stepping for `y' = −Λy + N(y)` where `Λ` is diagonal,
//! either pointwise in physical space or per Fourier mode.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::Fourier;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Integrating-factor (Lawson) SSP-RK2.
    LawsonSsp2,
    /// Second-order exponential time differencing (Cox–Matthews).
    Etd2,
    /// Fourth-order exponential time differencing (Cox–Matthews, contour-free
    /// evaluation of the φ-functions).
    #[default]
    Etd4,
}

impl Scheme {
    pub fn order(&self) -> u32 {
        match self {
            Scheme::LawsonSsp2 | Scheme::Etd2 => 2,
            Scheme::Etd4 => 4,
        }
    }
}

/// Linear decay rates `Λ ≥ 0` of one field, frozen over a step.
#[derive(Clone, Debug, PartialEq)]
pub enum Decay {
    None,
    Pointwise(Vec<f64>),
    Modal(Vec<f64>),
}

/// `φ₀…φ₃` at `z`, by series near zero and closed forms elsewhere.
pub fn phi_functions(z: f64) -> [f64; 4] {
    let e = z.exp();
    if z.abs() < 1.0 {
        let mut out = [0.0; 4];
        out[0] = e;
        // φ_k(z) = Σ_n z^n / (n + k)!
        for (k, slot) in out.iter_mut().enumerate().skip(1) {
            let mut term = 1.0;
            for j in 1..=k {
                term /= j as f64;
            }
            let mut sum = 0.0;
            for n in 0..30 {
                sum += term;
                term *= z / (n + k + 1) as f64;
            }
            *slot = sum;
        }
        out
    } else {
        let p1 = (e - 1.0) / z;
        let p2 = (p1 - 1.0) / z;
        let p3 = (p2 - 0.5) / z;
        [e, p1, p2, p3]
    }
}

/// Precomputed exponential weights for one field and one step size.
#[derive(Clone, Debug)]
enum Weights {
    Uniform(Coef),
    Pointwise(Vec<Coef>),
    Modal(Vec<Coef>),
}

#[derive(Clone, Copy, Debug, Default)]
struct Coef {
    e: f64,
    e2: f64,
    /// `(h/2)φ₁(z/2)`
    q: f64,
    /// `h φ₁(z)`, `h φ₂(z)`
    hp1: f64,
    hp2: f64,
    /// ETDRK4 weights `h(φ₁ − 3φ₂ + 4φ₃)`, `h(φ₂ − 2φ₃)`, `h(4φ₃ − φ₂)`
    f1: f64,
    f2: f64,
    f3: f64,
}

fn coef(rate: f64, h: f64) -> Coef {
    let z = -rate * h;
    let [e, p1, p2, p3] = phi_functions(z);
    let [e2, q1, _, _] = phi_functions(0.5 * z);
    Coef {
        e,
        e2,
        q: 0.5 * h * q1,
        hp1: h * p1,
        hp2: h * p2,
        f1: h * (p1 - 3.0 * p2 + 4.0 * p3),
        f2: h * (p2 - 2.0 * p3),
        f3: h * (4.0 * p3 - p2),
    }
}

fn weights(decay: &Decay, h: f64) -> Weights {
    match decay {
        Decay::None => Weights::Uniform(coef(0.0, h)),
        Decay::Pointwise(r) => Weights::Pointwise(r.iter().map(|&x| coef(x, h)).collect()),
        Decay::Modal(r) => Weights::Modal(r.iter().map(|&x| coef(x, h)).collect()),
    }
}

type Term<'a> = (&'a [f64], fn(&Coef) -> f64);

/// `Σ_i w_i x_i`, applied in the space where the weights are diagonal.
fn combine(fourier: &Fourier, w: &Weights, terms: &[Term]) -> Vec<f64> {
    let n = terms[0].0.len();
    match w {
        Weights::Uniform(c) => {
            let mut out = vec![0.0; n];
            for (x, sel) in terms {
                let s = sel(c);
                for (o, v) in out.iter_mut().zip(x.iter()) {
                    *o += s * v;
                }
            }
            out
        }
        Weights::Pointwise(cs) => {
            let mut out = vec![0.0; n];
            for (x, sel) in terms {
                for ((o, v), c) in out.iter_mut().zip(x.iter()).zip(cs) {
                    *o += sel(c) * v;
                }
            }
            out
        }
        Weights::Modal(cs) => {
            let mut acc = vec![num_complex::Complex64::default(); n];
            for (x, sel) in terms {
                let hat = fourier.forward(x);
                for ((a, v), c) in acc.iter_mut().zip(hat).zip(cs) {
                    *a += v * sel(c);
                }
            }
            fourier.inverse(&acc)
        }
    }
}

pub type Fields = Vec<Vec<f64>>;

/// Right-hand side split: `N(y)` is evaluated with the same frozen `Λ`
/// that the stepper integrates exactly.
pub trait SplitRhs {
    fn decay(&self, y: &Fields) -> Result<Vec<Decay>>;
    fn nonlinear(&self, y: &Fields, decay: &[Decay]) -> Result<Fields>;
}

/// Advance `y` by one step of size `h`.
pub fn step<R: SplitRhs>(rhs: &R, fourier: &Fourier, y: &Fields, h: f64, scheme: Scheme) -> Result<Fields> {
    let decay = rhs.decay(y)?;
    let w: Vec<Weights> = decay.iter().map(|d| weights(d, h)).collect();
    fn apply_all<'a>(fourier: &Fourier, ws: &[Weights], terms: &dyn Fn(usize) -> Vec<Term<'a>>) -> Fields {
        (0..ws.len()).map(|i| combine(fourier, &ws[i], &terms(i))).collect()
    }
    let n0 = rhs.nonlinear(y, &decay)?;
    match scheme {
        Scheme::Etd4 => {
            let a = apply_all(fourier, &w, &|i| vec![(&y[i], |c| c.e2), (&n0[i], |c| c.q)]);
            let na = rhs.nonlinear(&a, &decay)?;
            let b = apply_all(fourier, &w, &|i| vec![(&y[i], |c| c.e2), (&na[i], |c| c.q)]);
            let nb = rhs.nonlinear(&b, &decay)?;
            let two_nb_minus_n0: Fields =
                nb.iter().zip(&n0).map(|(x, z)| x.iter().zip(z).map(|(p, q)| 2.0 * p - q).collect()).collect();
            let c = apply_all(fourier, &w, &|i| vec![(&a[i], |c| c.e2), (&two_nb_minus_n0[i], |c| c.q)]);
            let nc = rhs.nonlinear(&c, &decay)?;
            let sab: Fields = na.iter().zip(&nb).map(|(x, z)| x.iter().zip(z).map(|(p, q)| 2.0 * (p + q)).collect()).collect();
            Ok(apply_all(fourier, &w, &|i| {
                vec![(&y[i], |c| c.e), (&n0[i], |c| c.f1), (&sab[i], |c| c.f2), (&nc[i], |c| c.f3)]
            }))
        }
        Scheme::Etd2 => {
            let a = apply_all(fourier, &w, &|i| vec![(&y[i], |c| c.e), (&n0[i], |c| c.hp1)]);
            let na = rhs.nonlinear(&a, &decay)?;
            let diff: Fields = na.iter().zip(&n0).map(|(x, z)| x.iter().zip(z).map(|(p, q)| p - q).collect()).collect();
            let corr = apply_all(fourier, &w, &|i| vec![(&diff[i], |c| c.hp2)]);
            Ok(a.iter().zip(&corr).map(|(x, z)| x.iter().zip(z).map(|(p, q)| p + q).collect()).collect())
        }
        Scheme::LawsonSsp2 => {
            // y1 = e^{−Λh}(y + h N(y)); y⁺ = ½ e^{−Λh} y + ½ (y1 + h N(y1))
            let euler: Fields = y.iter().zip(&n0).map(|(x, z)| x.iter().zip(z).map(|(p, q)| p + h * q).collect()).collect();
            let y1 = apply_all(fourier, &w, &|i| vec![(&euler[i], |c| c.e)]);
            let n1 = rhs.nonlinear(&y1, &decay)?;
            let ey = apply_all(fourier, &w, &|i| vec![(&y[i], |c| c.e)]);
            Ok((0..y.len())
                .map(|i| (0..y[i].len()).map(|k| 0.5 * ey[i][k] + 0.5 * (y1[i][k] + h * n1[i][k])).collect())
                .collect())
        }
    }
}
