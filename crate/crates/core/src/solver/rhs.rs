//! Pseudo-spectral right-hand sides. Products are formed in physical space
//! and their spectra truncated by the 2/3 rule before differentiation.

use crate::error::Result;
use crate::grid::{Fourier, Grid};
use crate::models::{MixtureState, PMState, Params};

use super::state::{decode, encode, Decoded, System};
use super::stepper::{Decay, Fields, SplitRhs};

/// Tendency split into transport/pressure terms and relaxation terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Tendency {
    pub nonstiff: Fields,
    pub stiff: Fields,
}

impl Tendency {
    pub fn total(&self) -> Fields {
        self.nonstiff
            .iter()
            .zip(&self.stiff)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.nonstiff
            .iter()
            .chain(&self.stiff)
            .flat_map(|f| f.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// One system on one grid.
#[derive(Clone, Debug)]
pub struct Model {
    pub system: System,
    pub params: Params,
    pub fourier: Fourier,
}

fn neg_div(fourier: &Fourier, flux: &[Vec<f64>]) -> Vec<f64> {
    fourier.divergence(flux, true).into_iter().map(|v| -v).collect()
}

fn product(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

impl Model {
    pub fn new(system: System, params: Params, grid: Grid) -> Self {
        Model { system, params, fourier: Fourier::new(grid) }
    }

    pub fn grid(&self) -> Grid {
        self.fourier.grid()
    }

    pub fn decode(&self, y: &Fields) -> Result<Decoded> {
        decode(self.system, &self.params, self.grid(), y)
    }

    /// Momentum-type update `−div(q ⊗ u) − s ∇P` shared by BN, K and KTAU.
    fn momentum(&self, q: &[Vec<f64>], u: &[Vec<f64>], p: &[f64], pressure_scale: f64) -> Fields {
        let f = &self.fourier;
        let grad_p = f.gradient(p, true);
        q.iter()
            .zip(grad_p)
            .map(|(qi, gp)| {
                let flux: Vec<Vec<f64>> = u.iter().map(|uc| product(qi, uc)).collect();
                neg_div(f, &flux).into_iter().zip(gp).map(|(a, g)| a - pressure_scale * g).collect()
            })
            .collect()
    }

    pub fn tendency(&self, y: &Fields) -> Result<Tendency> {
        let dec = self.decode(y)?;
        self.tendency_decoded(y, &dec)
    }

    fn tendency_decoded(&self, y: &Fields, dec: &Decoded) -> Result<Tendency> {
        let f = &self.fourier;
        let p = &self.params;
        let d = self.grid().dim();
        let n = self.grid().len();
        let zeros = || vec![0.0; n];
        let mut nonstiff = Vec::with_capacity(y.len());
        let mut stiff = Vec::with_capacity(y.len());
        match self.system {
            System::BN | System::K | System::KTAU => {
                let u = &dec.u;
                let q = &y[2..2 + d];
                let flux: Vec<Vec<f64>> = u.iter().map(|uc| product(&dec.m_plus, uc)).collect();
                nonstiff.push(neg_div(f, &flux));
                nonstiff.push(neg_div(f, q));
                let (scale, rate) = if self.system == System::KTAU {
                    (1.0 / (p.tau * p.tau), 1.0 / (p.tau * p.tau))
                } else {
                    (1.0, 1.0 / p.tau)
                };
                nonstiff.extend(self.momentum(q, u, &dec.p, scale));
                stiff.push(zeros());
                stiff.push(zeros());
                for qi in q {
                    stiff.push(qi.iter().map(|v| -v * rate).collect());
                }
                if self.system == System::BN {
                    let g = &y[2 + d];
                    let grad_g = f.gradient(g, false);
                    let div_u = f.divergence(u, true);
                    let (gp, gm) = (p.gamma_plus(), p.gamma_minus());
                    let inv_eps = 1.0 / p.epsilon;
                    let mut dg = vec![0.0; n];
                    let mut sg = vec![0.0; n];
                    for i in 0..n {
                        let adv: f64 = (0..d).map(|c| u[c][i] * grad_g[c][i]).sum();
                        dg[i] = -adv - (gp * dec.p_plus[i] - gm * dec.p_minus[i]) * div_u[i];
                        let a = dec.alpha[i];
                        let kappa = gp * (1.0 - a) * dec.p_plus[i] + gm * a * dec.p_minus[i];
                        sg[i] = -kappa * g[i] * inv_eps;
                    }
                    nonstiff.push(dg);
                    stiff.push(sg);
                }
            }
            System::PM => {
                let pi = &dec.p_plus;
                let v = darcy(f, pi, &dec.rho);
                let flux: Vec<Vec<f64>> = v.iter().map(|vc| product(&y[0], vc)).collect();
                nonstiff.push(neg_div(f, &flux));
                nonstiff.push(zeros());
                stiff.push(zeros());
                stiff.push(f.laplacian(pi, true));
            }
        }
        for t in nonstiff.iter_mut() {
            f.dealias(t);
        }
        Ok(Tendency { nonstiff, stiff })
    }

    fn decay_decoded(&self, dec: &Decoded) -> Vec<Decay> {
        let p = &self.params;
        let grid = self.grid();
        let (d, n) = (grid.dim(), grid.len());
        match self.system {
            System::PM => {
                let c = p.c_bar();
                let rates = (0..n).map(|i| c * grid.kmag(i).powi(2)).collect();
                vec![Decay::None, Decay::Modal(rates)]
            }
            _ => {
                let rate = if self.system == System::KTAU { 1.0 / (p.tau * p.tau) } else { 1.0 / p.tau };
                let mut out = vec![Decay::None, Decay::None];
                out.extend((0..d).map(|_| Decay::Pointwise(vec![rate; n])));
                if self.system == System::BN {
                    let (gp, gm) = (p.gamma_plus(), p.gamma_minus());
                    let rates = (0..n)
                        .map(|i| {
                            let a = dec.alpha[i];
                            (gp * (1.0 - a) * dec.p_plus[i] + gm * a * dec.p_minus[i]) / p.epsilon
                        })
                        .collect();
                    out.push(Decay::Pointwise(rates));
                }
                out
            }
        }
    }
}

/// `−∇Π/ϱ`.
pub(crate) fn darcy(fourier: &Fourier, pi: &[f64], rho: &[f64]) -> Vec<Vec<f64>> {
    fourier
        .gradient(pi, true)
        .into_iter()
        .map(|g| g.iter().zip(rho).map(|(gi, ri)| -gi / ri).collect())
        .collect()
}

impl SplitRhs for Model {
    fn decay(&self, y: &Fields) -> Result<Vec<Decay>> {
        let dec = self.decode(y)?;
        Ok(self.decay_decoded(&dec))
    }

    fn nonlinear(&self, y: &Fields, decay: &[Decay]) -> Result<Fields> {
        let t = self.tendency(y)?;
        let mut out = t.total();
        for ((o, yi), dk) in out.iter_mut().zip(y).zip(decay) {
            match dk {
                Decay::None => {}
                Decay::Pointwise(r) => {
                    for ((v, x), ri) in o.iter_mut().zip(yi).zip(r) {
                        *v += x * ri;
                    }
                }
                Decay::Modal(r) => {
                    let lin = self.fourier.multiplier_indexed(yi, |i| r[i]);
                    for (v, l) in o.iter_mut().zip(lin) {
                        *v += l;
                    }
                }
            }
        }
        Ok(out)
    }
}

pub fn rhs_bn(state: &MixtureState, params: &Params) -> Result<Tendency> {
    let m = Model::new(System::BN, *params, state.grid);
    m.tendency(&encode(System::BN, params, state)?)
}

pub fn rhs_k(state: &MixtureState, params: &Params) -> Result<Tendency> {
    let m = Model::new(System::K, *params, state.grid);
    m.tendency(&encode(System::K, params, state)?)
}

pub fn rhs_pm(state: &PMState, params: &Params) -> Result<Tendency> {
    let m = Model::new(System::PM, *params, state.grid);
    m.tendency(&encode(System::PM, params, &state.to_mixture())?)
}
