//! Each conservative spectral right-hand side is checked against a second
//! form of the same dynamics, evaluated pointwise with eighth-order central
//! differences: BN against the (y, w, r, u) system, K against the common
//! pressure equation with the fraction equation, PM against its fraction
//! and pressure equations. Time derivatives of derived quantities are taken
//! by central differences along the tendency.

use relaxlab_core::models::{coeffs, mixture_closure, reformulate, MixtureState, PMState, Params};
use relaxlab_core::solver::{decode, encode, make_initial_data, InitialCondition, Model, System};
use relaxlab_core::Grid;

const FD8: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];

fn ddx(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            let mut s = 0.0;
            for (k, c) in FD8.iter().enumerate() {
                let o = k + 1;
                s += c * (f[(i + o) % n] - f[(i + n - o) % n]);
            }
            s / dx
        })
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// `d/dh Φ(decode(y + h·T))` at `h = 0` by a fourth-order central stencil.
fn directional<F: Fn(&MixtureState) -> Vec<Vec<f64>>>(model: &Model, y: &[Vec<f64>], t: &[Vec<f64>], h: f64, phi: F) -> Vec<Vec<f64>> {
    let at = |s: f64| {
        let ys: Vec<Vec<f64>> = y.iter().zip(t).map(|(a, b)| a.iter().zip(b).map(|(p, q)| p + s * q).collect()).collect();
        let dec = model.decode(&ys).unwrap();
        let st = relaxlab_core::solver::state::to_mixture(model.grid(), &dec, None);
        phi(&st)
    };
    let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
    (0..p1.len())
        .map(|k| {
            (0..p1[k].len())
                .map(|i| (8.0 * (p1[k][i] - m1[k][i]) - (p2[k][i] - m2[k][i])) / (12.0 * h))
                .collect()
        })
        .collect()
}

fn setup(eps: f64, tau: f64, n: usize) -> (Params, Grid) {
    (Params::reference(eps, tau).unwrap(), Grid::for_solver(1, n).unwrap())
}

#[test]
fn bn_tendency_matches_reformulated_system() {
    let (p, g) = setup(1e-2, 1e-1, 128);
    let mut ic = InitialCondition::new(5, 1e-2, [1, 3]);
    ic.well_prepared = false;
    let s = make_initial_data(System::BN, &p, g, &ic).unwrap();
    let model = Model::new(System::BN, p, g);
    let y = encode(System::BN, &p, &s).unwrap();
    let t = model.tendency(&y).unwrap().total();
    let rates = directional(&model, &y, &t, 1e-4, |st| {
        let r = reformulate(st, &p);
        vec![r.y, r.w, r.r, r.u[0].clone()]
    });

    let re = reformulate(&s, &p);
    let c = coeffs(&s, &p).unwrap();
    let dx = g.dx();
    let u = &s.u[0];
    let (dy, dw, dr, du) = (ddx(&re.y, dx), ddx(&re.w, dx), ddx(&re.r, dx), ddx(u, dx));
    let gap = p.gamma_gap();
    let n = g.len();
    let mut oracle = vec![vec![0.0; n]; 4];
    for i in 0..n {
        oracle[0][i] = -u[i] * dy[i];
        oracle[1][i] = -u[i] * dw[i] - c.f[1][i] * du[i] - c.f[2][i] * re.w[i] / p.epsilon;
        oracle[2][i] = -u[i] * dr[i] - c.f[3][i] * du[i] + c.f[4][i] * re.w[i] * re.w[i] / p.epsilon;
        oracle[3][i] = -u[i] * du[i] - u[i] / p.tau - c.f[0][i] * dr[i] - gap * c.f[0][i] * dw[i];
    }
    for (k, name) in ["y", "w", "r", "u"].iter().enumerate() {
        let scale = max_abs(&oracle[k]).max(1e-3);
        let err = max_diff(&rates[k], &oracle[k]);
        assert!(err < 1e-6 * scale.max(1.0), "{name}: {err:.3e} (scale {scale:.3e})");
    }
}

#[test]
fn k_tendency_matches_pressure_and_fraction_equations() {
    let (p, g) = setup(1e-2, 1e-1, 128);
    let s = make_initial_data(System::K, &p, g, &InitialCondition::new(9, 1e-2, [1, 3])).unwrap();
    let model = Model::new(System::K, p, g);
    let y = encode(System::K, &p, &s).unwrap();
    let t = model.tendency(&y).unwrap().total();
    let rates = directional(&model, &y, &t, 1e-4, |st| {
        let (_, pr) = mixture_closure(st, &p);
        vec![pr, st.alpha_plus.clone(), st.u[0].clone()]
    });

    let (rho, pr) = mixture_closure(&s, &p);
    let (gp, gm) = (p.gamma_plus(), p.gamma_minus());
    let dx = g.dx();
    let u = &s.u[0];
    let (dp, da, du) = (ddx(&pr, dx), ddx(&s.alpha_plus, dx), ddx(u, dx));
    let n = g.len();
    let mut oracle = vec![vec![0.0; n]; 3];
    for i in 0..n {
        let (ap, am) = (s.alpha_plus[i], 1.0 - s.alpha_plus[i]);
        let den = gp * am + gm * ap;
        oracle[0][i] = -u[i] * dp[i] - gp * gm * pr[i] / den * du[i];
        oracle[1][i] = -u[i] * da[i] - (gp - gm) * ap * am / den * du[i];
        oracle[2][i] = -u[i] * du[i] - u[i] / p.tau - dp[i] / rho[i];
    }
    for (k, name) in ["P", "alpha", "u"].iter().enumerate() {
        let err = max_diff(&rates[k], &oracle[k]);
        assert!(err < 1e-6 * max_abs(&oracle[k]).max(1.0), "{name}: {err:.3e}");
    }
}

#[test]
fn pm_tendency_matches_porous_media_equations() {
    let (p, g) = setup(1e-3, 1e-2, 128);
    let s = make_initial_data(System::PM, &p, g, &InitialCondition::new(4, 1e-2, [1, 3])).unwrap();
    let pm = PMState { grid: g, beta_plus: s.alpha_plus.clone(), varrho_plus: s.rho_plus.clone(), varrho_minus: s.rho_minus.clone() };
    let model = Model::new(System::PM, p, g);
    let y = encode(System::PM, &p, &pm.to_mixture()).unwrap();
    let t = model.tendency(&y).unwrap().total();
    let rates = directional(&model, &y, &t, 1e-4, |st| {
        let pi: Vec<f64> = st.rho_plus.iter().map(|&r| p.law_plus.p(r)).collect();
        vec![st.alpha_plus.clone(), pi]
    });

    let pi = pm.pressure(&p);
    let rho = pm.density();
    let (gp, gm) = (p.gamma_plus(), p.gamma_minus());
    let dx = g.dx();
    let dpi = ddx(&pi, dx);
    let v: Vec<f64> = dpi.iter().zip(&rho).map(|(d, r)| -d / r).collect();
    let divv = ddx(&v, dx);
    let db = ddx(&pm.beta_plus, dx);
    let n = g.len();
    let mut oracle = vec![vec![0.0; n]; 2];
    for i in 0..n {
        let (bp, bm) = (pm.beta_plus[i], 1.0 - pm.beta_plus[i]);
        let den = gp * bm + gm * bp;
        oracle[0][i] = -v[i] * db[i] - (gp - gm) * bp * bm / den * divv[i];
        // div(∇Π/ϱ) = −div v
        oracle[1][i] = -v[i] * dpi[i] - gp * gm * pi[i] / den * divv[i];
    }
    for (k, name) in ["beta", "Pi"].iter().enumerate() {
        let err = max_diff(&rates[k], &oracle[k]);
        assert!(err < 1e-6 * max_abs(&oracle[k]).max(1.0), "{name}: {err:.3e}");
    }
}

#[test]
fn kapila_constraint_holds_after_a_step() {
    let (p, g) = setup(1e-2, 1e-1, 64);
    let s = make_initial_data(System::K, &p, g, &InitialCondition::new(2, 1e-2, [1, 4])).unwrap();
    let model = Model::new(System::K, p, g);
    let y0 = encode(System::K, &p, &s).unwrap();
    let y1 = relaxlab_core::solver::step(&model, &y0, 0.01, relaxlab_core::solver::Scheme::Etd4).unwrap();
    let dec = decode(System::K, &p, g, &y1).unwrap();
    let res = dec.p_plus.iter().zip(&dec.p_minus).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(res < 1e-10 * p.p_bar, "{res:.3e}");
}

#[test]
fn pm_linearization_is_diffusion_with_mixture_constant() {
    // Π = P̄ + δ sin x at constant fraction: ∂sϱ ≈ c̄ ∂ₓₓϱ to first order in δ.
    let (p, g) = setup(1e-3, 1e-2, 64);
    let delta = 1e-7;
    let pi: Vec<f64> = g.sample(|x| p.p_bar + delta * x[0].sin());
    let pm = PMState::from_pressure(g, vec![p.alpha_bar_plus; g.len()], &pi, &p).unwrap();
    let tend = relaxlab_core::solver::rhs_pm(&pm, &p).unwrap().total();
    let rho = pm.density();
    let rho_dev_max = rho.iter().map(|r| (r - p.rho_bar).abs()).fold(0.0, f64::max);
    for i in 0..g.len() {
        let expected = -p.c_bar() * (rho[i] - p.rho_bar);
        assert!((tend[1][i] - expected).abs() < 1e-5 * rho_dev_max, "{} vs {}", tend[1][i], expected);
    }
}
