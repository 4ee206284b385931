//! Measurements shared by the property suites and the acceptance target.
#![allow(dead_code)]

use nalgebra::Matrix3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relaxlab_core::lp::{bernstein_check, block, build_partition, DyadicPartition};
use relaxlab_core::spectral::{
    asymptotic_roots, cubic_backward_error, cubic_residual, cubic_roots, damped_euler_decay, log_grid, symbol_roots, Regime, SymbolParams,
    DEFAULT_RATIO_THRESHOLD,
};
use relaxlab_core::{Grid, SpectralField};

/// Eigenvalues of the companion matrix of `λ³ + a₂λ² + a₁λ + a₀`.
pub fn companion_roots(a2: f64, a1: f64, a0: f64) -> [Complex64; 3] {
    let m = Matrix3::new(0.0, 0.0, -a0, 1.0, 0.0, -a1, 0.0, 1.0, -a2);
    let ev = m.complex_eigenvalues();
    [ev[0], ev[1], ev[2]]
}

/// Largest distance between matched roots, relative to `max(1, |λ|)`.
pub fn matched_distance(a: [Complex64; 3], b: [Complex64; 3]) -> f64 {
    let key = |z: &Complex64| (z.re, z.im);
    let mut a = a;
    let mut b = b;
    a.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
    b.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
    // Sorting can split a conjugate pair differently; fall back to greedy matching.
    let sorted = a.iter().zip(&b).map(|(x, y)| (x - y).norm() / y.norm().max(1.0)).fold(0.0, f64::max);
    let mut used = [false; 3];
    let mut greedy: f64 = 0.0;
    for x in &a {
        let (k, d) = (0..3)
            .filter(|&k| !used[k])
            .map(|k| (k, (x - b[k]).norm() / b[k].norm().max(1.0)))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[k] = true;
        greedy = greedy.max(d);
    }
    sorted.min(greedy)
}

pub struct OracleReport {
    pub cases: usize,
    pub max_distance: f64,
    pub max_residual: f64,
}

pub fn root_oracle(cases: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut dist, mut res): (f64, f64) = (0.0, 0.0);
    for _ in 0..cases {
        let a2 = rng.random_range(-10.0..10.0);
        let a1 = rng.random_range(-10.0..10.0);
        let a0 = rng.random_range(-10.0..10.0);
        let e = cubic_roots(a2, a1, a0);
        for z in e.lambda {
            res = res.max(cubic_residual(a2, a1, a0, z));
        }
        dist = dist.max(matched_distance(e.lambda, companion_roots(a2, a1, a0)));
    }
    OracleReport { cases, max_distance: dist, max_residual: res }
}

pub struct ScanReport {
    pub points: usize,
    pub max_re: f64,
    /// Backward error; the plain relative residual hits the rounding floor
    /// `|a₁λ|·u` when `ξ²` is large and `λ` is O(1).
    pub max_residual: f64,
}

/// Exact symbol roots over a log grid with `ε ≤ τ`.
pub fn stability_scan(gamma_gap: f64) -> ScanReport {
    let params = log_grid(1e-4, 1.0, 21);
    let xis = log_grid(1e-3, 1e5, 48);
    let (mut points, mut max_re, mut max_res) = (0, f64::NEG_INFINITY, 0.0_f64);
    for &tau in &params {
        for &eps in params.iter().filter(|&&e| e <= tau) {
            for &xi in &xis {
                let p = SymbolParams::new(eps, tau, gamma_gap, xi).unwrap();
                let e = symbol_roots(&p, DEFAULT_RATIO_THRESHOLD);
                let (a2, a1, a0) = relaxlab_core::spectral::cubic_coeffs(&p);
                for z in e.lambda {
                    max_res = max_res.max(cubic_backward_error(a2, a1, a0, z));
                }
                max_re = max_re.max(e.max_re());
                points += 1;
            }
        }
    }
    ScanReport { points, max_re, max_residual: max_res }
}

/// Relative error of the low-frequency `λ₂ ≈ −τξ²` against the exact root.
pub fn lambda2_errors(eps: f64, tau: f64, gamma_gap: f64, tau_xis: &[f64]) -> Vec<(f64, f64)> {
    tau_xis
        .iter()
        .map(|&tx| {
            let p = SymbolParams::new(eps, tau, gamma_gap, tx / tau).unwrap();
            let pred = asymptotic_roots(&p, Regime::Low).unwrap().lambda[1];
            let exact = symbol_roots(&p, DEFAULT_RATIO_THRESHOLD).nearest(pred);
            (tx, (pred - exact).norm() / exact.norm())
        })
        .collect()
}

pub struct PeakReport {
    pub argmax_friction: f64,
    /// Spacing of the log grid around the argmax.
    pub cell: f64,
    pub peak_rate: f64,
}

/// Grid search of the damped Euler decay rate over frictions `1/τ`.
pub fn overdamping_search(xi: f64, n: usize) -> PeakReport {
    let grid = log_grid(1e-2 * xi, 1e2 * xi, n);
    let (k, _) = grid
        .iter()
        .enumerate()
        .map(|(k, &f)| (k, damped_euler_decay(1.0 / f, xi)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let cell = grid[(k + 1).min(n - 1)] - grid[k.saturating_sub(1)];
    PeakReport { argmax_friction: grid[k], cell, peak_rate: damped_euler_decay(1.0 / (2.0 * xi), xi) }
}

/// Random mean-free field with modes `1 ≤ |k| ≤ kmax`.
pub fn random_field(grid: Grid, kmax: i64, rng: &mut ChaCha8Rng) -> SpectralField {
    let modes: Vec<(i64, i64, f64, f64)> = (0..12)
        .map(|_| {
            let kx = rng.random_range(-kmax..=kmax);
            let ky = if grid.dim() == 2 { rng.random_range(-kmax..=kmax) } else { 0 };
            (kx, ky, rng.random_range(-1.0..1.0), rng.random_range(0.0..std::f64::consts::TAU))
        })
        .filter(|m| m.0 != 0 || m.1 != 0)
        .collect();
    SpectralField::from_fn(grid, |x| modes.iter().map(|&(kx, ky, a, ph)| a * (kx as f64 * x[0] + ky as f64 * x[1] + ph).cos()).sum())
}

/// Max error of `Σ_j Δ_j u` against `u − mean(u)`.
pub fn reconstruction_error(part: &DyadicPartition, u: &SpectralField) -> f64 {
    let mut sum = vec![0.0; u.grid().len()];
    for j in part.indices() {
        for (s, v) in sum.iter_mut().zip(block(u, j, part).phys()) {
            *s += v;
        }
    }
    let mean = u.mean();
    sum.iter().zip(u.phys()).map(|(s, v)| (s - (v - mean)).abs()).fold(0.0, f64::max)
}

/// Random field supported in the annulus `3/4·2^j ≤ |ξ| ≤ 8/3·2^j`.
pub fn annulus_field(grid: Grid, j: i32, rng: &mut ChaCha8Rng) -> SpectralField {
    let scale = 2f64.powi(j);
    let allowed: Vec<(i64, i64)> = (0..grid.len())
        .map(|i| grid.wavevector(i))
        .map(|k| (k[0], k[1]))
        .filter(|&(a, b)| {
            let r = ((a * a + b * b) as f64).sqrt() / scale;
            (0.75..=8.0 / 3.0).contains(&r) && (a, b) != (0, 0)
        })
        .collect();
    let picks: Vec<((i64, i64), f64, f64)> = (0..6)
        .map(|_| {
            let k = allowed[rng.random_range(0..allowed.len())];
            (k, rng.random_range(0.1..1.0), rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    SpectralField::from_fn(grid, |x| {
        picks.iter().map(|&((a, b), amp, ph)| amp * (a as f64 * x[0] + b as f64 * x[1] + ph).cos()).sum()
    })
}

pub struct LpReport {
    pub unity_residual: f64,
    pub reconstruction: f64,
    pub bernstein_min: f64,
    pub bernstein_max: f64,
    pub bernstein_fields: usize,
}

pub fn lp_suite(seed: u64) -> LpReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unity: f64 = 0.0;
    let mut recon: f64 = 0.0;
    for (dim, n) in [(1, 64), (1, 256), (2, 32), (2, 64)] {
        let g = Grid::new(dim, n).unwrap();
        let part = build_partition(g).unwrap();
        unity = unity.max(part.unity_residual());
        for _ in 0..5 {
            let u = random_field(g, (n / 3) as i64, &mut rng);
            recon = recon.max(reconstruction_error(&part, &u));
        }
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    let mut count = 0;
    for k in 0..100 {
        let g = if k % 2 == 0 { Grid::new(1, 128).unwrap() } else { Grid::new(2, 32).unwrap() };
        let jmax = if g.dim() == 1 { 4 } else { 2 };
        let j = rng.random_range(0..=jmax);
        let u = annulus_field(g, j, &mut rng);
        let rep = bernstein_check(&u, j).unwrap();
        lo = lo.min(rep.ratio);
        hi = hi.max(rep.ratio);
        count += 1;
    }
    LpReport { unity_residual: unity, reconstruction: recon, bernstein_min: lo, bernstein_max: hi, bernstein_fields: count }
}
