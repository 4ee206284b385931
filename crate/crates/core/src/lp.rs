//! Homogeneous Littlewood–Paley decomposition on periodic grids.
//!
//! The radial cutoff `χ` equals 1 on `|ξ| ≤ 3/4`, vanishes on `|ξ| ≥ 4/3`
//! and is a quintic smoothstep in between. Blocks use `φ(ξ) = χ(ξ/2) − χ(ξ)`
//! and `Δ_j u = F⁻¹(φ(2^{-j}ξ) û)`. All norms ignore the zero mode.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Fourier, Grid, SpectralField};

const CHI_INNER: f64 = 0.75;
const CHI_OUTER: f64 = 4.0 / 3.0;
const PROFILE_SAMPLES: usize = 257;

/// Smooth radial cutoff.
pub fn chi(r: f64) -> f64 {
    let r = r.abs();
    if r <= CHI_INNER {
        1.0
    } else if r >= CHI_OUTER {
        0.0
    } else {
        let t = (r - CHI_INNER) / (CHI_OUTER - CHI_INNER);
        1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// Annular bump supported in `3/4 ≤ |ξ| ≤ 8/3`.
pub fn phi(r: f64) -> f64 {
    chi(0.5 * r) - chi(r)
}

/// Dyadic partition adapted to a grid.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    grid: Grid,
    fourier: Fourier,
    /// `χ` sampled on `[0, 2]`.
    pub chi_profile: Vec<f64>,
    /// `φ` sampled on `[0, 3]`.
    pub phi_profile: Vec<f64>,
    pub j_min: i32,
    pub j_max: i32,
    kmag: Vec<f64>,
}

pub fn build_partition(grid: Grid) -> Result<DyadicPartition> {
    if grid.n() < 8 {
        return Err(Error::Resolution(format!(
            "at least 8 points per axis are needed to resolve a dyadic annulus, got {}",
            grid.n()
        )));
    }
    let kmax = grid.kmax();
    // φ(2^{-j}ξ) ≠ 0 requires 3/4 < 2^{-j}|ξ| < 8/3 for some 1 ≤ |ξ| ≤ kmax.
    let j_min = (0.75_f64).log2().floor() as i32;
    let j_max = (4.0 * kmax / 3.0).log2().ceil() as i32 - 1;
    let kmag = (0..grid.len()).map(|i| grid.kmag(i)).collect();
    let chi_profile = (0..PROFILE_SAMPLES)
        .map(|i| chi(2.0 * i as f64 / (PROFILE_SAMPLES - 1) as f64))
        .collect();
    let phi_profile = (0..PROFILE_SAMPLES)
        .map(|i| phi(3.0 * i as f64 / (PROFILE_SAMPLES - 1) as f64))
        .collect();
    Ok(DyadicPartition {
        grid,
        fourier: Fourier::new(grid),
        chi_profile,
        phi_profile,
        j_min,
        j_max,
        kmag,
    })
}

impl DyadicPartition {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    /// `φ(2^{-j}|k|)` for the mode at flat index `idx`.
    pub fn weight(&self, j: i32, idx: usize) -> f64 {
        phi(self.kmag[idx] * 2f64.powi(-j))
    }

    /// Largest deviation of `Σ_j φ(2^{-j}ξ)` from one over all nonzero modes.
    pub fn unity_residual(&self) -> f64 {
        (0..self.grid.len())
            .filter(|&i| self.kmag[i] > 0.0)
            .map(|i| {
                let s: f64 = self.indices().map(|j| self.weight(j, i)).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    fn block_l2(&self, hat: &[Complex64], j: i32) -> f64 {
        let s: f64 = hat
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let w = self.weight(j, i);
                w * w * c.norm_sqr()
            })
            .sum();
        (self.grid.domain_volume() * s).sqrt()
    }

    fn filtered(&self, u: &SpectralField, keep: impl Fn(i32) -> bool) -> SpectralField {
        let hat: Vec<Complex64> = u
            .hat()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let w: f64 = self.indices().filter(|&j| keep(j)).map(|j| self.weight(j, i)).sum();
                c * w
            })
            .collect();
        let phys = self.fourier.inverse(&hat);
        SpectralField::from_phys(self.grid, phys).expect("grid shape is fixed")
    }
}

/// Dyadic block `Δ_j u`; indices outside the resolved range give zero.
pub fn block(u: &SpectralField, j: i32, part: &DyadicPartition) -> SpectralField {
    if j < part.j_min || j > part.j_max {
        return SpectralField::zeros(u.grid());
    }
    part.filtered(u, |jj| jj == j)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    None,
    Low,
    High,
}

/// How the low and high sums share blocks around the threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SplitConvention {
    /// Low sums `j ≤ J_τ`, high sums `j ≥ J_τ − 1`.
    #[default]
    Overlapping,
    /// Low sums `j ≤ J_τ − 1`, high sums `j ≥ J_τ`.
    Partitioned,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovSpec {
    pub s: f64,
    pub split: Split,
    pub tau: f64,
    pub k: i32,
    pub convention: SplitConvention,
}

pub const DEFAULT_K: i32 = -2;

impl BesovSpec {
    pub fn plain(s: f64) -> Self {
        BesovSpec { s, split: Split::None, tau: 1.0, k: DEFAULT_K, convention: SplitConvention::Overlapping }
    }

    pub fn low(s: f64, tau: f64) -> Self {
        BesovSpec { split: Split::Low, tau, ..BesovSpec::plain(s) }
    }

    pub fn high(s: f64, tau: f64) -> Self {
        BesovSpec { split: Split::High, tau, ..BesovSpec::plain(s) }
    }

    pub fn cut(&self) -> i32 {
        j_tau(self.tau, self.k)
    }

    pub fn includes(&self, j: i32) -> bool {
        let cut = self.cut();
        match (self.split, self.convention) {
            (Split::None, _) => true,
            (Split::Low, SplitConvention::Overlapping) => j <= cut,
            (Split::High, SplitConvention::Overlapping) => j >= cut - 1,
            (Split::Low, SplitConvention::Partitioned) => j < cut,
            (Split::High, SplitConvention::Partitioned) => j >= cut,
        }
    }
}

/// Frequency threshold `J_τ = −⌊log₂ τ⌋ + k`.
pub fn j_tau(tau: f64, k: i32) -> i32 {
    -(tau.log2().floor() as i32) + k
}

/// Per-block `L²` norms `‖Δ_j u‖` over the resolved range.
pub fn block_norms(u: &SpectralField, part: &DyadicPartition) -> Vec<(i32, f64)> {
    let hat = u.hat();
    part.indices().map(|j| (j, part.block_l2(hat, j))).collect()
}

pub fn besov_norm(u: &SpectralField, spec: &BesovSpec, part: &DyadicPartition) -> f64 {
    block_norms(u, part)
        .into_iter()
        .filter(|(j, _)| spec.includes(*j))
        .map(|(j, n)| 2f64.powf(j as f64 * spec.s) * n)
        .sum()
}

/// `u^ℓ = Σ_{j ≤ J_τ−1} Δ_j u` and `u^h = Σ_{j ≥ J_τ} Δ_j u`.
pub fn lf_hf_split(u: &SpectralField, tau: f64, k: i32, part: &DyadicPartition) -> (SpectralField, SpectralField) {
    let cut = j_tau(tau, k);
    (part.filtered(u, |j| j < cut), part.filtered(u, |j| j >= cut))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeNorm {
    L1,
    L2,
    Linf,
}

fn trapezoid(times: &[f64], vals: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(vals.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Time-norm of a sampled series, by trapezoid for `L¹`/`L²` and max for `L∞`.
pub fn time_norm(times: &[f64], vals: &[f64], p: TimeNorm) -> Result<f64> {
    if times.len() != vals.len() {
        return Err(Error::Shape("time and value series differ in length".into()));
    }
    match p {
        TimeNorm::Linf => Ok(vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()))),
        _ if times.len() < 2 => Err(Error::Sampling("at least two samples are needed for a time integral".into())),
        TimeNorm::L1 => Ok(trapezoid(times, &vals.iter().map(|v| v.abs()).collect::<Vec<_>>())),
        TimeNorm::L2 => Ok(trapezoid(times, &vals.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt()),
    }
}

/// Discrete Chemin–Lerner norm `Σ_j 2^{js} ‖Δ_j u‖_{L^p_T(L²)}`.
pub fn chemin_lerner_norm(
    times: &[f64],
    fields: &[SpectralField],
    spec: &BesovSpec,
    p: TimeNorm,
    part: &DyadicPartition,
) -> Result<f64> {
    if times.len() != fields.len() {
        return Err(Error::Shape("times and fields differ in length".into()));
    }
    if fields.is_empty() {
        return Err(Error::Sampling("empty trajectory".into()));
    }
    let per_time: Vec<Vec<(i32, f64)>> = fields.iter().map(|f| block_norms(f, part)).collect();
    let mut total = 0.0;
    for (b, j) in part.indices().enumerate() {
        if !spec.includes(j) {
            continue;
        }
        let series: Vec<f64> = per_time.iter().map(|row| row[b].1).collect();
        total += 2f64.powf(j as f64 * spec.s) * time_norm(times, &series, p)?;
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernsteinReport {
    pub j: i32,
    /// `‖∇u‖ / (2^j ‖u‖)`.
    pub ratio: f64,
    pub within_bounds: bool,
}

/// Ratio `‖∇u‖/(2^j‖u‖)` for a field supported in the annulus of index `j`.
pub fn bernstein_check(u: &SpectralField, j: i32) -> Result<BernsteinReport> {
    let grid = u.grid();
    let hat = u.hat();
    let scale = 2f64.powi(j);
    let peak = hat.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let (mut num, mut den) = (0.0, 0.0);
    for (i, c) in hat.iter().enumerate() {
        let k = grid.kmag(i);
        let a = c.norm();
        if a > 1e-12 * peak {
            let r = k / scale;
            if !(0.75..=8.0 / 3.0).contains(&r) {
                return Err(Error::Precondition(format!(
                    "mode |k| = {k} lies outside the annulus of block {j}"
                )));
            }
        }
        num += k * k * c.norm_sqr();
        den += c.norm_sqr();
    }
    if den == 0.0 {
        return Err(Error::Precondition("zero field has no Bernstein ratio".into()));
    }
    let ratio = (num / den).sqrt() / scale;
    Ok(BernsteinReport { j, ratio, within_bounds: (0.75..=8.0 / 3.0).contains(&ratio) })
}

/// Random field with a few modes inside the annulus of block `j`, or `None`
/// if the grid resolves no wavevector there.
pub fn annulus_field(grid: Grid, j: i32, rng: &mut ChaCha8Rng) -> Option<SpectralField> {
    let scale = 2f64.powi(j);
    let allowed: Vec<[i64; 2]> = (0..grid.len())
        .filter(|&i| {
            let r = grid.kmag(i) / scale;
            grid.kmag(i) > 0.0 && (0.75..=8.0 / 3.0).contains(&r)
        })
        .map(|i| grid.wavevector(i))
        .collect();
    if allowed.is_empty() {
        return None;
    }
    let picks: Vec<([i64; 2], f64, f64)> = (0..6)
        .map(|_| {
            let k = allowed[rng.random_range(0..allowed.len())];
            (k, rng.random_range(0.1..1.0), rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    Some(SpectralField::from_fn(grid, |x| {
        picks.iter().map(|&(k, a, ph)| a * (k[0] as f64 * x[0] + k[1] as f64 * x[1] + ph).cos()).sum()
    }))
}

/// Outcome of [`property_suite`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub unity_residual: f64,
    pub reconstruction: f64,
    pub bernstein_min: f64,
    pub bernstein_max: f64,
    pub bernstein_fields: usize,
}

impl SuiteReport {
    pub const UNITY_TOL: f64 = 1e-10;
    pub const RECONSTRUCTION_TOL: f64 = 1e-12;

    pub fn passed(&self) -> bool {
        self.unity_residual < Self::UNITY_TOL
            && self.reconstruction < Self::RECONSTRUCTION_TOL
            && self.bernstein_min >= 0.75
            && self.bernstein_max <= 8.0 / 3.0
    }
}

/// Partition of unity, block reconstruction and Bernstein ratios on one grid.
pub fn property_suite(grid: Grid, bernstein_fields: usize, seed: u64) -> Result<SuiteReport> {
    let part = build_partition(grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kmax = (grid.n() / 3).max(1) as i64;
    let mut recon: f64 = 0.0;
    for _ in 0..5 {
        let modes: Vec<([i64; 2], f64, f64)> = (0..12)
            .map(|_| {
                let ky = if grid.dim() == 2 { rng.random_range(-kmax..=kmax) } else { 0 };
                ([rng.random_range(-kmax..=kmax), ky], rng.random_range(-1.0..1.0), rng.random_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        let u = SpectralField::from_fn(grid, |x| {
            modes.iter().map(|&(k, a, ph)| a * (k[0] as f64 * x[0] + k[1] as f64 * x[1] + ph).cos()).sum()
        });
        let mut sum = vec![0.0; grid.len()];
        for j in part.indices() {
            for (s, v) in sum.iter_mut().zip(block(&u, j, &part).phys()) {
                *s += v;
            }
        }
        let mean = u.mean();
        recon = recon.max(sum.iter().zip(u.phys()).map(|(s, v)| (s - (v - mean)).abs()).fold(0.0, f64::max));
    }
    let usable: Vec<i32> = (0..=part.j_max).filter(|&j| annulus_field(grid, j, &mut rng.clone()).is_some()).collect();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for _ in 0..bernstein_fields {
        let j = usable[rng.random_range(0..usable.len())];
        let u = annulus_field(grid, j, &mut rng).expect("usable index");
        let r = bernstein_check(&u, j)?;
        lo = lo.min(r.ratio);
        hi = hi.max(r.ratio);
    }
    Ok(SuiteReport {
        unity_residual: part.unity_residual(),
        reconstruction: recon,
        bernstein_min: lo,
        bernstein_max: hi,
        bernstein_fields,
    })
}
