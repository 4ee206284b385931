//! Periodic grids on the torus `[0, 2π)^d`, Fourier transforms and the
//! [`SpectralField`] carrier used by the analysis modules.
//!
//! Fourier coefficients are normalized so that
//! `f(x) = Σ_k f̂_k e^{ik·x}`, i.e. the forward transform divides by `N^d`.
//! With this convention the continuous `L²` norm over the torus is
//! `‖f‖² = (2π)^d Σ_k |f̂_k|²`.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform periodic grid with `n` points per axis and period `2π`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Resolution(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if n < 2 || n % 2 != 0 {
            return Err(Error::Resolution(format!(
                "points per axis must be even and at least 2, got {n}"
            )));
        }
        Ok(Grid { dim, n })
    }

    /// Grid accepted by the time integrators: power of two, at least 32.
    pub fn for_solver(dim: usize, n: usize) -> Result<Self> {
        if n < 32 || !n.is_power_of_two() {
            return Err(Error::Resolution(format!(
                "solver grids need a power of two with at least 32 points per axis, got {n}"
            )));
        }
        Grid::new(dim, n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    pub fn domain_volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32)
    }

    /// Signed wavenumber for a per-axis index. The Nyquist index maps to `+n/2`.
    pub fn axis_wavenumber(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Wavenumber vector of a flat index (second entry is zero in 1-D).
    pub fn wavevector(&self, idx: usize) -> [i64; 2] {
        match self.dim {
            1 => [self.axis_wavenumber(idx), 0],
            _ => [
                self.axis_wavenumber(idx / self.n),
                self.axis_wavenumber(idx % self.n),
            ],
        }
    }

    pub fn kmag(&self, idx: usize) -> f64 {
        let [a, b] = self.wavevector(idx);
        ((a * a + b * b) as f64).sqrt()
    }

    /// Largest resolved wavenumber magnitude.
    pub fn kmax(&self) -> f64 {
        (self.n / 2) as f64 * (self.dim as f64).sqrt()
    }

    fn is_nyquist(&self, idx: usize, axis: usize) -> bool {
        let i = match (self.dim, axis) {
            (1, _) => idx,
            (_, 0) => idx / self.n,
            _ => idx % self.n,
        };
        i == self.n / 2
    }

    /// 2/3-rule mask: `false` for every mode with some `|k_i| > n/3`.
    pub fn dealias_mask(&self) -> Vec<bool> {
        let cut = self.n as i64 / 3;
        (0..self.len())
            .map(|idx| {
                let [a, b] = self.wavevector(idx);
                a.abs() <= cut && b.abs() <= cut
            })
            .collect()
    }

    /// Physical coordinates of a flat index.
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let h = self.dx();
        match self.dim {
            1 => [idx as f64 * h, 0.0],
            _ => [(idx / self.n) as f64 * h, (idx % self.n) as f64 * h],
        }
    }

    pub fn sample(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.coords(i))).collect()
    }

    /// Continuous `L²(T^d)` norm of grid samples (rectangle rule, exact for
    /// trigonometric polynomials below the Nyquist band).
    pub fn l2_norm(&self, f: &[f64]) -> f64 {
        (f.iter().map(|v| v * v).sum::<f64>() * self.cell_volume()).sqrt()
    }

    pub fn integral(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.cell_volume()
    }

    pub fn mean(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() / f.len() as f64
    }
}

/// FFT plans and spectral differential operators for one grid.
///
/// Each time integration owns its own engine; the type is `Send + Sync`
/// and carries no mutable state.
#[derive(Clone)]
pub struct Fourier {
    grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    mask: Vec<bool>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("grid", &self.grid).finish()
    }
}

impl Fourier {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n());
        let inv = planner.plan_fft_inverse(grid.n());
        Fourier {
            grid,
            fwd,
            inv,
            mask: grid.dealias_mask(),
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    fn transform(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n();
        match self.grid.dim() {
            1 => plan.process(buf),
            _ => {
                for row in buf.chunks_mut(n) {
                    plan.process(row);
                }
                let mut col = vec![Complex64::default(); n];
                for j in 0..n {
                    for i in 0..n {
                        col[i] = buf[i * n + j];
                    }
                    plan.process(&mut col);
                    for i in 0..n {
                        buf[i * n + j] = col[i];
                    }
                }
            }
        }
    }

    pub fn forward(&self, f: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, &self.fwd);
        let scale = 1.0 / self.grid.len() as f64;
        for c in &mut buf {
            *c *= scale;
        }
        buf
    }

    pub fn inverse(&self, hat: &[Complex64]) -> Vec<f64> {
        let mut buf = hat.to_vec();
        self.transform(&mut buf, &self.inv);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Apply a real Fourier multiplier `m(k)` to a real field.
    pub fn multiplier(&self, f: &[f64], m: impl Fn([i64; 2]) -> f64) -> Vec<f64> {
        let mut hat = self.forward(f);
        for (idx, c) in hat.iter_mut().enumerate() {
            *c *= m(self.grid.wavevector(idx));
        }
        self.inverse(&hat)
    }

    /// Apply a real multiplier given per flat mode index.
    pub fn multiplier_indexed(&self, f: &[f64], m: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut hat = self.forward(f);
        for (idx, c) in hat.iter_mut().enumerate() {
            *c *= m(idx);
        }
        self.inverse(&hat)
    }

    /// Zero every mode outside the 2/3-rule band.
    pub fn dealias(&self, f: &mut [f64]) {
        let mut hat = self.forward(f);
        for (c, &keep) in hat.iter_mut().zip(&self.mask) {
            if !keep {
                *c = Complex64::default();
            }
        }
        let out = self.inverse(&hat);
        f.copy_from_slice(&out);
    }

    /// Spectral partial derivative along `axis`, with optional 2/3 truncation
    /// of the input spectrum (used when `f` is a product of fields).
    pub fn derivative(&self, f: &[f64], axis: usize, dealias: bool) -> Vec<f64> {
        let mut hat = self.forward(f);
        for (idx, c) in hat.iter_mut().enumerate() {
            if (dealias && !self.mask[idx]) || self.grid.is_nyquist(idx, axis) {
                *c = Complex64::default();
                continue;
            }
            let k = self.grid.wavevector(idx)[axis] as f64;
            *c *= Complex64::new(0.0, k);
        }
        self.inverse(&hat)
    }

    pub fn gradient(&self, f: &[f64], dealias: bool) -> Vec<Vec<f64>> {
        (0..self.grid.dim())
            .map(|a| self.derivative(f, a, dealias))
            .collect()
    }

    pub fn divergence(&self, v: &[Vec<f64>], dealias: bool) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for (a, comp) in v.iter().enumerate() {
            for (o, d) in out.iter_mut().zip(self.derivative(comp, a, dealias)) {
                *o += d;
            }
        }
        out
    }

    pub fn laplacian(&self, f: &[f64], dealias: bool) -> Vec<f64> {
        let mask = &self.mask;
        let mut hat = self.forward(f);
        for (idx, c) in hat.iter_mut().enumerate() {
            if dealias && !mask[idx] {
                *c = Complex64::default();
                continue;
            }
            let [a, b] = self.grid.wavevector(idx);
            *c *= -((a * a + b * b) as f64);
        }
        self.inverse(&hat)
    }
}

/// A periodic real field carried as physical samples, with its Fourier
/// coefficients computed on first request.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    phys: Vec<f64>,
    hat: OnceLock<Vec<Complex64>>,
}

impl SpectralField {
    pub fn from_phys(grid: Grid, phys: Vec<f64>) -> Result<Self> {
        if phys.len() != grid.len() {
            return Err(Error::Shape(format!(
                "field has {} samples, grid expects {}",
                phys.len(),
                grid.len()
            )));
        }
        Ok(SpectralField {
            grid,
            phys,
            hat: OnceLock::new(),
        })
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        SpectralField {
            grid,
            phys: grid.sample(f),
            hat: OnceLock::new(),
        }
    }

    /// Build from Fourier coefficients; the imaginary part of the inverse
    /// transform is dropped, so `hat` should be Hermitian.
    pub fn from_hat(grid: Grid, hat: Vec<Complex64>) -> Result<Self> {
        if hat.len() != grid.len() {
            return Err(Error::Shape("coefficient count does not match grid".into()));
        }
        let phys = Fourier::new(grid).inverse(&hat);
        let cell = OnceLock::new();
        let _ = cell.set(hat);
        Ok(SpectralField {
            grid,
            phys,
            hat: cell,
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        SpectralField {
            grid,
            phys: vec![0.0; grid.len()],
            hat: OnceLock::new(),
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn phys(&self) -> &[f64] {
        &self.phys
    }

    pub fn into_phys(self) -> Vec<f64> {
        self.phys
    }

    pub fn hat(&self) -> &[Complex64] {
        self.hat
            .get_or_init(|| Fourier::new(self.grid).forward(&self.phys))
    }

    pub fn mean(&self) -> f64 {
        self.grid.mean(&self.phys)
    }

    pub fn l2_norm(&self) -> f64 {
        self.grid.l2_norm(&self.phys)
    }

    pub fn scaled(&self, c: f64) -> Self {
        SpectralField {
            grid: self.grid,
            phys: self.phys.iter().map(|v| v * c).collect(),
            hat: OnceLock::new(),
        }
    }

    pub fn mean_free(&self) -> Self {
        let m = self.mean();
        SpectralField {
            grid: self.grid,
            phys: self.phys.iter().map(|v| v - m).collect(),
            hat: OnceLock::new(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.phys.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}
