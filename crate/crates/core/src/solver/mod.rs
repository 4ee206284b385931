//! Time integration of BN, K, KTAU and PM on the periodic torus.

pub mod initial;
pub mod rhs;
pub mod state;
pub mod stepper;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::models::{MixtureState, Params};
use crate::trajectory::{ledger_row, Trajectory};

pub use initial::{make_initial_data, make_pm_initial_data, InitialCondition};
pub use rhs::{rhs_bn, rhs_k, rhs_pm, Model, Tendency};
pub use state::{conservation, decode, encode, System};
pub use stepper::{Decay, Fields, Scheme};

pub const DEFAULT_CFL: f64 = 0.25;

/// Everything that determines one integration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub system: System,
    pub params: Params,
    pub grid: Grid,
    pub t_end: f64,
    /// Fixed step; `None` selects the CFL rule.
    pub dt: Option<f64>,
    pub cfl: f64,
    pub scheme: Scheme,
    /// Number of uniform sample intervals on `[0, t_end]`.
    pub samples: usize,
    /// Extra sample instants in `(0, t_end)`.
    pub output_times: Vec<f64>,
    pub ic: InitialCondition,
}

impl RunConfig {
    pub fn new(system: System, params: Params, grid: Grid, t_end: f64, ic: InitialCondition) -> Self {
        RunConfig {
            system,
            params,
            grid,
            t_end,
            dt: None,
            cfl: DEFAULT_CFL,
            scheme: Scheme::default(),
            samples: 10,
            output_times: Vec::new(),
            ic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        Grid::for_solver(self.grid.dim(), self.grid.n())?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Config(format!("dt must be positive, got {dt}")));
            }
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        self.ic.validate(self.grid)
    }

    /// Sorted, de-duplicated sample instants including `0` and `t_end`.
    pub fn sample_times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = (0..=self.samples).map(|k| self.t_end * k as f64 / self.samples as f64).collect();
        ts.extend(self.output_times.iter().copied().filter(|&t| t > 0.0 && t < self.t_end));
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * self.t_end);
        ts
    }
}

/// A blow-up together with the samples recorded before it.
#[derive(Clone, Debug)]
pub struct RunFailure {
    pub error: Error,
    pub partial: Trajectory,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({} samples recorded)", self.error, self.partial.len())
    }
}

impl std::error::Error for RunFailure {}

/// One step followed by 2/3-rule truncation of every evolved field.
pub fn step(model: &Model, y: &Fields, dt: f64, scheme: Scheme) -> Result<Fields> {
    let mut out = stepper::step(model, &model.fourier, y, dt, scheme)?;
    for f in out.iter_mut() {
        model.fourier.dealias(f);
    }
    Ok(out)
}

fn max_abs(f: &[f64]) -> f64 {
    f.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Step size from the CFL rule for the explicit part.
pub fn stable_dt(model: &Model, y: &Fields, cfl: f64) -> Result<f64> {
    let p = &model.params;
    let grid = model.grid();
    let dx = grid.dx();
    let dec = model.decode(y)?;
    let umax = dec.u.iter().map(|c| max_abs(c)).fold(0.0, f64::max);
    Ok(match model.system {
        System::BN | System::K => cfl * dx / (umax + p.wave_speed()),
        System::KTAU => cfl * dx / (umax + p.wave_speed() / p.tau),
        System::PM => {
            let (gp, gm) = (p.gamma_plus(), p.gamma_minus());
            let kmax = grid.kmax();
            let mut dev: f64 = 0.0;
            for i in 0..grid.len() {
                let a = dec.alpha[i];
                let c2 = gp * gm * dec.p_plus[i] / (gp * (1.0 - a) + gm * a) / dec.rho[i];
                dev = dev.max((c2 - p.c_bar()).abs());
            }
            let v = rhs::darcy(&model.fourier, &dec.p_plus, &dec.rho);
            let vmax = v.iter().map(|c| max_abs(c)).fold(0.0, f64::max);
            cfl / (kmax * kmax * dev + kmax * vmax + 1e-300)
        }
    })
}

/// Mixture state of evolved fields, with the velocity convention of
/// [`Trajectory`].
pub fn fields_to_state(model: &Model, y: &Fields) -> Result<MixtureState> {
    let dec = model.decode(y)?;
    let u = match model.system {
        System::PM => Some(rhs::darcy(&model.fourier, &dec.p_plus, &dec.rho)),
        _ => None,
    };
    Ok(state::to_mixture(model.grid(), &dec, u))
}

fn record(traj: &mut Trajectory, model: &Model, t: f64, y: &Fields) -> Result<()> {
    let s = fields_to_state(model, y)?;
    s.validate()?;
    let row = ledger_row(model.system, &model.params, &model.fourier, t, &s);
    traj.push(t, s, row)
}

fn blow_up(t: f64, e: Error) -> Error {
    match e {
        Error::BlowUp { .. } => e,
        other => Error::BlowUp { time: t, reason: other.to_string() },
    }
}

/// Integrate from the configured initial data.
pub fn integrate(cfg: &RunConfig) -> std::result::Result<Trajectory, Box<RunFailure>> {
    let fail = |error| Box::new(RunFailure { error, partial: Trajectory::new(cfg.system, cfg.params, cfg.grid) });
    cfg.validate().map_err(fail)?;
    let init = make_initial_data(cfg.system, &cfg.params, cfg.grid, &cfg.ic).map_err(fail)?;
    integrate_from(cfg, &init)
}

/// Integrate from an explicit initial state (velocity convention as in
/// [`Trajectory`]; ignored for PM).
pub fn integrate_from(cfg: &RunConfig, init: &MixtureState) -> std::result::Result<Trajectory, Box<RunFailure>> {
    let mut traj = Trajectory::new(cfg.system, cfg.params, cfg.grid);
    let res = run(cfg, init, &mut traj);
    match res {
        Ok(()) => Ok(traj),
        Err(error) => Err(Box::new(RunFailure { error, partial: traj })),
    }
}

fn run(cfg: &RunConfig, init: &MixtureState, traj: &mut Trajectory) -> Result<()> {
    cfg.validate()?;
    if init.grid != cfg.grid {
        return Err(Error::Shape("initial state grid differs from the configured grid".into()));
    }
    let model = Model::new(cfg.system, cfg.params, cfg.grid);
    let mut y = encode(cfg.system, &cfg.params, init)?;
    for f in y.iter_mut() {
        model.fourier.dealias(f);
    }
    let times = cfg.sample_times();
    let mut t = 0.0;
    record(traj, &model, t, &y).map_err(|e| blow_up(t, e))?;
    for &target in &times[1..] {
        while t < target {
            let rem = target - t;
            let h_max = match cfg.dt {
                Some(dt) => dt,
                None => stable_dt(&model, &y, cfg.cfl).map_err(|e| blow_up(t, e))?,
            };
            let h = if rem <= h_max * (1.0 + 1e-9) {
                rem
            } else if rem < 2.0 * h_max {
                0.5 * rem
            } else {
                h_max
            };
            y = step(&model, &y, h, cfg.scheme).map_err(|e| blow_up(t, e))?;
            t = if h == rem { target } else { t + h };
        }
        record(traj, &model, t, &y).map_err(|e| blow_up(t, e))?;
    }
    Ok(())
}
