pub mod error;
pub mod experiments;
pub mod grid;
pub mod io;
pub mod lp;
pub mod models;
pub mod solver;
pub mod spectral;
pub mod trajectory;

pub use error::{Error, Result};
pub use grid::{Fourier, Grid, SpectralField};
pub use models::{MixtureState, PMState, Params, PressureLaw, ReformState};
