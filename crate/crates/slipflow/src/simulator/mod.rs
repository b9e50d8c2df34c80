//! Time integration of the modal vorticity-streamfunction system.
//!
//! Only modes n = 1..ntheta/2 are stored; the mean (n = 0) component is
//! never evolved, so the zero-mean-swirl projection holds by construction.

mod experiments;
mod state;
mod stepper;

pub use experiments::{
    escape_experiment, escape_time, fit_growth_rate, linear_growth_rate, linear_slope, saturation_run,
    unit_velocity_mode, EscapeResult, EscapeRow, SaturationRun,
};
pub use state::{Diagnostics, SimState};
pub use stepper::{energy_residual, SimConfig, Simulator};
