//! Linear stability, pitchfork analysis and direct simulation of planar
//! incompressible flow in an annulus a < r < b, with a Navier-slip inner
//! wall (slip coefficient alpha) and a stress-free outer wall.
//!
//! The streamfunction is expanded in angular modes psi = sum Psi_n(r) e^{i n theta};
//! each radial profile is discretized by Chebyshev collocation.

pub mod bifurcation;
pub mod critical;
pub mod domain;
pub mod energy;
pub mod error;
pub mod simulator;
pub mod spectral;
pub mod sweep;

pub use domain::{synthesize_physical, validate, DomainParams, ModalField, PhysicalField};
pub use error::{Error, Result};
pub use spectral::{build_grid, RadialGrid};
