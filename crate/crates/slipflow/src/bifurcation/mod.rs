//! Leading eigenmode, center-manifold reduction and the bifurcated states.

mod eigen;
mod interaction;
mod manifold;
mod report;

pub use eigen::{
    leading_eigenpair, leading_mode_eigenpair, mode_spectrum, normalize_mode, EigenResult,
};
pub use interaction::{interaction, interaction_from_parts};
pub use manifold::{
    cubic_forcing, dirichlet_inverse, lyapunov_coeff, quadratic_projection, solve_g11, LyapunovCoeff,
    ManifoldCoeffs,
};
pub use report::{
    analyze_bifurcation, classify, classify_and_build, degeneracy_tolerance, BifurcationAnalysis,
    BifurcationReport, Classification, Side,
};
