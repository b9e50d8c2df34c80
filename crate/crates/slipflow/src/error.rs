use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid physics: {0}")]
    InvalidPhysics(String),
    #[error("grid too coarse: N = {0}, need N >= 8")]
    TooCoarse(usize),
    #[error("grid mismatch: expected {expected} samples, got {found}")]
    GridMismatch { expected: usize, found: usize },
    #[error("mode mismatch: {0} vs {1}")]
    ModeMismatch(i32, i32),
    #[error("singular system (condition estimate {0:.3e})")]
    SingularSystem(f64),
    #[error("eigensolver failure: {0}")]
    EigSolverFailure(String),
    #[error("no sign change of the determinant in [{lo:.3e}, {hi:.3e}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("degenerate Lyapunov coefficient l = {l:.3e} (tolerance {tol:.3e})")]
    DegenerateCoefficient { l: f64, tol: f64 },
    #[error("CFL violation: Courant number {courant:.3} exceeds {limit}")]
    CflViolation { courant: f64, limit: f64 },
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("threshold {threshold:.3e} not reached for delta = {delta:.3e} by t = {t_max}")]
    NoEscape { delta: f64, threshold: f64, t_max: f64 },
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
