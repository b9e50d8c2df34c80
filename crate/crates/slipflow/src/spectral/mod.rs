//! Radial collocation: grid, modal operators, boundary rows, solves.

mod bc;
mod eig;
mod grid;
mod operator;
pub mod precise;
mod solve;

pub use bc::{BcRow, BoundaryConditionSet};
pub use eig::{generalized_eig, EigenPair};
pub use grid::{apply_real, build_grid, clenshaw_curtis, inner_product, RadialGrid};
pub use operator::{bilaplacian_n, laplacian_n, ModalOperator};
pub use solve::{solve_bvp, BvpSolver, SINGULAR_CONDITION};

/// Eigenvalues larger than this multiple of mu/(b-a)^2 are treated as
/// artefacts of the boundary treatment.
pub const SPURIOUS_CAP_FACTOR: f64 = 1e6;
