use num_complex::Complex64;
use serde::Serialize;

use super::eigen::EigenResult;
use super::interaction::interaction;
use crate::domain::{DomainParams, ModalField};
use crate::error::{Error, Result};
use crate::spectral::{
    bilaplacian_n, inner_product, laplacian_n, solve_bvp, BoundaryConditionSet, RadialGrid,
};

/// Quadratic center-manifold coefficient: psi = z Psi1 e^{i theta} + z^2 G11 e^{2 i theta} + c.c. + ...
/// The |z|^2 coefficient vanishes and the zbar^2 one is conj(G11).
#[derive(Debug, Clone)]
pub struct ManifoldCoeffs {
    pub g11: ModalField,
}

/// mu Delta_2^2 G - 2 lambda1 Delta_2 G = -G(psi1, psi1) with the slip wall rows.
pub fn solve_g11(
    params: &DomainParams,
    mu: f64,
    lambda1: f64,
    psi1: &ModalField,
    grid: &RadialGrid,
) -> Result<ManifoldCoeffs> {
    let forcing = interaction(grid, psi1, psi1)?;
    let rhs = forcing.scaled(Complex64::new(-1.0, 0.0));
    let n = forcing.n;
    let op = bilaplacian_n(grid, n).combine(mu, &laplacian_n(grid, n), -2.0 * lambda1);
    let bcs = BoundaryConditionSet::slip(grid, params.alpha, mu);
    let g11 = solve_bvp(&op, &rhs, &bcs)?;
    Ok(ManifoldCoeffs { g11 })
}

/// Mode-1 part of the cubic self-interaction:
/// G(conj psi1 e^{-i theta}, G11 e^{2 i theta}) + G(G11 e^{2 i theta}, conj psi1 e^{-i theta}).
pub fn cubic_forcing(grid: &RadialGrid, psi1: &ModalField, g11: &ModalField) -> Result<ModalField> {
    let bar = psi1.conj_partner();
    interaction(grid, &bar, g11)?.add(&interaction(grid, g11, &bar)?)
}

/// Solves Delta_n w = f with w(a) = w(b) = 0.
pub fn dirichlet_inverse(grid: &RadialGrid, f: &ModalField) -> Result<ModalField> {
    solve_bvp(&laplacian_n(grid, f.n), f, &BoundaryConditionSet::dirichlet(grid, 0.0, 0.0))
}

/// Cubic coefficient of the reduced equation dz/dt = lambda1 z + l |z|^2 z.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LyapunovCoeff {
    /// <F, psi1> / <Delta_1 psi1, psi1>, F the cubic vorticity forcing.
    pub l: f64,
    pub imag_residue: f64,
    /// <Delta^{-1} F, psi1> / <psi1, psi1> (Dirichlet inverse), for comparison.
    pub l_plain: f64,
    pub l_plain_imag: f64,
}

/// Projects the cubic forcing on the critical mode.
///
/// The evolution is Delta psi_t = mu Delta^2 psi + G(psi, psi), and the
/// linear part is symmetric for the pairing that puts Delta on the time
/// derivative. The projection therefore divides by <Delta_1 psi1, psi1>;
/// applying Delta^{-1} to the forcing with Dirichlet rows instead changes
/// the boundary treatment and is kept only as a diagnostic.
pub fn lyapunov_coeff(
    _params: &DomainParams,
    _mu: f64,
    eig: &EigenResult,
    mc: &ManifoldCoeffs,
    grid: &RadialGrid,
) -> Result<LyapunovCoeff> {
    let psi1 = &eig.psi1;
    let f = cubic_forcing(grid, psi1, &mc.g11)?;
    let denom = inner_product(&grid.apply_laplacian(psi1), psi1, grid)?;
    let l = inner_product(&f, psi1, grid)? / denom;
    let w = dirichlet_inverse(grid, &f)?;
    let plain = inner_product(&w, psi1, grid)? / inner_product(psi1, psi1, grid)?;
    if !(l.re.is_finite() && plain.re.is_finite()) {
        return Err(Error::SingularSystem(f64::INFINITY));
    }
    Ok(LyapunovCoeff {
        l: l.re,
        imag_residue: l.im.abs() / l.norm().max(f64::MIN_POSITIVE),
        l_plain: plain.re,
        l_plain_imag: plain.im.abs() / plain.norm().max(f64::MIN_POSITIVE),
    })
}

/// Projection of Delta^{-1} G(u, u) on psi1 for the real critical field u.
/// Its wavenumbers are 0 and +-2, so it vanishes.
pub fn quadratic_projection(grid: &RadialGrid, psi1: &ModalField) -> Result<Complex64> {
    let bar = psi1.conj_partner();
    let parts = [(psi1, psi1), (psi1, &bar), (&bar, psi1), (&bar, &bar)];
    let mut total = Complex64::new(0.0, 0.0);
    for (f, g) in parts {
        let q = interaction(grid, f, g)?;
        if q.n == 0 {
            // the mean-flow mode is not part of the phase space
            continue;
        }
        let w = dirichlet_inverse(grid, &q)?;
        total += inner_product(&w, psi1, grid)?;
    }
    Ok(total)
}
