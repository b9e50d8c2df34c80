use num_complex::Complex64;

use crate::domain::{validate, DomainParams, ModalField};
use crate::energy::mode_energies;
use crate::error::{Error, Result};
use crate::spectral::{
    bilaplacian_n, generalized_eig, inner_product, laplacian_n, BoundaryConditionSet, RadialGrid,
    SPURIOUS_CAP_FACTOR,
};

/// Leading eigenpair of mu Delta_n^2 Psi = lambda Delta_n Psi with the wall rows.
#[derive(Debug, Clone)]
pub struct EigenResult {
    /// Growth rate, refined by the energy quotient of the computed eigenfunction.
    pub lambda1: f64,
    /// Eigenvalue as returned by the dense solver.
    pub lambda1_raw: Complex64,
    /// Real profile with int |Psi|^2 r dr = 1 and Psi'(a) > 0.
    pub psi1: ModalField,
    pub mu: f64,
}

fn check_mu(params: &DomainParams, mu: f64) -> Result<DomainParams> {
    let p = validate(params.with_mu(mu))?;
    if mu > 10.0 * p.a * p.alpha {
        return Err(Error::InvalidPhysics(format!("mu = {mu} exceeds 10 a alpha = {}", 10.0 * p.a * p.alpha)));
    }
    Ok(p)
}

/// Filtered eigenvalues of mode n by descending real part; eigenfunctions for the first `count`.
pub fn mode_spectrum(
    params: &DomainParams,
    mu: f64,
    grid: &RadialGrid,
    n: i32,
    count: usize,
) -> Result<Vec<crate::spectral::EigenPair>> {
    let p = check_mu(params, mu)?;
    let a_op = bilaplacian_n(grid, n).scaled(mu);
    let b_op = laplacian_n(grid, n);
    let bcs = BoundaryConditionSet::slip(grid, p.alpha, mu);
    let cap = SPURIOUS_CAP_FACTOR * mu / (p.b - p.a).powi(2);
    generalized_eig(&a_op, &b_op, &bcs, cap, count)
}

/// Unit L^2(r dr) norm with Psi'(a) real and positive; imaginary residue dropped.
pub fn normalize_mode(psi: &ModalField, grid: &RadialGrid) -> ModalField {
    let slope = grid.derivative(psi).values[grid.inner()];
    let phase = if slope.norm() > 0.0 { slope.conj() / slope.norm() } else { Complex64::new(1.0, 0.0) };
    let rotated = psi.scaled(phase);
    let real = ModalField::new(psi.n, rotated.values.iter().map(|v| Complex64::new(v.re, 0.0)).collect());
    let norm2 = grid.integrate(&real.values.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>());
    real.scaled(Complex64::new(1.0 / norm2.sqrt(), 0.0))
}

/// Leading eigenpair for angular mode n.
pub fn leading_mode_eigenpair(params: &DomainParams, mu: f64, grid: &RadialGrid, n: i32) -> Result<EigenResult> {
    let p = check_mu(params, mu)?;
    let pairs = mode_spectrum(&p, mu, grid, n, 1)?;
    let lead = &pairs[0];
    let vector = lead
        .vector
        .as_ref()
        .ok_or_else(|| Error::EigSolverFailure("missing eigenvector".into()))?;
    let psi1 = normalize_mode(vector, grid);
    let lambda1 = mode_energies(grid, &psi1).growth_quotient(&p);
    if !lambda1.is_finite() {
        return Err(Error::EigSolverFailure("non-finite growth rate".into()));
    }
    Ok(EigenResult { lambda1, lambda1_raw: lead.value, psi1, mu })
}

/// Leading eigenpair of the n = 1 problem.
pub fn leading_eigenpair(params: &DomainParams, mu: f64, grid: &RadialGrid) -> Result<EigenResult> {
    leading_mode_eigenpair(params, mu, grid, 1)
}

impl EigenResult {
    /// Copy with the eigenfunction multiplied by c.
    pub fn rescaled(&self, c: Complex64) -> EigenResult {
        EigenResult { psi1: self.psi1.scaled(c), ..self.clone() }
    }

    /// <psi1, psi1> including the angular factor.
    pub fn norm_sqr(&self, grid: &RadialGrid) -> f64 {
        inner_product(&self.psi1, &self.psi1, grid).map(|z| z.re).unwrap_or(f64::NAN)
    }
}
