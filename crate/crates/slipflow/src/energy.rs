//! Quadratic energy functionals of streamfunction modes.
//!
//! For a real field the modes n and -n both contribute, so a stored mode
//! n != 0 counts twice in [`field_energies`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::domain::{DomainParams, ModalField};
use crate::spectral::{apply_real, RadialGrid};

/// E3 = int |v|^2, E1 = int |grad v|^2 + int_{r=b} v_tau^2 dtheta,
/// E2 = int_{r=a} v_tau^2 ds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Energies {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
}

impl Energies {
    /// Right side of d/dt (E3 / 2) = -mu E1 + (alpha - mu/a) E2.
    pub fn dissipation_balance(&self, params: &DomainParams) -> f64 {
        -params.mu * self.e1 + (params.alpha - params.mu / params.a) * self.e2
    }

    /// Rayleigh quotient of the linear growth rate.
    pub fn growth_quotient(&self, params: &DomainParams) -> f64 {
        self.dissipation_balance(params) / self.e3
    }

    /// L^2 norm of the velocity.
    pub fn velocity_norm(&self) -> f64 {
        self.e3.max(0.0).sqrt()
    }

    fn add_scaled(&mut self, other: &Energies, c: f64) {
        self.e1 += c * other.e1;
        self.e2 += c * other.e2;
        self.e3 += c * other.e3;
    }
}

/// Energies of the single complex mode Psi(r) e^{i n theta}.
pub fn mode_energies(grid: &RadialGrid, psi: &ModalField) -> Energies {
    let n = psi.n as f64;
    let p0 = &psi.values;
    let p1 = apply_real(&grid.d1, p0);
    let p2 = apply_real(&grid.d2, p0);
    let i_n = Complex64::new(0.0, n);
    let mut kinetic = vec![0.0; grid.size()];
    let mut gradient = vec![0.0; grid.size()];
    for (k, &r) in grid.nodes.iter().enumerate() {
        let (f, f1, f2) = (p0[k], p1[k], p2[k]);
        kinetic[k] = n * n * f.norm_sqr() / (r * r) + f1.norm_sqr();
        // polar components of grad v for v_r = -(i n / r) Psi, v_theta = Psi'
        let shear = i_n * (f1 / r - f / (r * r));
        let strain = f * (n * n / (r * r)) - f1 / r;
        gradient[k] = 2.0 * shear.norm_sqr() + f2.norm_sqr() + strain.norm_sqr();
    }
    let outer = p1[0].norm_sqr();
    let inner = p1[grid.inner()].norm_sqr();
    Energies {
        e1: 2.0 * PI * (grid.integrate(&gradient) + outer),
        e2: 2.0 * PI * grid.a * inner,
        e3: 2.0 * PI * grid.integrate(&kinetic),
    }
}

/// Energies of the real field generated by the stored modes and their partners.
pub fn field_energies(grid: &RadialGrid, modes: &[ModalField]) -> Energies {
    let mut total = Energies::default();
    for m in modes {
        let c = if m.n == 0 { 1.0 } else { 2.0 };
        total.add_scaled(&mode_energies(grid, m), c);
    }
    total
}
