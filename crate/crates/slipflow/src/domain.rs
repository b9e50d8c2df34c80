//! Parameter records and the modal / physical field representations.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::RadialGrid;

/// Geometry and physics of the annulus a < r < b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainParams {
    pub a: f64,
    pub b: f64,
    /// Slip coefficient on the inner wall.
    pub alpha: f64,
    /// Kinematic viscosity.
    pub mu: f64,
}

impl DomainParams {
    pub fn new(a: f64, b: f64, alpha: f64, mu: f64) -> Self {
        Self { a, b, alpha, mu }
    }

    /// Radius ratio b/a.
    pub fn sigma(&self) -> f64 {
        self.b / self.a
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        Self { mu, ..*self }
    }
}

/// Checks the parameter record and returns it unchanged when valid.
pub fn validate(params: DomainParams) -> Result<DomainParams> {
    let DomainParams { a, b, alpha, mu } = params;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidGeometry(format!("non-finite radii a={a}, b={b}")));
    }
    if a <= 0.0 {
        return Err(Error::InvalidGeometry(format!("inner radius must be positive, got a={a}")));
    }
    if a >= b {
        return Err(Error::InvalidGeometry(format!("need a < b, got a={a}, b={b}")));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidPhysics(format!("slip coefficient must be positive, got {alpha}")));
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidPhysics(format!("viscosity must be positive, got {mu}")));
    }
    Ok(params)
}

/// Complex radial profile attached to the angular factor e^{i n theta}.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalField {
    pub n: i32,
    pub values: Vec<Complex64>,
}

impl ModalField {
    pub fn new(n: i32, values: Vec<Complex64>) -> Self {
        Self { n, values }
    }

    pub fn zeros(n: i32, len: usize) -> Self {
        Self { n, values: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub fn from_real(n: i32, values: &[f64]) -> Self {
        Self { n, values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { n: self.n, values: self.values.iter().map(|v| v * c).collect() }
    }

    /// The partner mode -n carrying the conjugate profile.
    pub fn conj_partner(&self) -> Self {
        Self { n: -self.n, values: self.values.iter().map(|v| v.conj()).collect() }
    }

    /// Rotation by phi: the physical field becomes psi(r, theta + phi).
    pub fn rotated(&self, phi: f64) -> Self {
        self.scaled(Complex64::from_polar(1.0, self.n as f64 * phi))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn add(&self, other: &ModalField) -> Result<ModalField> {
        if self.n != other.n {
            return Err(Error::ModeMismatch(self.n, other.n));
        }
        check_len(self.len(), other.len())?;
        Ok(Self {
            n: self.n,
            values: self.values.iter().zip(&other.values).map(|(x, y)| x + y).collect(),
        })
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::GridMismatch { expected, found });
    }
    Ok(())
}

/// Real samples on the (r_i, theta_j) lattice, stored with r as the outer index.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    pub nr: usize,
    pub ntheta: usize,
    pub values: Vec<f64>,
}

impl PhysicalField {
    pub fn zeros(nr: usize, ntheta: usize) -> Self {
        Self { nr, ntheta, values: vec![0.0; nr * ntheta] }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ntheta + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.ntheta..(i + 1) * self.ntheta]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Largest pointwise difference to another field of the same shape.
    pub fn max_diff(&self, other: &PhysicalField) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    /// Mean over theta at radius index i.
    pub fn angular_mean(&self, i: usize) -> f64 {
        self.row(i).iter().sum::<f64>() / self.ntheta as f64
    }
}

/// Angles theta_j = 2 pi j / ntheta.
pub fn thetas(ntheta: usize) -> Vec<f64> {
    (0..ntheta).map(|j| 2.0 * PI * j as f64 / ntheta as f64).collect()
}

/// Sums the conjugate-symmetric mode set on the polar lattice.
///
/// Each stored mode n != 0 contributes its conjugate partner as well, so a
/// mode set lists every wavenumber once. Negative n are folded onto |n|.
pub fn synthesize_physical(modes: &[ModalField], ntheta: usize) -> Result<PhysicalField> {
    let nr = match modes.first() {
        Some(m) => m.len(),
        None => return Ok(PhysicalField::zeros(0, ntheta)),
    };
    for m in modes {
        check_len(nr, m.len())?;
    }
    let mut field = PhysicalField::zeros(nr, ntheta);
    if ntheta == 0 {
        return Ok(field);
    }
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(ntheta);
    let nt = ntheta as i64;
    let mut buf = vec![Complex64::new(0.0, 0.0); ntheta];
    for i in 0..nr {
        buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for m in modes {
            let (n, c) = if m.n < 0 { (-m.n as i64, m.values[i].conj()) } else { (m.n as i64, m.values[i]) };
            if n == 0 {
                buf[0] += Complex64::new(c.re, 0.0);
            } else {
                buf[n.rem_euclid(nt) as usize] += c;
                buf[(-n).rem_euclid(nt) as usize] += c.conj();
            }
        }
        fft.process(&mut buf);
        for (j, c) in buf.iter().enumerate() {
            field.values[i * ntheta + j] = c.re;
        }
    }
    Ok(field)
}

/// Angular Fourier coefficients for n = 1..=max_n at every radius.
pub fn analyze(field: &PhysicalField, max_n: usize) -> Vec<ModalField> {
    let ntheta = field.ntheta;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(ntheta);
    let mut modes: Vec<ModalField> = (1..=max_n).map(|n| ModalField::zeros(n as i32, field.nr)).collect();
    let mut buf = vec![Complex64::new(0.0, 0.0); ntheta];
    for i in 0..field.nr {
        for (b, &v) in buf.iter_mut().zip(field.row(i)) {
            *b = Complex64::new(v, 0.0);
        }
        fft.process(&mut buf);
        for (k, m) in modes.iter_mut().enumerate() {
            m.values[i] = buf[(k + 1) % ntheta] / ntheta as f64;
        }
    }
    modes
}

/// Polar velocity components of a streamfunction mode set:
/// v_r = -(1/r) d/dtheta psi and v_theta = d/dr psi.
pub fn velocity_modes(grid: &RadialGrid, modes: &[ModalField]) -> Result<(Vec<ModalField>, Vec<ModalField>)> {
    let mut vr = Vec::with_capacity(modes.len());
    let mut vt = Vec::with_capacity(modes.len());
    for m in modes {
        check_len(grid.size(), m.len())?;
        let n = m.n as f64;
        vr.push(ModalField::new(
            m.n,
            m.values.iter().zip(&grid.nodes).map(|(p, &r)| Complex64::new(0.0, -n) * p / r).collect(),
        ));
        vt.push(grid.derivative(m));
    }
    Ok((vr, vt))
}

/// Streamfunction and polar velocity fields on the lattice.
#[derive(Debug, Clone)]
pub struct FlowFields {
    pub psi: PhysicalField,
    pub v_r: PhysicalField,
    pub v_theta: PhysicalField,
}

impl FlowFields {
    pub fn from_modes(grid: &RadialGrid, modes: &[ModalField], ntheta: usize) -> Result<Self> {
        let (vr, vt) = velocity_modes(grid, modes)?;
        Ok(Self {
            psi: synthesize_physical(modes, ntheta)?,
            v_r: synthesize_physical(&vr, ntheta)?,
            v_theta: synthesize_physical(&vt, ntheta)?,
        })
    }

    /// Cartesian components (v_1, v_2) at lattice point (i, j).
    pub fn cartesian(&self, i: usize, j: usize) -> (f64, f64) {
        let theta = 2.0 * PI * j as f64 / self.psi.ntheta as f64;
        let (s, c) = theta.sin_cos();
        let vr = self.v_r.get(i, j);
        let vt = self.v_theta.get(i, j);
        (vr * c - vt * s, vr * s + vt * c)
    }
}
