use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::precise::PreciseGrid;
use crate::domain::{check_len, ModalField};
use crate::error::{Error, Result};

/// Chebyshev-Lobatto collocation grid on [a, b] with differentiation
/// matrices and r-weighted Clenshaw-Curtis weights.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub a: f64,
    pub b: f64,
    /// Polynomial degree; the grid has N + 1 nodes.
    pub n: usize,
    /// r_0 = b > ... > r_N = a.
    pub nodes: Vec<f64>,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
    pub d3: DMatrix<f64>,
    pub d4: DMatrix<f64>,
    /// Weights for the integral of f(r) r dr over [a, b].
    pub weights: Vec<f64>,
    pub precise: PreciseGrid,
}

/// Builds the grid; the operators are assembled in double-double and rounded.
pub fn build_grid(a: f64, b: f64, n: usize) -> Result<RadialGrid> {
    if n < 8 {
        return Err(Error::TooCoarse(n));
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidGeometry(format!("need a < b, got a={a}, b={b}")));
    }
    let precise = PreciseGrid::new(a, b, n);
    let d3 = precise.d2.matmul(&precise.d1);
    let d4 = precise.d2.matmul(&precise.d2);
    let nodes: Vec<f64> = precise.nodes.iter().map(|r| r.to_f64()).collect();
    let cc = clenshaw_curtis(n);
    let half = 0.5 * (b - a);
    let weights = cc.iter().zip(&nodes).map(|(w, r)| w * half * r).collect();
    Ok(RadialGrid {
        a,
        b,
        n,
        nodes,
        d1: precise.d1.to_f64(),
        d2: precise.d2.to_f64(),
        d3: d3.to_f64(),
        d4: d4.to_f64(),
        weights,
        precise,
    })
}

/// Clenshaw-Curtis weights on x_j = cos(pi j / N) for the interval [-1, 1].
pub fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut w = vec![0.0; n + 1];
    let end = if n.is_multiple_of(2) { 1.0 / (nf * nf - 1.0) } else { 1.0 / (nf * nf) };
    w[0] = end;
    w[n] = end;
    for (j, wj) in w.iter_mut().enumerate().take(n).skip(1) {
        let theta = PI * j as f64 / nf;
        let mut v = 1.0;
        if n.is_multiple_of(2) {
            for k in 1..n / 2 {
                let kf = k as f64;
                v -= 2.0 * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
            v -= (nf * theta).cos() / (nf * nf - 1.0);
        } else {
            for k in 1..=(n - 1) / 2 {
                let kf = k as f64;
                v -= 2.0 * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        *wj = 2.0 * v / nf;
    }
    w
}

/// Real matrix times complex vector.
pub fn apply_real(m: &DMatrix<f64>, v: &[Complex64]) -> Vec<Complex64> {
    let n = m.nrows();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (j, x) in v.iter().enumerate() {
        if x.re == 0.0 && x.im == 0.0 {
            continue;
        }
        let col = m.column(j);
        for (o, &c) in out.iter_mut().zip(col.iter()) {
            *o += x * c;
        }
    }
    out
}

impl RadialGrid {
    pub fn size(&self) -> usize {
        self.n + 1
    }

    /// Index of the node r = a.
    pub fn inner(&self) -> usize {
        self.n
    }

    pub fn derivative(&self, f: &ModalField) -> ModalField {
        ModalField::new(f.n, apply_real(&self.d1, &f.values))
    }

    pub fn second_derivative(&self, f: &ModalField) -> ModalField {
        ModalField::new(f.n, apply_real(&self.d2, &f.values))
    }

    /// Delta_n applied to the profile using the mode number carried by f.
    pub fn apply_laplacian(&self, f: &ModalField) -> ModalField {
        let d1 = apply_real(&self.d1, &f.values);
        let d2 = apply_real(&self.d2, &f.values);
        let n2 = (f.n as f64).powi(2);
        let values = (0..self.size())
            .map(|i| {
                let r = self.nodes[i];
                d2[i] + d1[i] / r - f.values[i] * (n2 / (r * r))
            })
            .collect();
        ModalField::new(f.n, values)
    }

    /// Integral of f(r) r dr.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    pub fn integrate_complex(&self, f: &[Complex64]) -> Complex64 {
        self.weights.iter().zip(f).map(|(w, v)| v * w).sum()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&r| f(r)).collect()
    }

    /// Smallest radial node spacing.
    pub fn min_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min)
    }

    /// Local radial spacing at node i (smaller neighbouring gap).
    pub fn local_spacing(&self, i: usize) -> f64 {
        let left = if i > 0 { self.nodes[i - 1] - self.nodes[i] } else { f64::INFINITY };
        let right = if i < self.n { self.nodes[i] - self.nodes[i + 1] } else { f64::INFINITY };
        left.min(right)
    }
}

/// L^2 pairing 2 pi int f conj(g) r dr; zero when the wavenumbers differ.
pub fn inner_product(f: &ModalField, g: &ModalField, grid: &RadialGrid) -> Result<Complex64> {
    check_len(grid.size(), f.len())?;
    check_len(grid.size(), g.len())?;
    if f.n != g.n {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let s: Complex64 = f.values.iter().zip(&g.values).zip(&grid.weights).map(|((x, y), w)| x * y.conj() * w).sum();
    Ok(s * (2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_coarse_rejected() {
        assert!(matches!(build_grid(1.0, 3.0, 7), Err(Error::TooCoarse(7))));
        assert!(build_grid(1.0, 3.0, 8).is_ok());
    }

    #[test]
    fn derivative_examples() {
        let g = build_grid(1.0, 3.0, 32).unwrap();
        let r2 = g.sample(|r| r * r);
        let d = &g.d1 * nalgebra::DVector::from_vec(r2);
        for (i, &r) in g.nodes.iter().enumerate() {
            assert!((d[i] - 2.0 * r).abs() < 1e-10);
        }
        let ones = &g.d1 * nalgebra::DVector::from_element(g.size(), 1.0);
        assert!(ones.amax() < 1e-11);
        let lin = &g.d1 * nalgebra::DVector::from_vec(g.nodes.clone());
        assert!(lin.iter().all(|v| (v - 1.0).abs() < 1e-11));
    }

    #[test]
    fn quadrature_examples() {
        let g = build_grid(1.0, 3.0, 32).unwrap();
        assert!((g.integrate(&g.sample(|r| r)) - 26.0 / 3.0).abs() < 1e-11);
        let g = build_grid(1.0, 3.0, 64).unwrap();
        let exact = 4.5 * 3f64.ln() - 2.0;
        assert!((g.integrate(&g.sample(f64::ln)) - exact).abs() < 1e-10);
    }

    #[test]
    fn odd_degree_weights() {
        let w = clenshaw_curtis(9);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let g = build_grid(0.5, 2.0, 9).unwrap();
        // int r^3 r dr over [0.5, 2]
        let exact = (2f64.powi(5) - 0.5f64.powi(5)) / 5.0;
        assert!((g.integrate(&g.sample(|r| r.powi(3))) - exact).abs() < 1e-12);
    }

    #[test]
    fn inner_product_examples() {
        let g = build_grid(1.0, 3.0, 24).unwrap();
        let one = ModalField::from_real(1, &vec![1.0; g.size()]);
        let ip = inner_product(&one, &one, &g).unwrap();
        assert!((ip.re - 8.0 * PI).abs() < 1e-11 && ip.im.abs() < 1e-14);
        let two = ModalField::from_real(2, &vec![1.0; g.size()]);
        assert_eq!(inner_product(&one, &two, &g).unwrap(), Complex64::new(0.0, 0.0));
        // r against 1/r: int_1^3 r dr = 4
        let f = ModalField::from_real(1, &g.nodes);
        let h = ModalField::from_real(1, &g.sample(|r| 1.0 / r));
        assert!((inner_product(&f, &h, &g).unwrap().re - 8.0 * PI).abs() < 1e-11);
    }
}
