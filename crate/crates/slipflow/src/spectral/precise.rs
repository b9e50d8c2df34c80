//! Double-double (about 32 digit) assembly of the collocation operators.
//!
//! The f64 operators are rounded from these, and the kernel checks run here:
//! a fourth-order collocation operator at N = 64 amplifies f64 rounding in
//! the samples by roughly N^8, which hides the discretization error.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use nalgebra::DMatrix;

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub const PI_DD: Dd = Dd { hi: std::f64::consts::PI, lo: 1.2246467991473532e-16 };
pub const LN2_DD: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.3190468138462996e-17 };

pub fn dd(x: f64) -> Dd {
    Dd { hi: x, lo: 0.0 }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    /// Exact difference of two doubles.
    pub fn diff(a: f64, b: f64) -> Dd {
        let (s, e) = two_sum(a, -b);
        quick_two_sum(s, e)
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let r = quick_two_sum(s, e + t);
        quick_two_sum(r.hi, r.lo + f)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        quick_two_sum(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * dd(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * dd(q2);
        let q3 = r.hi / b.hi;
        quick_two_sum(q1, q2) + dd(q3)
    }
}

impl AddAssign for Dd {
    fn add_assign(&mut self, b: Dd) {
        *self = *self + b;
    }
}

impl SubAssign for Dd {
    fn sub_assign(&mut self, b: Dd) {
        *self = *self - b;
    }
}

impl MulAssign for Dd {
    fn mul_assign(&mut self, b: Dd) {
        *self = *self * b;
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

/// exp in double-double: argument reduction by ln 2, halving, Taylor, squaring.
pub fn exp_dd(x: Dd) -> Dd {
    let k = (x.hi / LN2_DD.hi).round();
    let r = x - LN2_DD * dd(k);
    let halvings = 4;
    let r = r * dd(0.5f64.powi(halvings));
    let mut term = dd(1.0);
    let mut sum = dd(1.0);
    for j in 1..=24 {
        term = term * r / dd(j as f64);
        sum += term;
    }
    for _ in 0..halvings {
        sum = sum * sum;
    }
    sum * dd(2f64.powi(k as i32))
}

/// Natural log in double-double: f64 seed, two Newton steps on exp(y) = x.
pub fn ln_dd(x: Dd) -> Dd {
    let mut y = dd(x.hi.ln());
    for _ in 0..2 {
        y = y + x * exp_dd(-y) - dd(1.0);
    }
    y
}

/// sin by its Taylor series, for |x| <= pi/2.
pub fn sin_dd(x: Dd) -> Dd {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 1.0;
    while term.hi.abs() > 1e-36 {
        term = -(term * x2) / dd((k + 1.0) * (k + 2.0));
        sum += term;
        k += 2.0;
    }
    sum
}

/// Dense row-major double-double matrix.
#[derive(Debug, Clone)]
pub struct DdMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Dd>,
}

impl DdMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![dd(0.0); rows * cols] }
    }

    pub fn get(&self, i: usize, j: usize) -> Dd {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Dd) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Dd] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matmul(&self, other: &DdMatrix) -> DdMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = DdMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let aik = self.data[i * self.cols + k];
                if aik.hi == 0.0 {
                    continue;
                }
                for (o, &bkj) in orow.iter_mut().zip(other.row(k)) {
                    *o += aik * bkj;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Dd]) -> Vec<Dd> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(dd(0.0), |s, (&m, &x)| s + m * x))
            .collect()
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_f64())
    }
}

/// b - m x accumulated in double-double, rounded once.
pub fn residual_dd(m: &DMatrix<f64>, x: &[f64], b: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| {
            let mut acc = dd(b[i]);
            for (j, &xj) in x.iter().enumerate() {
                acc -= dd(m[(i, j)]) * dd(xj);
            }
            acc.to_f64()
        })
        .collect()
}

/// Chebyshev collocation grid on [a, b] held in double-double.
#[derive(Debug, Clone)]
pub struct PreciseGrid {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    /// r_0 = b down to r_N = a.
    pub nodes: Vec<Dd>,
    pub d1: DdMatrix,
    pub d2: DdMatrix,
}

impl PreciseGrid {
    pub fn new(a: f64, b: f64, n: usize) -> Self {
        let nn = n as f64;
        // x_j = cos(pi j / N) written as a sine for symmetric accuracy
        let mut x = vec![dd(0.0); n + 1];
        for j in 0..=n / 2 {
            let v = if 2 * j == n { dd(0.0) } else { sin_dd(PI_DD * dd((n - 2 * j) as f64) / dd(2.0 * nn)) };
            x[j] = v;
            x[n - j] = -v;
        }
        x[0] = dd(1.0);
        x[n] = dd(-1.0);
        let half = Dd::diff(b, a) * dd(0.5);
        let nodes: Vec<Dd> = x.iter().map(|&xi| dd(a) + half * (xi + dd(1.0))).collect();

        let c = |i: usize| {
            let s = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
            if i == 0 || i == n { 2.0 * s } else { s }
        };
        let scale = dd(1.0) / half;
        let mut d1 = DdMatrix::zeros(n + 1, n + 1);
        for i in 0..=n {
            let mut diag = dd(0.0);
            for j in 0..=n {
                if i != j {
                    let v = dd(c(i) / c(j)) / (x[i] - x[j]) * scale;
                    d1.set(i, j, v);
                    diag -= v;
                }
            }
            d1.set(i, i, diag);
        }
        let d2 = d1.matmul(&d1);
        Self { a, b, n, nodes, d1, d2 }
    }

    pub fn size(&self) -> usize {
        self.n + 1
    }

    /// d^2/dr^2 + (1/r) d/dr - n^2/r^2
    pub fn laplacian(&self, mode: i32) -> DdMatrix {
        let mut l = self.d2.clone();
        let k2 = dd((mode as f64) * (mode as f64));
        for i in 0..self.size() {
            let inv_r = dd(1.0) / self.nodes[i];
            for j in 0..self.size() {
                let v = l.get(i, j) + inv_r * self.d1.get(i, j);
                l.set(i, j, v);
            }
            let v = l.get(i, i) - k2 * inv_r * inv_r;
            l.set(i, i, v);
        }
        l
    }

    pub fn bilaplacian(&self, mode: i32) -> DdMatrix {
        let l = self.laplacian(mode);
        l.matmul(&l)
    }

    /// Samples f at the nodes.
    pub fn sample(&self, f: impl Fn(Dd) -> Dd) -> Vec<Dd> {
        self.nodes.iter().map(|&r| f(r)).collect()
    }
}
