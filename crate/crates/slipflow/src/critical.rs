//! Critical viscosity: closed form, determinant root, and the gamma_n constants.

use serde::Serialize;

use crate::domain::{DomainParams, ModalField};
use crate::error::{Error, Result};
use crate::spectral::precise::{dd, ln_dd, Dd};
use crate::spectral::{bilaplacian_n, solve_bvp, BcRow, BoundaryConditionSet, RadialGrid};

/// Summary of the critical-viscosity computations for one geometry.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalResult {
    pub mu_c_closed: f64,
    pub mu_c_oracle: f64,
    /// gamma_n for n = 1..=n_max.
    pub gamma: Vec<f64>,
    pub discrepancy: f64,
}

/// Below this value of ln(b/a) the closed form is summed as a series.
const SERIES_LIMIT: f64 = 0.5;

/// mu_c = a alpha (1 + 3 s^4 - 4 s^2 - 4 s^4 ln s) / (2 (s^4 - 1 - 4 s^4 ln s)), s = b/a.
///
/// Numerator and denominator both vanish to high order as s -> 1, so for
/// thin annuli both are expanded in x = ln s, where every term has one sign.
pub fn mu_c_closed(params: &DomainParams) -> f64 {
    let x = params.sigma().ln();
    let ratio = if x < SERIES_LIMIT {
        let (mut num, mut den) = (0.0, 0.0);
        // x^k 4^k / k! and x^k 2^k / k!
        let (mut p4, mut p2) = (1.0, 1.0);
        for k in 1..60 {
            let kf = k as f64;
            p4 *= 4.0 * x / kf;
            p2 *= 2.0 * x / kf;
            if k >= 2 {
                den += (1.0 - kf) * p4;
            }
            if k >= 3 {
                num += (3.0 - kf) * p4 - 4.0 * p2;
            }
        }
        num / den
    } else {
        let s = params.sigma();
        let s2 = s * s;
        let s4 = s2 * s2;
        (1.0 + 3.0 * s4 - 4.0 * s2 - 4.0 * s4 * x) / (s4 - 1.0 - 4.0 * s4 * x)
    };
    params.a * params.alpha * ratio / 2.0
}

/// Determinant of the 4x4 system for the coefficients of
/// Psi = c1 r + c2 r ln r + c3 / r + c4 r^3, in double-double.
pub fn det_condition_dd(params: &DomainParams, mu: f64) -> Dd {
    let (a, b) = (dd(params.a), dd(params.b));
    let (al, mu) = (dd(params.alpha), dd(mu));
    let (la, lb) = (ln_dd(a), ln_dd(b));
    let a2 = a * a;
    let a3 = a2 * a;
    let a4 = a2 * a2;
    let a5 = a4 * a;
    let b2 = b * b;
    let b4 = b2 * b2;
    let one = dd(1.0);
    let m = [
        [a2, a2 * la, one, a4],
        [b2, b2 * lb, one, b4],
        [b2, b2 * (dd(2.0) + lb), one, dd(9.0) * b4],
        [
            -a2 * mu + al * a3,
            a3 * al - a2 * mu * la + a3 * al * la,
            dd(3.0) * mu - a * al,
            dd(3.0) * a5 * al + dd(3.0) * a4 * mu,
        ],
    ];
    det4(m)
}

fn det4(mut m: [[Dd; 4]; 4]) -> Dd {
    let mut det = dd(1.0);
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[piv][col].hi == 0.0 {
            return dd(0.0);
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        det *= m[col][col];
        for i in col + 1..4 {
            let f = m[i][col] / m[col][col];
            for j in col..4 {
                let v = m[col][j];
                m[i][j] -= f * v;
            }
        }
    }
    det
}

/// The determinant rounded to f64; it vanishes exactly at the critical viscosity.
pub fn det_condition(params: &DomainParams, mu: f64) -> f64 {
    det_condition_dd(params, mu).to_f64()
}

fn sign(x: Dd) -> i8 {
    if x.hi > 0.0 {
        1
    } else if x.hi < 0.0 {
        -1
    } else {
        0
    }
}

/// Root of the determinant: bisection on (1e-6 a alpha, 10 a alpha) followed
/// by secant polishing. For very thin annuli the root lies below 1e-6 a alpha;
/// the lower end is then pushed down by decades, to 1e-18 a alpha at most.
pub fn mu_c_oracle(params: &DomainParams) -> Result<f64> {
    let scale = params.a * params.alpha;
    let hi = 10.0 * scale;
    let f_hi = det_condition_dd(params, hi);
    let mut lo = 1e-6 * scale;
    let mut f_lo = det_condition_dd(params, lo);
    while sign(f_lo) * sign(f_hi) > 0 && lo > 1e-18 * scale {
        lo *= 0.1;
        f_lo = det_condition_dd(params, lo);
    }
    if sign(f_lo) == 0 {
        return Ok(lo);
    }
    if sign(f_lo) * sign(f_hi) > 0 {
        return Err(Error::NoBracket { lo, hi });
    }
    let (mut lo, mut hi, mut f_lo) = (lo, hi, f_lo);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let f_mid = det_condition_dd(params, mid);
        if sign(f_mid) == 0 {
            return Ok(mid);
        }
        if sign(f_mid) == sign(f_lo) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let (mut x0, mut x1) = (lo, hi);
    let mut f0 = det_condition_dd(params, x0);
    let mut f1 = det_condition_dd(params, x1);
    for _ in 0..5 {
        let df = f1 - f0;
        if df.hi == 0.0 {
            break;
        }
        let x2 = (dd(x1) - f1 * (dd(x1) - dd(x0)) / df).hi;
        if !x2.is_finite() || x2 == x1 {
            break;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = det_condition_dd(params, x1);
    }
    Ok(x1)
}

/// Minimizer of int r (Delta_n Psi)^2 dr / Psi'(a)^2 over Psi(a) = Psi(b) = 0,
/// normalized by Psi'(a) = 1. It solves Delta_n^2 Psi = 0 with the natural
/// condition Delta_n Psi (b) = 0.
pub fn gamma_minimizer(n: i32, grid: &RadialGrid) -> Result<ModalField> {
    let len = grid.size();
    let last = grid.n;
    let unit = |k: usize| {
        let mut v = vec![0.0; len];
        v[k] = 1.0;
        v
    };
    let outer: Vec<f64> = (0..len).map(|j| grid.d2[(0, j)] + grid.d1[(0, j)] / grid.b).collect();
    let slope: Vec<f64> = (0..len).map(|j| grid.d1[(last, j)]).collect();
    let bcs = BoundaryConditionSet {
        rows: vec![
            BcRow { index: 0, coeffs: unit(0), value: 0.0 },
            BcRow { index: 1, coeffs: outer, value: 0.0 },
            BcRow { index: last - 1, coeffs: slope, value: 1.0 },
            BcRow { index: last, coeffs: unit(last), value: 0.0 },
        ],
    };
    solve_bvp(&bilaplacian_n(grid, n), &ModalField::zeros(n, len), &bcs)
        .map_err(|e| Error::EigSolverFailure(format!("gamma_{n}: {e}")))
}

/// Discrete quotient int r (Delta_n Psi)^2 dr / Psi'(a)^2 for a real profile.
pub fn gamma_quotient(psi: &ModalField, grid: &RadialGrid) -> f64 {
    let lap = grid.apply_laplacian(psi);
    let num = grid.integrate(&lap.values.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>());
    let slope = grid.derivative(psi).values[grid.inner()].norm_sqr();
    num / slope
}

/// gamma_n by its variational definition (requires n >= 1).
pub fn gamma_n(params: &DomainParams, n: i32, grid: &RadialGrid) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidPhysics(format!("gamma_n needs n >= 1, got {n}")));
    }
    debug_assert!((grid.a - params.a).abs() < 1e-14 && (grid.b - params.b).abs() < 1e-14);
    let psi = gamma_minimizer(n, grid)?;
    let g = gamma_quotient(&psi, grid);
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::EigSolverFailure(format!("gamma_{n} = {g}")));
    }
    Ok(g)
}

/// Closed form, determinant root, and gamma_1..gamma_{n_max}.
pub fn critical_analysis(params: &DomainParams, n_max: i32, grid: &RadialGrid) -> Result<CriticalResult> {
    let closed = mu_c_closed(params);
    let oracle = mu_c_oracle(params)?;
    let gamma = (1..=n_max).map(|n| gamma_n(params, n, grid)).collect::<Result<Vec<_>>>()?;
    Ok(CriticalResult { mu_c_closed: closed, mu_c_oracle: oracle, gamma, discrepancy: (closed - oracle).abs() / closed })
}
