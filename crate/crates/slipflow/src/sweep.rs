//! Parameter sweeps of the Lyapunov coefficient and bisection of its sign
//! change in the (alpha, b) plane.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bifurcation::{classify, degeneracy_tolerance, leading_eigenpair, lyapunov_coeff, solve_g11};
use crate::critical::mu_c_closed;
use crate::domain::{validate, DomainParams};
use crate::error::{Error, Result};
use crate::spectral::build_grid;

/// `count` evenly spaced samples of [min, max] (just `min` when count = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl SampleRange {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.max } else { self.min + step * i as f64 }).collect()
    }

    fn check(&self, name: &str) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidSpec(format!("{name} range is empty")));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min <= self.max) {
            return Err(Error::InvalidSpec(format!("{name} range [{}, {}] is not an interval", self.min, self.max)));
        }
        Ok(())
    }
}

fn default_offset() -> f64 {
    -1e-4
}
fn default_n() -> usize {
    48
}
fn default_ntheta() -> usize {
    32
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub a: f64,
    pub alpha: SampleRange,
    pub b: SampleRange,
    /// l is evaluated at mu = mu_c (1 + mu_offset).
    #[serde(default = "default_offset")]
    pub mu_offset: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_ntheta")]
    pub ntheta: usize,
}

impl SweepSpec {
    pub fn new(a: f64, alpha: SampleRange, b: SampleRange) -> Self {
        Self { a, alpha, b, mu_offset: default_offset(), n: default_n(), ntheta: default_ntheta() }
    }

    pub fn validate(&self) -> Result<()> {
        self.alpha.check("alpha")?;
        self.b.check("b")?;
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::InvalidSpec(format!("inner radius must be positive, got {}", self.a)));
        }
        if self.b.min <= self.a {
            return Err(Error::InvalidSpec(format!("b range must lie above a = {}", self.a)));
        }
        if self.alpha.min <= 0.0 {
            return Err(Error::InvalidSpec("alpha range must be positive".into()));
        }
        if !(self.mu_offset.abs() < 1e-2) {
            return Err(Error::InvalidSpec(format!("|mu_offset| must be below 1e-2, got {}", self.mu_offset)));
        }
        if self.n < 8 {
            return Err(Error::InvalidSpec(format!("N = {} is too coarse", self.n)));
        }
        Ok(())
    }

    /// Grid points in canonical order: alpha outer, b inner.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let bs = self.b.values();
        self.alpha.values().into_iter().flat_map(|al| bs.iter().map(move |&b| (al, b))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub b: f64,
    pub mu_c: f64,
    pub lambda1: f64,
    pub l: f64,
    pub class: String,
    /// "ok" or the error message for this point.
    pub status: String,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn failed(alpha: f64, b: f64, mu_c: f64, e: &Error) -> Self {
        Self {
            alpha,
            b,
            mu_c,
            lambda1: f64::NAN,
            l: f64::NAN,
            class: "none".into(),
            status: e.to_string().replace([',', '\n'], ";"),
        }
    }
}

/// lambda1 and l at mu = mu_c (1 + mu_offset) for one geometry.
pub fn evaluate_point(a: f64, alpha: f64, b: f64, mu_offset: f64, n: usize) -> SweepRow {
    let params = DomainParams::new(a, b, alpha, 1.0);
    let mu_c = mu_c_closed(&params);
    let run = || -> Result<SweepRow> {
        let mu = mu_c * (1.0 + mu_offset);
        let params = validate(params.with_mu(mu))?;
        let grid = build_grid(a, b, n)?;
        let eig = leading_eigenpair(&params, mu, &grid)?;
        let mc = solve_g11(&params, mu, eig.lambda1, &eig.psi1, &grid)?;
        let l = lyapunov_coeff(&params, mu, &eig, &mc, &grid)?.l;
        let class = classify(l, degeneracy_tolerance(&params)).as_str().to_string();
        Ok(SweepRow { alpha, b, mu_c, lambda1: eig.lambda1, l, class, status: "ok".into() })
    };
    run().unwrap_or_else(|e| SweepRow::failed(alpha, b, mu_c, &e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

pub const SWEEP_HEADER: &str = "alpha,b,mu_c,lambda1,l,class,status";

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(SWEEP_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!("{:e},{:e},{:e},{:e},{:e},{},{}\n", r.alpha, r.b, r.mu_c, r.lambda1, r.l, r.class, r.status));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(SWEEP_HEADER) {
            return Err(Error::InvalidSpec("sweep table header mismatch".into()));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::InvalidSpec(format!("bad number {s:?}")));
        let rows = lines
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                let f: Vec<&str> = line.splitn(7, ',').collect();
                if f.len() != 7 {
                    return Err(Error::InvalidSpec(format!("bad sweep row {line:?}")));
                }
                Ok(SweepRow {
                    alpha: num(f[0])?,
                    b: num(f[1])?,
                    mu_c: num(f[2])?,
                    lambda1: num(f[3])?,
                    l: num(f[4])?,
                    class: f[5].to_string(),
                    status: f[6].to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows })
    }

    pub fn count_class(&self, class: &str) -> usize {
        self.rows.iter().filter(|r| r.is_ok() && r.class == class).count()
    }
}

/// Evaluates every grid point of the sweep spec in parallel; rows come back in
/// canonical order and failures stay in-row.
pub fn sweep_l(spec: &SweepSpec) -> Result<SweepTable> {
    sweep_l_resume(spec, None)
}

/// Like [`sweep_l`], reusing successful rows of `previous` whose (alpha, b)
/// match a grid point exactly.
pub fn sweep_l_resume(spec: &SweepSpec, previous: Option<&SweepTable>) -> Result<SweepTable> {
    spec.validate()?;
    let reuse = |al: f64, b: f64| {
        previous.and_then(|t| t.rows.iter().find(|r| r.is_ok() && r.alpha == al && r.b == b).cloned())
    };
    let rows = spec
        .points()
        .into_par_iter()
        .map(|(al, b)| reuse(al, b).unwrap_or_else(|| evaluate_point(spec.a, al, b, spec.mu_offset, spec.n)))
        .collect();
    Ok(SweepTable { rows })
}

/// Bisects a sign change of f on [lo, hi] down to width `tol`, at most
/// `max_iter` halvings. None when f has the same sign at both ends.
pub fn bisect_sign_change(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Option<(f64, f64)>> {
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo.signum() == fhi.signum() || flo == 0.0 || fhi == 0.0 {
        if flo == 0.0 {
            return Ok(Some((lo, lo)));
        }
        if fhi == 0.0 {
            return Ok(Some((hi, hi)));
        }
        return Ok(None);
    }
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(Some((mid, mid)));
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(Some((lo, hi)))
}

pub const BOUNDARY_TOL: f64 = 1e-4;
pub const BOUNDARY_MAX_ITER: usize = 40;
/// Offset on either side of b* used to confirm a boundary point.
pub const BOUNDARY_CHECK: f64 = 2e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub alpha: f64,
    pub b_star: f64,
    pub b_lo: f64,
    pub b_hi: f64,
    pub l_minus: f64,
    pub l_plus: f64,
    /// sign(l(b* - 2e-4)) != sign(l(b* + 2e-4)).
    pub verified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum BoundaryOutcome {
    Flip(BoundaryPoint),
    NoFlip { alpha: f64, l_lo: f64, l_hi: f64 },
}

fn l_at(spec: &SweepSpec, alpha: f64, b: f64) -> Result<f64> {
    let row = evaluate_point(spec.a, alpha, b, spec.mu_offset, spec.n);
    if row.is_ok() {
        Ok(row.l)
    } else {
        Err(Error::SolverFailure(format!("alpha = {alpha}, b = {b}: {}", row.status)))
    }
}

/// Locates b* in the b interval of the sweep spec where l changes sign at fixed alpha.
pub fn boundary_bisect(spec: &SweepSpec, alpha: f64) -> Result<BoundaryOutcome> {
    spec.validate()?;
    let (lo, hi) = (spec.b.min, spec.b.max);
    match bisect_sign_change(|b| l_at(spec, alpha, b), lo, hi, BOUNDARY_TOL, BOUNDARY_MAX_ITER)? {
        None => Ok(BoundaryOutcome::NoFlip { alpha, l_lo: l_at(spec, alpha, lo)?, l_hi: l_at(spec, alpha, hi)? }),
        Some((b_lo, b_hi)) => {
            let b_star = 0.5 * (b_lo + b_hi);
            let bm = (b_star - BOUNDARY_CHECK).max(spec.a + 1e-12);
            let l_minus = l_at(spec, alpha, bm)?;
            let l_plus = l_at(spec, alpha, b_star + BOUNDARY_CHECK)?;
            let verified = l_minus.signum() != l_plus.signum();
            Ok(BoundaryOutcome::Flip(BoundaryPoint { alpha, b_star, b_lo, b_hi, l_minus, l_plus, verified }))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryCurve {
    /// Verified sign-change points.
    pub points: Vec<BoundaryPoint>,
    /// Alphas where no sign change was found in the b interval.
    pub no_flip: Vec<f64>,
    /// Bracketed points that failed the +-2e-4 check.
    pub rejected: Vec<BoundaryPoint>,
}

/// Runs [`boundary_bisect`] for each alpha sample of the sweep spec, in parallel.
pub fn boundary_curve(spec: &SweepSpec) -> Result<BoundaryCurve> {
    spec.validate()?;
    let outcomes =
        spec.alpha.values().into_par_iter().map(|al| boundary_bisect(spec, al)).collect::<Result<Vec<_>>>()?;
    let mut curve = BoundaryCurve { points: vec![], no_flip: vec![], rejected: vec![] };
    for o in outcomes {
        match o {
            BoundaryOutcome::Flip(p) if p.verified => curve.points.push(p),
            BoundaryOutcome::Flip(p) => curve.rejected.push(p),
            BoundaryOutcome::NoFlip { alpha, .. } => curve.no_flip.push(alpha),
        }
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_samples() {
        assert_eq!(SampleRange::new(5.0, 15.0, 3).values(), vec![5.0, 10.0, 15.0]);
        assert_eq!(SampleRange::new(2.0, 9.0, 1).values(), vec![2.0]);
    }

    #[test]
    fn spec_validation() {
        let ok = SweepSpec::new(1.0, SampleRange::new(5.0, 15.0, 2), SampleRange::new(5.0, 15.0, 2));
        assert!(ok.validate().is_ok());
        let empty = SweepSpec { alpha: SampleRange::new(5.0, 15.0, 0), ..ok };
        assert!(matches!(empty.validate(), Err(Error::InvalidSpec(_))));
        let big = SweepSpec { mu_offset: 0.02, ..ok };
        assert!(matches!(big.validate(), Err(Error::InvalidSpec(_))));
        let inverted = SweepSpec { b: SampleRange::new(9.0, 6.0, 2), ..ok };
        assert!(inverted.validate().is_err());
        assert_eq!(ok.points(), vec![(5.0, 5.0), (5.0, 15.0), (15.0, 5.0), (15.0, 15.0)]);
    }

    #[test]
    fn bisection_brackets_root() {
        let (lo, hi) = bisect_sign_change(|x| Ok(x - 7.3), 5.0, 15.0, 1e-4, 40).unwrap().unwrap();
        assert!(hi - lo <= 1e-4 && lo <= 7.3 && 7.3 <= hi);
        assert!(bisect_sign_change(|x| Ok(x + 1.0), 5.0, 15.0, 1e-4, 40).unwrap().is_none());
        // iteration cap wins over a tolerance that cannot be met
        let (lo, hi) = bisect_sign_change(|x| Ok(x - 7.3), 5.0, 15.0, 0.0, 3).unwrap().unwrap();
        assert!((hi - lo - 1.25).abs() < 1e-12);
    }

    #[test]
    fn csv_roundtrip() {
        let t = SweepTable {
            rows: vec![
                SweepRow {
                    alpha: 5.0,
                    b: 3.0,
                    mu_c: 1.3403712354824624,
                    lambda1: 6.6e-4,
                    l: -0.1246734,
                    class: "supercritical".into(),
                    status: "ok".into(),
                },
                SweepRow::failed(1.0, 2.0, 0.5, &Error::TooCoarse(4)),
            ],
        };
        let back = SweepTable::from_csv(&t.to_csv()).unwrap();
        assert_eq!(back.rows[0], t.rows[0]);
        assert!(back.rows[1].l.is_nan() && !back.rows[1].is_ok());
        assert_eq!(back.to_csv(), t.to_csv());
    }
}
