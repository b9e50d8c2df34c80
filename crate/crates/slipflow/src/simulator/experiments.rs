use num_complex::Complex64;
use serde::Serialize;

use super::stepper::{SimConfig, Simulator};
use crate::bifurcation::{leading_eigenpair, EigenResult};
use crate::domain::DomainParams;
use crate::energy::mode_energies;
use crate::error::{Error, Result};
use crate::spectral::RadialGrid;

/// Least-squares slope of ln(norm) against t over the samples with
/// lo < norm < hi. None if fewer than three samples fall in the window.
pub fn fit_growth_rate(samples: &[(f64, f64)], lo: f64, hi: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        samples.iter().filter(|(_, v)| *v > lo && *v < hi).map(|&(t, v)| (t, v.ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let (mt, my) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t / n, b + y / n));
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, y) in &pts {
        sxy += (t - mt) * (y - my);
        sxx += (t - mt) * (t - mt);
    }
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// Ordinary least-squares slope of y against x.
pub fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Eigenfunction rescaled so the initial velocity field has unit L^2 norm.
pub fn unit_velocity_mode(eig: &EigenResult, grid: &RadialGrid) -> EigenResult {
    let e3 = 2.0 * mode_energies(grid, &eig.psi1).e3;
    eig.rescaled(Complex64::new(1.0 / e3.sqrt(), 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscapeRow {
    pub delta: f64,
    pub t_escape: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeResult {
    pub rows: Vec<EscapeRow>,
    /// Fitted slope of T_delta against ln(1/delta).
    pub slope: f64,
    pub lambda1: f64,
    pub threshold: f64,
}

impl EscapeResult {
    /// |slope * lambda1 - 1|.
    pub fn slope_error(&self) -> f64 {
        (self.slope * self.lambda1 - 1.0).abs()
    }
}

/// First time the velocity norm reaches `threshold`, starting from
/// delta * v0 rotated by `phase`. Crossings are interpolated linearly in ln norm.
pub fn escape_time(
    sim: &Simulator,
    v0: &EigenResult,
    delta: f64,
    phase: f64,
    threshold: f64,
    t_max: f64,
) -> Result<f64> {
    // v0 has unit norm, so the start is already past the threshold
    if delta >= threshold {
        return Ok(0.0);
    }
    let mut state = sim.init_from_mode(v0, delta)?.rotated(phase);
    let mut prev = (state.t, state.velocity_norm());
    while state.t < t_max {
        state = sim.step(&state)?;
        let cur = (state.t, state.velocity_norm());
        if cur.1 >= threshold {
            let (l0, l1, lt) = (prev.1.ln(), cur.1.ln(), threshold.ln());
            return Ok(prev.0 + (cur.0 - prev.0) * (lt - l0) / (l1 - l0));
        }
        prev = cur;
    }
    Err(Error::NoEscape { delta, threshold, t_max })
}

/// Escape times for each delta from the unit-norm leading mode at `mu`,
/// plus the slope of T_delta against ln(1/delta).
pub fn escape_experiment(
    params: &DomainParams,
    mu: f64,
    deltas: &[f64],
    grid: &RadialGrid,
    config: SimConfig,
    threshold: f64,
    t_max: f64,
) -> Result<EscapeResult> {
    let p = params.with_mu(mu);
    let eig = leading_eigenpair(&p, mu, grid)?;
    if eig.lambda1 <= 0.0 {
        return Err(Error::InvalidPhysics(format!("no growing mode at mu = {mu}: lambda1 = {}", eig.lambda1)));
    }
    let sim = Simulator::new(p, grid.clone(), config)?;
    let v0 = unit_velocity_mode(&eig, grid);
    let rows = deltas
        .iter()
        .map(|&delta| Ok(EscapeRow { delta, t_escape: escape_time(&sim, &v0, delta, 0.0, threshold, t_max)? }))
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = rows.iter().map(|r| (1.0 / r.delta).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.t_escape).collect();
    let slope = if rows.len() >= 2 { linear_slope(&x, &y) } else { f64::NAN };
    Ok(EscapeResult { rows, slope, lambda1: eig.lambda1, threshold })
}

/// Linear growth rate of mode `n` with advection switched off, fitted on
/// ln ||v|| over `t_end` time units.
pub fn linear_growth_rate(sim: &Simulator, init: &EigenResult, delta: f64, t_end: f64) -> Result<f64> {
    let mut state = sim.init_from_mode(init, delta)?;
    let mut samples = vec![(state.t, state.velocity_norm())];
    let steps = (t_end / sim.config.dt).round() as usize;
    for _ in 0..steps {
        state = sim.step(&state)?;
        samples.push((state.t, state.velocity_norm()));
    }
    fit_growth_rate(&samples, 0.0, f64::INFINITY)
        .ok_or_else(|| Error::SolverFailure("not enough samples to fit a growth rate".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationRun {
    pub delta: f64,
    /// Mean max|psi| over the final tenth of the run.
    pub plateau: f64,
    /// Relative spread of max|psi| over that window.
    pub drift: f64,
    /// Fitted growth rate in the window 1e-8 < ||v|| < 1e-3 * saturated norm.
    pub growth_rate: Option<f64>,
    pub trace: Vec<(f64, f64, f64)>,
}

/// Runs from delta * v0 until `t_end`, recording (t, ||v||, max|psi|).
pub fn saturation_run(sim: &Simulator, v0: &EigenResult, delta: f64, t_end: f64) -> Result<SaturationRun> {
    let mut state = sim.init_from_mode(v0, delta)?;
    let mut trace = vec![(0.0, state.velocity_norm(), state.latest().max_psi)];
    let steps = (t_end / sim.config.dt).round() as usize;
    for _ in 0..steps {
        state = sim.step(&state)?;
        let d = state.latest();
        trace.push((d.t, d.velocity_norm(), d.max_psi));
    }
    let tail = &trace[trace.len() - trace.len() / 10 - 1..];
    let plateau = tail.iter().map(|x| x.2).sum::<f64>() / tail.len() as f64;
    let (lo, hi) = tail.iter().fold((f64::INFINITY, 0.0f64), |(l, h), x| (l.min(x.2), h.max(x.2)));
    let saturated = tail.last().map(|x| x.1).unwrap_or(0.0);
    let samples: Vec<(f64, f64)> = trace.iter().map(|x| (x.0, x.1)).collect();
    let growth_rate = fit_growth_rate(&samples, 1e-8, 1e-3 * saturated);
    Ok(SaturationRun { delta, plateau, drift: (hi - lo) / plateau, growth_rate, trace })
}
