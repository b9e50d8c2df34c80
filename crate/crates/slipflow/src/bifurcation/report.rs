use num_complex::Complex64;
use serde::Serialize;

use super::eigen::{leading_eigenpair, EigenResult};
use super::manifold::{lyapunov_coeff, solve_g11, LyapunovCoeff, ManifoldCoeffs};
use crate::domain::{synthesize_physical, DomainParams, FlowFields, ModalField, PhysicalField};
use crate::error::{Error, Result};
use crate::spectral::RadialGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Supercritical,
    Subcritical,
    Degenerate,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Supercritical => "supercritical",
            Classification::Subcritical => "subcritical",
            Classification::Degenerate => "degenerate",
        }
    }
}

/// Sign of lambda1: unstable (mu < mu_c) or stable (mu > mu_c) side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    BelowCritical,
    AboveCritical,
}

/// Dead zone for the sign of l: 1e-10 a alpha / (b - a)^4.
pub fn degeneracy_tolerance(params: &DomainParams) -> f64 {
    1e-10 * params.a * params.alpha / (params.b - params.a).powi(4)
}

pub fn classify(l: f64, tol: f64) -> Classification {
    if l < -tol {
        Classification::Supercritical
    } else if l > tol {
        Classification::Subcritical
    } else {
        Classification::Degenerate
    }
}

/// Pitchfork summary at one viscosity, with the data to build the
/// bifurcated states psi_s = s Psi1 e^{i theta} + s^2 G11 e^{2 i theta} + c.c.
#[derive(Debug, Clone)]
pub struct BifurcationReport {
    pub mu: f64,
    pub lambda1: f64,
    pub l: f64,
    pub classification: Classification,
    pub side: Side,
    /// sqrt(-lambda1 / l) when lambda1 and l have opposite signs.
    pub amplitude: Option<f64>,
    pub note: String,
    pub psi1: ModalField,
    pub g11: ModalField,
}

impl BifurcationReport {
    /// Modal content of the state with complex amplitude s.
    pub fn state_modes(&self, s: Complex64) -> Vec<ModalField> {
        vec![self.psi1.scaled(s), self.g11.scaled(s * s)]
    }

    /// Complex amplitude |s| e^{i phase}, if a branch exists at this mu.
    pub fn amplitude_at(&self, phase: f64) -> Option<Complex64> {
        self.amplitude.map(|m| Complex64::from_polar(m, phase))
    }

    /// Streamfunction of the bifurcated state at the given phase.
    pub fn psi_s(&self, phase: f64, ntheta: usize) -> Option<Result<PhysicalField>> {
        self.amplitude_at(phase).map(|s| synthesize_physical(&self.state_modes(s), ntheta))
    }

    /// Streamfunction and velocity of the bifurcated state at the given phase.
    pub fn flow(&self, grid: &RadialGrid, phase: f64, ntheta: usize) -> Option<Result<FlowFields>> {
        self.amplitude_at(phase).map(|s| FlowFields::from_modes(grid, &self.state_modes(s), ntheta))
    }
}

/// Classifies by the sign of l and, on the side where the branch exists,
/// fixes the amplitude |s| = sqrt(-lambda1 / l).
pub fn classify_and_build(
    params: &DomainParams,
    mu: f64,
    eig: &EigenResult,
    mc: &ManifoldCoeffs,
    l: f64,
) -> Result<BifurcationReport> {
    if !(eig.lambda1.is_finite() && l.is_finite()) {
        return Err(Error::SolverFailure("non-finite lambda1 or l".into()));
    }
    let tol = degeneracy_tolerance(params);
    let classification = classify(l, tol);
    if classification == Classification::Degenerate {
        return Err(Error::DegenerateCoefficient { l, tol });
    }
    let lambda1 = eig.lambda1;
    let side = if lambda1 > 0.0 { Side::BelowCritical } else { Side::AboveCritical };
    let amplitude = if lambda1 * l < 0.0 { Some((-lambda1 / l).sqrt()) } else { None };
    let note = match (classification, side, amplitude.is_some()) {
        (Classification::Supercritical, Side::BelowCritical, _) => {
            "supercritical: stable ring of steady states for mu < mu_c".to_string()
        }
        (Classification::Supercritical, Side::AboveCritical, _) => {
            "supercritical with mu > mu_c: no bifurcated states on this side".to_string()
        }
        (Classification::Subcritical, Side::AboveCritical, _) => {
            "subcritical: unstable ring of steady states for mu > mu_c".to_string()
        }
        _ => "subcritical with mu < mu_c: no bifurcated states on this side".to_string(),
    };
    Ok(BifurcationReport {
        mu,
        lambda1,
        l,
        classification,
        side,
        amplitude,
        note,
        psi1: eig.psi1.clone(),
        g11: mc.g11.clone(),
    })
}

/// Everything computed at one viscosity.
#[derive(Debug, Clone)]
pub struct BifurcationAnalysis {
    pub eig: EigenResult,
    pub manifold: ManifoldCoeffs,
    pub lyapunov: LyapunovCoeff,
    pub report: BifurcationReport,
}

/// Eigenpair, G11, l and the report in one call.
pub fn analyze_bifurcation(params: &DomainParams, mu: f64, grid: &RadialGrid) -> Result<BifurcationAnalysis> {
    let eig = leading_eigenpair(params, mu, grid)?;
    let manifold = solve_g11(params, mu, eig.lambda1, &eig.psi1, grid)?;
    let lyapunov = lyapunov_coeff(params, mu, &eig, &manifold, grid)?;
    let report = classify_and_build(params, mu, &eig, &manifold, lyapunov.l)?;
    Ok(BifurcationAnalysis { eig, manifold, lyapunov, report })
}
