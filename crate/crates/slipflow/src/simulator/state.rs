use std::collections::VecDeque;

use num_complex::Complex64;
use serde::Serialize;

use crate::domain::ModalField;
use crate::energy::Energies;

/// Per-step scalar diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub t: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    /// max |psi| over the lattice.
    pub max_psi: f64,
    /// d ln ||v|| / dt over the last step (0 before the first step).
    pub growth_rate: f64,
    /// Kinetic energy carried by each mode pair n = 1..M.
    pub mode_energies: Vec<f64>,
}

impl Diagnostics {
    pub fn energies(&self) -> Energies {
        Energies { e1: self.e1, e2: self.e2, e3: self.e3 }
    }

    pub fn velocity_norm(&self) -> f64 {
        self.e3.max(0.0).sqrt()
    }

    pub fn csv_header(modes: usize) -> String {
        let mut h = String::from("t,E3,E1,E2,max_psi");
        for n in 1..=modes {
            h.push_str(&format!(",E3_mode{n}"));
        }
        h
    }

    pub fn csv_row(&self) -> String {
        let mut s = format!("{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", self.t, self.e3, self.e1, self.e2, self.max_psi);
        for e in &self.mode_energies {
            s.push_str(&format!(",{e:.16e}"));
        }
        s
    }
}

/// Snapshot of the simulation: streamfunction modes n = 1..M, their
/// vorticities, the previous explicit term and recent diagnostics.
#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub step: u64,
    pub psi_modes: Vec<ModalField>,
    pub omega_modes: Vec<ModalField>,
    /// Nonlinear term of the previous step, for Adams-Bashforth.
    pub prev_nonlinear: Option<Vec<Vec<Complex64>>>,
    pub history: VecDeque<Diagnostics>,
}

impl SimState {
    pub fn latest(&self) -> &Diagnostics {
        self.history.back().expect("state without diagnostics")
    }

    pub fn velocity_norm(&self) -> f64 {
        self.latest().velocity_norm()
    }

    /// Rigid rotation: the physical fields become f(r, theta + phi).
    pub fn rotated(&self, phi: f64) -> SimState {
        let rot = |ms: &Vec<ModalField>| ms.iter().map(|m| m.rotated(phi)).collect::<Vec<_>>();
        let prev = self.prev_nonlinear.as_ref().map(|p| {
            p.iter()
                .enumerate()
                .map(|(k, v)| {
                    let c = Complex64::from_polar(1.0, (k + 1) as f64 * phi);
                    v.iter().map(|x| x * c).collect()
                })
                .collect()
        });
        SimState {
            t: self.t,
            step: self.step,
            psi_modes: rot(&self.psi_modes),
            omega_modes: rot(&self.omega_modes),
            prev_nonlinear: prev,
            history: self.history.clone(),
        }
    }

    /// Largest coefficient difference over all modes.
    pub fn max_mode_diff(&self, other: &SimState) -> f64 {
        self.psi_modes
            .iter()
            .zip(&other.psi_modes)
            .flat_map(|(a, b)| a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }

    pub fn max_coefficient(&self) -> f64 {
        self.psi_modes.iter().map(|m| m.max_abs()).fold(0.0, f64::max)
    }
}
