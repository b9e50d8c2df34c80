use std::collections::VecDeque;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::{Diagnostics, SimState};
use crate::bifurcation::{interaction_from_parts, EigenResult};
use crate::domain::{check_len, synthesize_physical, velocity_modes, DomainParams, ModalField};
use crate::energy::{field_energies, mode_energies};
use crate::error::{Error, Result};
use crate::spectral::{
    apply_real, bilaplacian_n, laplacian_n, BoundaryConditionSet, BvpSolver, RadialGrid,
};

/// Time-stepping controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    /// Angular lattice size; modes n = 1..ntheta/2 are evolved.
    pub ntheta: usize,
    /// Include the advection term.
    pub nonlinear: bool,
    /// Diagnostics kept in the ring buffer.
    pub history_len: usize,
    /// Largest admissible Courant number.
    pub cfl_limit: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { dt: 0.01, ntheta: 32, nonlinear: true, history_len: 64, cfl_limit: 0.5 }
    }
}

/// Crank-Nicolson / Adams-Bashforth stepper for
/// d/dt Delta_n psi_n = mu Delta_n^2 psi_n + sum_{p+q=n} G(psi_p, psi_q),
/// solved for psi_n with the wall rows substituted.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub params: DomainParams,
    pub grid: RadialGrid,
    pub config: SimConfig,
    /// Highest stored mode M = ntheta / 2.
    pub modes: usize,
    /// Highest mode receiving the advection term (2/3 rule).
    pub cutoff: usize,
    lap: Vec<DMatrix<f64>>,
    explicit: Vec<DMatrix<f64>>,
    solvers: Vec<BvpSolver>,
    pub bcs: BoundaryConditionSet,
}

impl Simulator {
    pub fn new(params: DomainParams, grid: RadialGrid, config: SimConfig) -> Result<Self> {
        if !(config.dt.is_finite() && config.dt > 0.0) {
            return Err(Error::InvalidPhysics(format!("time step must be positive, got {}", config.dt)));
        }
        if config.ntheta < 4 {
            return Err(Error::InvalidPhysics(format!("ntheta must be at least 4, got {}", config.ntheta)));
        }
        let modes = config.ntheta / 2;
        let cutoff = 2 * modes / 3;
        let bcs = BoundaryConditionSet::slip(&grid, params.alpha, params.mu);
        let half = 0.5 * config.dt * params.mu;
        let mut lap = Vec::with_capacity(modes);
        let mut explicit = Vec::with_capacity(modes);
        let mut solvers = Vec::with_capacity(modes);
        for n in 1..=modes as i32 {
            let l = laplacian_n(&grid, n).matrix;
            let b = bilaplacian_n(&grid, n).matrix;
            let lhs = &l - &b * half;
            solvers.push(BvpSolver::new(&lhs, &bcs).map_err(|e| Error::SolverFailure(format!("mode {n}: {e}")))?);
            explicit.push(&l + &b * half);
            lap.push(l);
        }
        Ok(Self { params, grid, config, modes, cutoff, lap, explicit, solvers, bcs })
    }

    fn zero_modes(&self) -> Vec<ModalField> {
        (1..=self.modes as i32).map(|n| ModalField::zeros(n, self.grid.size())).collect()
    }

    /// State from explicit streamfunction modes (n in 1..=M, others ignored).
    pub fn state_from_modes(&self, given: &[ModalField]) -> Result<SimState> {
        let mut psi = self.zero_modes();
        for m in given {
            check_len(self.grid.size(), m.len())?;
            if m.n >= 1 && (m.n as usize) <= self.modes {
                psi[m.n as usize - 1] = m.add(&psi[m.n as usize - 1])?;
            }
        }
        let omega = self.vorticity(&psi);
        let diag = self.diagnostics(0.0, &psi, None);
        let mut history = VecDeque::with_capacity(self.config.history_len);
        history.push_back(diag);
        Ok(SimState { t: 0.0, step: 0, psi_modes: psi, omega_modes: omega, prev_nonlinear: None, history })
    }

    /// delta times the eigenfunction in its own mode, all other modes zero.
    pub fn init_from_mode(&self, eig: &EigenResult, delta: f64) -> Result<SimState> {
        self.state_from_modes(&[eig.psi1.scaled(Complex64::new(delta, 0.0))])
    }

    pub fn zero_state(&self) -> SimState {
        self.state_from_modes(&[]).expect("zero state")
    }

    fn vorticity(&self, psi: &[ModalField]) -> Vec<ModalField> {
        psi.iter().zip(&self.lap).map(|(m, l)| ModalField::new(m.n, apply_real(l, &m.values))).collect()
    }

    pub fn diagnostics(&self, t: f64, psi: &[ModalField], prev: Option<&Diagnostics>) -> Diagnostics {
        let e = field_energies(&self.grid, psi);
        let mode_energies = psi.iter().map(|m| 2.0 * mode_energies(&self.grid, m).e3).collect();
        let max_psi = synthesize_physical(psi, self.config.ntheta).map(|f| f.max_abs()).unwrap_or(f64::NAN);
        let growth_rate = match prev {
            Some(p) if p.e3 > 0.0 && e.e3 > 0.0 && t > p.t => 0.5 * (e.e3 / p.e3).ln() / (t - p.t),
            _ => 0.0,
        };
        Diagnostics { t, e1: e.e1, e2: e.e2, e3: e.e3, max_psi, growth_rate, mode_energies }
    }

    /// Courant number dt * max(|v_r| / dr_i + |v_theta| / (r_i dtheta)) over the lattice.
    pub fn courant(&self, psi: &[ModalField]) -> Result<f64> {
        let (vr, vt) = velocity_modes(&self.grid, psi)?;
        let nt = self.config.ntheta;
        let fr = synthesize_physical(&vr, nt)?;
        let ft = synthesize_physical(&vt, nt)?;
        let dtheta = 2.0 * PI / nt as f64;
        let mut worst = 0.0f64;
        for i in 0..self.grid.size() {
            let dr = self.grid.local_spacing(i);
            let r = self.grid.nodes[i];
            for j in 0..nt {
                worst = worst.max(fr.get(i, j).abs() / dr + ft.get(i, j).abs() / (r * dtheta));
            }
        }
        Ok(worst * self.config.dt)
    }

    /// Advection term for modes 1..=cutoff (zero above), by direct summation
    /// over mode pairs p + q = n with p, q in [-M, M] \ {0}.
    pub fn nonlinear_term(&self, psi: &[ModalField]) -> Vec<Vec<Complex64>> {
        let size = self.grid.size();
        let m = self.modes as i32;
        struct Parts {
            f: Vec<Complex64>,
            df: Vec<Complex64>,
            lap: Vec<Complex64>,
            dlap: Vec<Complex64>,
        }
        let conj = |v: &Vec<Complex64>| v.iter().map(|x| x.conj()).collect::<Vec<_>>();
        let mut pos = Vec::with_capacity(self.modes);
        for (k, mode) in psi.iter().enumerate() {
            if mode.max_abs() == 0.0 {
                pos.push(None);
                continue;
            }
            let lap = apply_real(&self.lap[k], &mode.values);
            pos.push(Some(Parts {
                f: mode.values.clone(),
                df: apply_real(&self.grid.d1, &mode.values),
                dlap: apply_real(&self.grid.d1, &lap),
                lap,
            }));
        }
        let neg: Vec<Option<Parts>> = pos
            .iter()
            .map(|p| {
                p.as_ref().map(|p| Parts { f: conj(&p.f), df: conj(&p.df), lap: conj(&p.lap), dlap: conj(&p.dlap) })
            })
            .collect();
        let get = |p: i32| -> Option<&Parts> {
            if p > 0 {
                pos[p as usize - 1].as_ref()
            } else {
                neg[(-p) as usize - 1].as_ref()
            }
        };
        let mut out = vec![vec![Complex64::new(0.0, 0.0); size]; self.modes];
        for n in 1..=self.cutoff as i32 {
            let acc = &mut out[n as usize - 1];
            for p in -m..=m {
                let q = n - p;
                if p == 0 || q == 0 || q.abs() > m {
                    continue;
                }
                let (Some(fp), Some(gq)) = (get(p), get(q)) else { continue };
                let term = interaction_from_parts(&self.grid, p, &fp.f, &fp.df, q, &gq.lap, &gq.dlap);
                for (a, t) in acc.iter_mut().zip(&term.values) {
                    *a += t;
                }
            }
        }
        out
    }

    /// One step: Crank-Nicolson for mu Delta^2, Adams-Bashforth 2 (Euler on
    /// the first step) for advection, wall rows imposed on every mode.
    pub fn step(&self, state: &SimState) -> Result<SimState> {
        let dt = self.config.dt;
        // the advective limit only matters when advection is on
        if self.config.nonlinear {
            let courant = self.courant(&state.psi_modes)?;
            if courant > self.config.cfl_limit {
                return Err(Error::CflViolation { courant, limit: self.config.cfl_limit });
            }
        }
        let nl = if self.config.nonlinear { Some(self.nonlinear_term(&state.psi_modes)) } else { None };
        let mut psi = Vec::with_capacity(self.modes);
        for (k, mode) in state.psi_modes.iter().enumerate() {
            let mut rhs = apply_real(&self.explicit[k], &mode.values);
            if let Some(nl) = &nl {
                match &state.prev_nonlinear {
                    Some(prev) => {
                        for ((r, a), b) in rhs.iter_mut().zip(&nl[k]).zip(&prev[k]) {
                            *r += (a * 1.5 - b * 0.5) * dt;
                        }
                    }
                    None => {
                        for (r, a) in rhs.iter_mut().zip(&nl[k]) {
                            *r += a * dt;
                        }
                    }
                }
            }
            let values = self.solvers[k].solve_unrefined(&rhs);
            if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                return Err(Error::SolverFailure(format!("non-finite values in mode {}", k + 1)));
            }
            psi.push(ModalField::new(mode.n, values));
        }
        let t = state.t + dt;
        let omega = self.vorticity(&psi);
        let diag = self.diagnostics(t, &psi, state.history.back());
        let mut history = state.history.clone();
        if history.len() >= self.config.history_len.max(1) {
            history.pop_front();
        }
        history.push_back(diag);
        Ok(SimState { t, step: state.step + 1, psi_modes: psi, omega_modes: omega, prev_nonlinear: nl, history })
    }

    /// Advances `steps` times, calling `observe` after every step.
    pub fn run(&self, state: SimState, steps: usize, mut observe: impl FnMut(&SimState)) -> Result<SimState> {
        let mut s = state;
        for _ in 0..steps {
            s = self.step(&s)?;
            observe(&s);
        }
        Ok(s)
    }
}

/// Relative mismatch between the discrete energy change and the average of
/// -mu E1 + (alpha - mu/a) E2 at the two ends of the step.
pub fn energy_residual(before: &SimState, after: &SimState, dt: f64, params: &DomainParams) -> f64 {
    let (e0, e1) = (before.latest().energies(), after.latest().energies());
    let lhs = 0.5 * (e1.e3 - e0.e3) / dt;
    let rhs = 0.5 * (e0.dissipation_balance(params) + e1.dissipation_balance(params));
    let diff = (lhs - rhs).abs();
    if diff == 0.0 {
        return 0.0;
    }
    diff / (rhs.abs() + f64::MIN_POSITIVE)
}
