use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use slipflow::bifurcation::{analyze_bifurcation, leading_eigenpair, Classification};
use slipflow::critical::{mu_c_closed, mu_c_oracle};
use slipflow::simulator::{
    energy_residual, escape_time, fit_growth_rate, linear_slope, unit_velocity_mode, Diagnostics, SimConfig,
    Simulator,
};
use slipflow::sweep::{boundary_curve, sweep_l_resume, SweepSpec, SweepTable};
use slipflow::{build_grid, validate, DomainParams, RadialGrid};

use crate::config::{self, Mode, SimulateConfig};
use crate::output::{field_csv, manifest_name, numeric_csv, read_json, Output};
use crate::svg::contour_svg;
use crate::CliError;

fn geometry(a: f64, b: f64, alpha: f64) -> Result<DomainParams, CliError> {
    // viscosity is supplied per command; 1 is a placeholder for validation
    Ok(validate(DomainParams::new(a, b, alpha, 1.0))?)
}

pub fn mu_c(dir: &Path, a: f64, b: f64, alpha: f64, oracle: bool) -> Result<Value, CliError> {
    let p = geometry(a, b, alpha)?;
    let closed = mu_c_closed(&p);
    let (oracle_value, discrepancy) = if oracle {
        let o = mu_c_oracle(&p)?;
        (Some(o), Some((o - closed).abs() / closed))
    } else {
        (None, None)
    };
    let result = json!({
        "a": a, "b": b, "alpha": alpha,
        "mu_c_closed": closed,
        "mu_c_oracle": oracle_value,
        "discrepancy": discrepancy,
    });
    let mut out = Output::create(dir.to_path_buf())?;
    out.json("mu_c.json", &result)?;
    out.manifest("mu-c", json!({"a": a, "b": b, "alpha": alpha, "oracle": oracle}), json!({}))?;
    Ok(result)
}

pub fn eigen(dir: &Path, a: f64, b: f64, alpha: f64, mu: f64, n: usize, profile: bool) -> Result<Value, CliError> {
    let p = validate(DomainParams::new(a, b, alpha, mu))?;
    let grid = build_grid(a, b, n)?;
    let eig = leading_eigenpair(&p, mu, &grid)?;
    let psi: Vec<f64> = eig.psi1.values.iter().map(|c| c.re).collect();
    let result = json!({
        "a": a, "b": b, "alpha": alpha, "mu": mu, "n": n,
        "mu_c": mu_c_closed(&p),
        "lambda1": eig.lambda1,
        "lambda1_raw": [eig.lambda1_raw.re, eig.lambda1_raw.im],
        "r": grid.nodes,
        "psi1": psi,
    });
    let mut out = Output::create(dir.to_path_buf())?;
    out.json("eigen.json", &result)?;
    if profile {
        let d = grid.derivative(&eig.psi1);
        let rows = (0..grid.size()).map(|i| vec![grid.nodes[i], psi[i], d.values[i].re]);
        out.text("eigen_profile.csv", &numeric_csv(&["r", "psi1", "dpsi1_dr"], rows)?)?;
    }
    out.manifest("eigen", json!({"a": a, "b": b, "alpha": alpha, "mu": mu, "profile": profile}), json!({"N": n}))?;
    Ok(result)
}

#[allow(clippy::too_many_arguments)]
pub fn bifurcate(
    dir: &Path,
    a: f64,
    b: f64,
    alpha: f64,
    mu: f64,
    phases: usize,
    n: usize,
    ntheta: usize,
) -> Result<Value, CliError> {
    if phases == 0 {
        return Err(CliError::input("--phases must be at least 1"));
    }
    if ntheta < 8 {
        return Err(CliError::input("--ntheta must be at least 8"));
    }
    let p = validate(DomainParams::new(a, b, alpha, mu))?;
    let grid = build_grid(a, b, n)?;
    let an = analyze_bifurcation(&p, mu, &grid)?;
    let rep = &an.report;
    let Some(amplitude) = rep.amplitude else {
        return Err(CliError::no_branch(format!(
            "no bifurcated states at mu = {mu} (lambda1 = {:.6e}, l = {:.6e}): {}",
            rep.lambda1, rep.l, rep.note
        )));
    };
    let mut out = Output::create(dir.to_path_buf())?;
    let mut fields = vec![];
    for j in 0..phases {
        let phase = 2.0 * PI * j as f64 / phases as f64;
        let flow = rep.flow(&grid, phase, ntheta).expect("branch exists")?;
        let (csv_name, svg_name) = (format!("field_{j}.csv"), format!("field_{j}.svg"));
        out.text(&csv_name, &field_csv(&grid.nodes, &flow)?)?;
        let title = format!("psi_s, mu = {mu}, phase = {phase:.6}");
        out.text(&svg_name, &contour_svg(&flow.psi, &grid.nodes, &title))?;
        fields.push(json!({"phase": phase, "csv": csv_name, "svg": svg_name, "max_abs_psi": flow.psi.max_abs()}));
    }
    let result = json!({
        "a": a, "b": b, "alpha": alpha, "mu": mu,
        "mu_c": mu_c_closed(&p),
        "lambda1": rep.lambda1,
        "l": rep.l,
        "l_plain": an.lyapunov.l_plain,
        "classification": rep.classification,
        "side": rep.side,
        "amplitude": amplitude,
        "note": rep.note,
        "fields": fields,
    });
    out.json("bifurcate.json", &result)?;
    out.manifest(
        "bifurcate",
        json!({"a": a, "b": b, "alpha": alpha, "mu": mu, "phases": phases}),
        json!({"N": n, "ntheta": ntheta}),
    )?;
    Ok(result)
}

struct Setup {
    params: DomainParams,
    mu_c: f64,
    grid: RadialGrid,
    sim_config: SimConfig,
}

fn setup(cfg: &SimulateConfig) -> Result<Setup, CliError> {
    let base = geometry(cfg.a, cfg.b, cfg.alpha)?;
    let mu_c = mu_c_closed(&base);
    let mu = cfg.mu.unwrap_or_else(|| cfg.mu_factor.unwrap_or(1.0) * mu_c);
    let params = validate(base.with_mu(mu))?;
    let grid = build_grid(cfg.a, cfg.b, cfg.n)?;
    let sim_config =
        SimConfig { dt: cfg.dt, ntheta: cfg.ntheta, nonlinear: cfg.nonlinear, ..SimConfig::default() };
    Ok(Setup { params, mu_c, grid, sim_config })
}

pub fn simulate(dir: &Path, path: Option<&Path>, preset: Option<&str>) -> Result<Value, CliError> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError { code: 2, ..CliError::io(p, e) })?,
        None if preset.is_some() => String::new(),
        None => return Err(CliError::input("simulate needs a config file or --preset")),
    };
    let cfg = config::parse(&text, preset)?;
    let s = setup(&cfg)?;
    let mut out = Output::create(dir.to_path_buf())?;
    let result = match cfg.mode {
        Mode::Run => run_trajectory(&cfg, &s, &mut out)?,
        Mode::Escape => run_escape(&cfg, &s, &mut out)?,
    };
    out.json("diagnostics.json", &result)?;
    let inputs = serde_json::to_value(&cfg).map_err(|e| CliError::internal(e.to_string()))?;
    out.manifest("simulate", inputs, json!({"N": cfg.n, "ntheta": cfg.ntheta, "dt": cfg.dt}))?;
    Ok(result)
}

fn run_trajectory(cfg: &SimulateConfig, s: &Setup, out: &mut Output) -> Result<Value, CliError> {
    let mu = s.params.mu;
    let eig = leading_eigenpair(&s.params, mu, &s.grid)?;
    // only a stable ring (supercritical, mu < mu_c) is an attractor to compare with
    let predicted = analyze_bifurcation(&s.params, mu, &s.grid)
        .ok()
        .filter(|an| an.report.classification == Classification::Supercritical && an.report.lambda1 > 0.0)
        .and_then(|an| an.report.psi_s(0.0, cfg.ntheta).and_then(|f| f.ok()))
        .map(|f| f.max_abs());
    let sim = Simulator::new(s.params, s.grid.clone(), s.sim_config)?;
    let v0 = unit_velocity_mode(&eig, &s.grid);
    let mut state = sim.init_from_mode(&v0, cfg.delta)?.rotated(cfg.phase);
    let steps = (cfg.t_end / cfg.dt).round() as usize;

    let mut traj = Diagnostics::csv_header(sim.modes);
    traj.push('\n');
    traj.push_str(&state.latest().csv_row());
    traj.push('\n');
    let mut samples = vec![(state.t, state.velocity_norm())];
    let mut plateau = vec![state.latest().max_psi];
    let (mut res_max, mut res_sum) = (0.0f64, 0.0);
    for k in 1..=steps {
        let next = sim.step(&state)?;
        let r = energy_residual(&state, &next, cfg.dt, &s.params);
        res_max = res_max.max(r);
        res_sum += r;
        state = next;
        let d = state.latest();
        traj.push_str(&d.csv_row());
        traj.push('\n');
        samples.push((d.t, d.velocity_norm()));
        plateau.push(d.max_psi);
        if cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0 {
            let flow = slipflow::domain::FlowFields::from_modes(&s.grid, &state.psi_modes, cfg.ntheta)?;
            out.text(&format!("snapshot_{k:06}.csv"), &field_csv(&s.grid.nodes, &flow)?)?;
        }
    }
    out.text("trajectory.csv", &traj)?;
    let flow = slipflow::domain::FlowFields::from_modes(&s.grid, &state.psi_modes, cfg.ntheta)?;
    out.text("final.csv", &field_csv(&s.grid.nodes, &flow)?)?;

    let first = samples[0].1;
    let last = samples.last().map(|x| x.1).unwrap_or(first);
    let peak = samples.iter().map(|x| x.1).fold(0.0, f64::max);
    // window 1e-8 < ||v|| < 1e-3 * saturated norm; no upper cut for decaying runs
    let hi = if last > first { 1e-3 * peak } else { f64::INFINITY };
    let growth_rate = fit_growth_rate(&samples, 1e-8, hi);
    let tail = &plateau[plateau.len() - plateau.len() / 10 - 1..];
    let sat = tail.iter().sum::<f64>() / tail.len() as f64;
    let spread = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - tail.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(json!({
        "mode": "run",
        "a": cfg.a, "b": cfg.b, "alpha": cfg.alpha,
        "mu": mu,
        "mu_c": s.mu_c,
        "lambda1": eig.lambda1,
        "steps": steps,
        "t_final": state.t,
        "growth_rate": growth_rate,
        "growth_rate_rel_error": growth_rate.map(|g| (g - eig.lambda1).abs() / eig.lambda1.abs()),
        "growth_window": [1e-8, if hi.is_finite() { Some(hi) } else { None }],
        "saturation_max_psi": sat,
        "saturation_drift": if sat > 0.0 { spread / sat } else { 0.0 },
        "predicted_max_psi": predicted,
        "prediction_rel_diff": predicted.map(|p| (sat - p).abs() / p),
        "energy_residual": {"max": res_max, "mean": if steps > 0 { res_sum / steps as f64 } else { 0.0 }},
        "final": state.latest(),
    }))
}

fn run_escape(cfg: &SimulateConfig, s: &Setup, out: &mut Output) -> Result<Value, CliError> {
    let mu = s.params.mu;
    let eig = leading_eigenpair(&s.params, mu, &s.grid)?;
    if eig.lambda1 <= 0.0 {
        return Err(CliError::input(format!("escape mode needs mu < mu_c (lambda1 = {:.6e})", eig.lambda1)));
    }
    let sim = Simulator::new(s.params, s.grid.clone(), s.sim_config)?;
    let v0 = unit_velocity_mode(&eig, &s.grid);
    let mut rows = vec![];
    for &delta in &cfg.deltas {
        let t = escape_time(&sim, &v0, delta, cfg.phase, cfg.threshold, cfg.t_max)?;
        rows.push(vec![delta, (1.0 / delta).ln(), t]);
    }
    out.text("escape.csv", &numeric_csv(&["delta", "ln_inv_delta", "t_escape"], rows.clone())?)?;
    let x: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let y: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let slope = if rows.len() >= 2 { Some(linear_slope(&x, &y)) } else { None };
    Ok(json!({
        "mode": "escape",
        "a": cfg.a, "b": cfg.b, "alpha": cfg.alpha,
        "mu": mu,
        "mu_c": s.mu_c,
        "lambda1": eig.lambda1,
        "threshold": cfg.threshold,
        "rows": rows.iter().map(|r| json!({"delta": r[0], "t_escape": r[2]})).collect::<Vec<_>>(),
        "slope": slope,
        "inverse_lambda1": 1.0 / eig.lambda1,
        "slope_rel_error": slope.map(|k| (k * eig.lambda1 - 1.0).abs()),
    }))
}

fn read_spec(path: &Path) -> Result<SweepSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError { code: 2, ..CliError::io(path, e) })?;
    let spec: SweepSpec = toml::from_str(&text).map_err(|e| CliError::input(e.message().to_string()))?;
    spec.validate()?;
    Ok(spec)
}

fn spec_json(spec: &SweepSpec) -> Result<Value, CliError> {
    serde_json::to_value(spec).map_err(|e| CliError::internal(e.to_string()))
}

pub fn sweep(dir: &Path, spec_path: &Path, resume: bool) -> Result<Value, CliError> {
    let spec = read_spec(spec_path)?;
    let inputs = spec_json(&spec)?;
    let mut out = Output::create(dir.to_path_buf())?;
    let previous = if resume {
        match read_json(&out.path(&manifest_name("sweep"))) {
            Some(m) if m["inputs"] != inputs => {
                return Err(CliError::input("existing sweep manifest was written for a different spec"));
            }
            Some(_) => fs::read_to_string(out.path("sweep.csv")).ok().and_then(|t| SweepTable::from_csv(&t).ok()),
            None => None,
        }
    } else {
        None
    };
    let table = sweep_l_resume(&spec, previous.as_ref())?;
    let reused = previous.map(|p| p.rows.iter().filter(|r| r.is_ok()).count()).unwrap_or(0);
    out.text("sweep.csv", &table.to_csv())?;
    out.manifest("sweep", inputs, json!({"N": spec.n, "ntheta": spec.ntheta}))?;
    let ok = table.rows.iter().filter(|r| r.is_ok()).count();
    Ok(json!({
        "rows": table.rows.len(),
        "ok": ok,
        "failed": table.rows.len() - ok,
        "reused": reused.min(ok),
        "supercritical": table.count_class("supercritical"),
        "subcritical": table.count_class("subcritical"),
        "degenerate": table.count_class("degenerate"),
        "csv": "sweep.csv",
    }))
}

pub fn boundary(dir: &Path, spec_path: &Path) -> Result<Value, CliError> {
    let spec = read_spec(spec_path)?;
    let curve = boundary_curve(&spec)?;
    let mut out = Output::create(dir.to_path_buf())?;
    let rows = curve.points.iter().map(|p| vec![p.alpha, p.b_star, p.b_lo, p.b_hi, p.l_minus, p.l_plus]);
    out.text("boundary.csv", &numeric_csv(&["alpha", "b_star", "b_lo", "b_hi", "l_minus", "l_plus"], rows)?)?;
    out.json("boundary.json", &curve)?;
    out.manifest("boundary", spec_json(&spec)?, json!({"N": spec.n, "ntheta": spec.ntheta}))?;
    Ok(json!({
        "points": curve.points.len(),
        "no_flip": curve.no_flip,
        "rejected": curve.rejected.len(),
        "csv": "boundary.csv",
    }))
}
