//! Simulation config files: flat TOML keys layered over a preset.

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One trajectory with diagnostics.
    Run,
    /// Escape times over a list of initial amplitudes.
    Escape,
}

/// Every key of a simulate config. See the README for meanings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub mode: Mode,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    /// Absolute viscosity; exclusive with mu_factor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Viscosity as a multiple of the critical value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_factor: Option<f64>,
    pub n: usize,
    pub ntheta: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Initial amplitude (run mode): velocity L2 norm of the seed mode.
    pub delta: f64,
    /// Angle the initial data is rotated by.
    pub phase: f64,
    pub nonlinear: bool,
    /// Field snapshot every this many steps; 0 writes only the final field.
    pub snapshot_every: usize,
    pub deltas: Vec<f64>,
    pub threshold: f64,
    pub t_max: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            preset: None,
            mode: Mode::Run,
            a: 1.0,
            b: 3.0,
            alpha: 5.0,
            mu: None,
            mu_factor: Some(0.99),
            n: 48,
            ntheta: 32,
            dt: 0.01,
            t_end: 10.0,
            delta: 1e-4,
            phase: 0.0,
            nonlinear: true,
            snapshot_every: 0,
            deltas: vec![1e-6, 1e-5, 1e-4],
            threshold: 1e-2,
            t_max: 200.0,
        }
    }
}

pub const PRESETS: [&str; 3] = ["stable", "supercritical", "escape"];

/// Base settings for a named preset.
pub fn preset(name: &str) -> Result<SimulateConfig, CliError> {
    let base = SimulateConfig { preset: Some(name.to_string()), ..Default::default() };
    match name {
        // small data at twice the critical viscosity: pure decay
        "stable" => Ok(SimulateConfig { mu_factor: Some(2.0), delta: 1e-6, t_end: 1.0, ..base }),
        // just below critical: growth then saturation on the ring of steady states
        "supercritical" => Ok(SimulateConfig { mu_factor: Some(0.99), delta: 1e-4, t_end: 200.0, ..base }),
        "escape" => Ok(SimulateConfig { mode: Mode::Escape, mu: Some(1.2), mu_factor: None, ..base }),
        other => Err(CliError::input(format!("unknown preset {other:?}; expected one of {PRESETS:?}"))),
    }
}

/// Overlays the keys of `text` on the preset named in the file (or in
/// `preset_flag`, or the defaults).
pub fn parse(text: &str, preset_flag: Option<&str>) -> Result<SimulateConfig, CliError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::input(e.message().to_string()))?;
    let named = table.get("preset").and_then(|v| v.as_str()).map(str::to_string);
    let base = match named.as_deref().or(preset_flag) {
        Some(p) => preset(p)?,
        None => SimulateConfig::default(),
    };
    let mut merged = toml::Table::try_from(&base).map_err(|e| CliError::internal(e.to_string()))?;
    // an explicit viscosity in the file replaces the preset's choice
    if table.contains_key("mu") || table.contains_key("mu_factor") {
        merged.remove("mu");
        merged.remove("mu_factor");
    }
    for (k, v) in table {
        merged.insert(k, v);
    }
    let cfg: SimulateConfig =
        toml::Value::Table(merged).try_into().map_err(|e: toml::de::Error| CliError::input(e.message().to_string()))?;
    cfg.check()?;
    Ok(cfg)
}

impl SimulateConfig {
    pub fn check(&self) -> Result<(), CliError> {
        match (self.mu, self.mu_factor) {
            (Some(_), Some(_)) => return Err(CliError::input("give either mu or mu_factor, not both")),
            (None, None) => return Err(CliError::input("one of mu or mu_factor is required")),
            _ => {}
        }
        if !(self.dt > 0.0 && self.t_end >= 0.0 && self.t_max > 0.0) {
            return Err(CliError::input("dt, t_end and t_max must be positive"));
        }
        if self.ntheta < 4 || !self.ntheta.is_multiple_of(2) {
            return Err(CliError::input(format!("ntheta must be even and >= 4, got {}", self.ntheta)));
        }
        if !(self.delta >= 0.0) || self.deltas.iter().any(|d| !(*d > 0.0)) {
            return Err(CliError::input("amplitudes must be nonnegative (deltas positive)"));
        }
        if self.mode == Mode::Escape && self.deltas.is_empty() {
            return Err(CliError::input("escape mode needs a nonempty deltas list"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for p in PRESETS {
            let cfg = parse(&format!("preset = \"{p}\""), None).unwrap();
            assert_eq!(cfg.preset.as_deref(), Some(p));
        }
        assert!(preset("bogus").is_err());
    }

    #[test]
    fn keys_override_preset() {
        let cfg = parse("dt = 0.005\nmu = 1.5", Some("stable")).unwrap();
        assert_eq!(cfg.dt, 0.005);
        assert_eq!(cfg.mu, Some(1.5));
        assert_eq!(cfg.mu_factor, None);
        assert_eq!(cfg.delta, 1e-6);
    }

    #[test]
    fn bad_files_rejected() {
        assert!(parse("unknown_key = 1", None).is_err());
        assert!(parse("dt = -1.0", None).is_err());
        assert!(parse("ntheta = 7", None).is_err());
        assert!(parse("dt = ", None).is_err());
    }
}
