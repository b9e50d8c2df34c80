//! Output directory handling, manifests and field dumps.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use slipflow::domain::{thetas, FlowFields};

use crate::CliError;

pub const OUT_DIR_ENV: &str = "SLIPFLOW_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "slipflow-out";

/// Explicit flag, then the environment variable, then ./slipflow-out.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Collects the files written by one command so the manifest can list them.
pub struct Output {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

impl Output {
    pub fn create(dir: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self { dir, files: vec![] })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn text(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let p = self.path(name);
        fs::write(&p, contents).map_err(|e| CliError::io(&p, e))?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::internal(e.to_string()))?;
        s.push('\n');
        self.text(name, &s)
    }

    /// `<command>_manifest.json` with inputs, resolution and the file list.
    /// No timestamps, so reruns reproduce it byte for byte.
    pub fn manifest(&mut self, command: &str, inputs: Value, resolution: Value) -> Result<Value, CliError> {
        let name = manifest_name(command);
        let mut files = self.files.clone();
        files.push(name.clone());
        let m = json!({
            "tool": "slipflow",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "inputs": inputs,
            "resolution": resolution,
            "outputs": files,
        });
        self.json(&name, &m)?;
        Ok(m)
    }
}

pub fn manifest_name(command: &str) -> String {
    format!("{}_manifest.json", command.replace('-', "_"))
}

pub fn read_json(path: &Path) -> Option<Value> {
    fs::read_to_string(path).ok().and_then(|s| serde_json::from_str(&s).ok())
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with columns r, theta, psi, v_r, v_theta, r as the outer index.
pub fn field_csv(radii: &[f64], flow: &FlowFields) -> Result<String, CliError> {
    let th = thetas(flow.psi.ntheta);
    let mut w = csv::Writer::from_writer(vec![]);
    let err = |e: csv::Error| CliError::internal(e.to_string());
    w.write_record(["r", "theta", "psi", "v_r", "v_theta"]).map_err(err)?;
    for (i, &r) in radii.iter().enumerate() {
        for (j, &t) in th.iter().enumerate() {
            w.write_record([num(r), num(t), num(flow.psi.get(i, j)), num(flow.v_r.get(i, j)), num(flow.v_theta.get(i, j))])
                .map_err(err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::internal(e.to_string()))
}

/// CSV from a header and rows of numbers.
pub fn numeric_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(vec![]);
    let err = |e: csv::Error| CliError::internal(e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row.iter().map(|x| num(*x))).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::internal(e.to_string()))
}
