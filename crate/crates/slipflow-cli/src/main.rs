//! `slipflow` command-line front end.

mod commands;
mod config;
mod output;
mod svg;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

/// Exit codes: 0 ok, 1 I/O or internal, 2 input, 3 solver, 4 no bifurcated branch, 5 CFL.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: u8,
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        Self { code: 2, kind: "InvalidInput".into(), message: msg.into() }
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Self { code: 1, kind: "Internal".into(), message: msg.into() }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self { code: 1, kind: "Io".into(), message: format!("{}: {e}", path.display()) }
    }

    pub fn no_branch(msg: impl Into<String>) -> Self {
        Self { code: 4, kind: "NoBranch".into(), message: msg.into() }
    }
}

impl From<slipflow::Error> for CliError {
    fn from(e: slipflow::Error) -> Self {
        use slipflow::Error::*;
        let (code, kind) = match &e {
            InvalidGeometry(_) => (2, "InvalidGeometry"),
            InvalidPhysics(_) => (2, "InvalidPhysics"),
            TooCoarse(_) => (2, "TooCoarse"),
            GridMismatch { .. } => (2, "GridMismatch"),
            ModeMismatch(..) => (2, "ModeMismatch"),
            InvalidSpec(_) => (2, "InvalidSpec"),
            NoBracket { .. } => (3, "NoBracket"),
            SingularSystem(_) => (3, "SingularSystem"),
            EigSolverFailure(_) => (3, "EigSolverFailure"),
            SolverFailure(_) => (3, "SolverFailure"),
            NoEscape { .. } => (3, "NoEscape"),
            DegenerateCoefficient { .. } => (4, "DegenerateCoefficient"),
            CflViolation { .. } => (5, "CflViolation"),
        };
        Self { code, kind: kind.into(), message: e.to_string() }
    }
}

#[derive(Parser, Debug)]
#[command(name = "slipflow", version, about = "Critical viscosity, pitchfork analysis and simulation of slip-driven annular flow")]
struct Cli {
    /// Output directory (default: $SLIPFLOW_OUT_DIR, then ./slipflow-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Critical viscosity from the closed form (and the determinant root with --oracle).
    #[command(name = "mu-c")]
    MuC {
        a: f64,
        b: f64,
        alpha: f64,
        #[arg(long)]
        oracle: bool,
    },
    /// Leading eigenvalue and eigenfunction at one viscosity.
    Eigen {
        a: f64,
        b: f64,
        alpha: f64,
        mu: f64,
        #[arg(short = 'N', long = "resolution", default_value_t = 64)]
        n: usize,
        /// Also write the radial profile as CSV.
        #[arg(long)]
        profile: bool,
    },
    /// Lyapunov coefficient, classification and bifurcated fields.
    Bifurcate {
        a: f64,
        b: f64,
        alpha: f64,
        #[arg(long)]
        mu: f64,
        /// Number of equally spaced phases to dump.
        #[arg(long, default_value_t = 1)]
        phases: usize,
        #[arg(short = 'N', long = "resolution", default_value_t = 48)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        ntheta: usize,
    },
    /// Time integration from a config file (flat TOML keys).
    Simulate {
        config: Option<PathBuf>,
        /// Preset used as the base: stable, supercritical or escape.
        #[arg(long)]
        preset: Option<String>,
    },
    /// Lyapunov coefficient over an (alpha, b) grid.
    Sweep {
        spec: PathBuf,
        /// Reuse rows from an existing sweep with the same spec.
        #[arg(long)]
        resume: bool,
    },
    /// Bisection of the sign change of l in b for each alpha of a spec.
    Boundary { spec: PathBuf },
}

fn run(cli: Cli) -> Result<serde_json::Value, CliError> {
    let out = output::resolve_out_dir(cli.out);
    match cli.command {
        Command::MuC { a, b, alpha, oracle } => commands::mu_c(&out, a, b, alpha, oracle),
        Command::Eigen { a, b, alpha, mu, n, profile } => commands::eigen(&out, a, b, alpha, mu, n, profile),
        Command::Bifurcate { a, b, alpha, mu, phases, n, ntheta } => {
            commands::bifurcate(&out, a, b, alpha, mu, phases, n, ntheta)
        }
        Command::Simulate { config, preset } => commands::simulate(&out, config.as_deref(), preset.as_deref()),
        Command::Sweep { spec, resume } => commands::sweep(&out, &spec, resume),
        Command::Boundary { spec } => commands::boundary(&out, &spec),
    }
}

/// Prints to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = CliError::input(e.to_string().trim().to_string());
            emit(&json!({"error": err.kind, "message": err.message, "exit_code": err.code}).to_string());
            return ExitCode::from(err.code);
        }
    };
    match run(cli) {
        Ok(v) => {
            emit(&serde_json::to_string_pretty(&v).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(err) => {
            emit(&json!({"error": err.kind, "message": err.message, "exit_code": err.code}).to_string());
            eprintln!("slipflow: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
