//! `dissiprop` — reproducible runs of the dissipative-propagator numerics.
//!
//! Every subcommand resolves its parameters from defaults, an optional
//! JSON config file and command-line flags (flags win), prints a JSON
//! summary on stdout, and tags every CSV artifact with a hash of the
//! resolved configuration. Errors leave machine-parsable JSON on stderr:
//! `{code, message, context}` with exit code 2 for invalid configuration
//! and 3 for numerical failures; `verify` exits 4 when a criterion fails.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
    pub context: Value,
}

impl CliError {
    pub fn invalid_config(message: String) -> Self {
        CliError {
            code: 2,
            message,
            context: Value::Null,
        }
    }

    pub fn from_core(error: dissiprop::Error) -> Self {
        use dissiprop::Error as E;
        let code = match &error {
            E::InvalidInput(_) | E::Parse(_) => 2,
            E::Divergence { .. }
            | E::Nonconvergence { .. }
            | E::DegenerateKernel(_)
            | E::Resolution(_)
            | E::Aliasing { .. }
            | E::QuadratureFailure { .. } => 3,
        };
        CliError {
            code,
            message: error.to_string(),
            context: Value::Null,
        }
    }

    fn with_command(mut self, command: &str) -> Self {
        self.context = json!({ "command": command });
        self
    }
}

impl From<dissiprop::Error> for CliError {
    fn from(error: dissiprop::Error) -> Self {
        CliError::from_core(error)
    }
}

#[derive(Parser)]
#[command(
    name = "dissiprop",
    about = "Quantum propagators for damped dynamics, from the equations of motion alone",
    version
)]
struct Cli {
    /// JSON config file; command-line flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form dissipative action, its quadrature cross-check and
    /// quadratic-form coefficients
    Action(commands::ActionArgs),
    /// Amplitude table over an endpoint grid (CSV: q0,q1,re,im)
    Propagator(commands::PropagatorArgs),
    /// Chapman-Kolmogorov composition residual of the kernel
    Cktest(commands::CktestArgs),
    /// Time-sliced path-integral convergence report (CSV: N,S_N,abs_err,ratio)
    Lattice(commands::LatticeArgs),
    /// Stokes residuals and closedness defect for a phase-space surface
    Surface(commands::SurfaceArgs),
    /// Evolve a Gaussian packet and report norm/center/width per step
    Evolve(commands::EvolveArgs),
    /// Run the full acceptance suite (exit 4 on any failure)
    Verify(commands::VerifyArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!(
                "{}",
                json!({
                    "code": 2,
                    "message": e.to_string().trim_end(),
                    "context": { "kind": format!("{:?}", e.kind()) },
                })
            );
            return ExitCode::from(2);
        }
    };
    let (name, result) = match &cli.command {
        Command::Action(args) => ("action", commands::run_action(cli.config.as_deref(), args)),
        Command::Propagator(args) => (
            "propagator",
            commands::run_propagator(cli.config.as_deref(), args),
        ),
        Command::Cktest(args) => ("cktest", commands::run_cktest(cli.config.as_deref(), args)),
        Command::Lattice(args) => (
            "lattice",
            commands::run_lattice(cli.config.as_deref(), args),
        ),
        Command::Surface(args) => (
            "surface",
            commands::run_surface(cli.config.as_deref(), args),
        ),
        Command::Evolve(args) => ("evolve", commands::run_evolve(cli.config.as_deref(), args)),
        Command::Verify(args) => ("verify", commands::run_verify(cli.config.as_deref(), args)),
    };
    match result {
        Ok(exit) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&exit.summary).expect("summary serializes")
            );
            ExitCode::from(exit.code)
        }
        Err(error) => {
            let error = error.with_command(name);
            eprintln!(
                "{}",
                json!({
                    "code": error.code,
                    "message": error.message,
                    "context": error.context,
                })
            );
            ExitCode::from(error.code)
        }
    }
}
