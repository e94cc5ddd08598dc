#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::fmt;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Options;

#[derive(Debug, Parser)]
#[command(
    name = "weakgrad",
    version,
    about = "Power-law weights, A_p sweeps, p-modulus and weak gradients on the line"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    options: Options,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Build w_K; write the stage table and a summary
    Build,
    /// Sample w_K on the interval
    Eval,
    /// A_p ratios of w_K over the interval sweep, one CSV per p
    ApScan,
    /// Per-stage A_p growth audit, one CSV per p
    Audit,
    /// ∫ w_K^{-s} (or the log-corrected integral) on dyadic intervals
    Integrability,
    /// p-modulus of a curve family
    Modulus,
    /// Points and segments outside N_p
    NpClassify,
    /// p-weak gradient of a piecewise-linear function
    Gradient,
    /// Monte-Carlo check of the product-weight box bound
    McCheck,
}

/// A failed run and its exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Construction(String),
    Violation(String),
    NotConverged(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Construction(_) => 3,
            Failure::Violation(_) => 4,
            Failure::NotConverged(_) => 5,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "invalid configuration: {m}"),
            Failure::Construction(m) => write!(f, "construction failed: {m}"),
            Failure::Violation(m) => write!(f, "bound violated: {m}"),
            Failure::NotConverged(m) => write!(f, "{m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<weakgrad::Error> for Failure {
    fn from(e: weakgrad::Error) -> Self {
        use weakgrad::Error::*;
        match e {
            InvalidExponent(_)
            | DegenerateInterval(_)
            | InvalidParams(_)
            | Schema(_)
            | EmptyFamily
            | Unsupported(_) => Failure::Config(e.to_string()),
            NotConverged(_) => Failure::NotConverged(e.to_string()),
            _ => Failure::Construction(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli.options.resolve().and_then(|exp| commands::run(cli.command, &exp));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("weakgrad: {e}");
            ExitCode::from(e.code())
        }
    }
}
