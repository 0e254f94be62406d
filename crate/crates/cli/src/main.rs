//! `ridgeboost`: command-line surface for once-boosted ridge estimation.
//!
//! Subcommands: simulate | estimate | audit | check-equivalence | profile.
//! Exit codes: 0 success, 1 failed equivalence check, 2 configuration error,
//! 3 data error, 4 numerical failure.

mod commands;
mod config;
mod figure;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Command-level failure, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration: unknown key, invalid value, missing requirement.
    Config(String),
    /// Bad input data or unwritable output: file, schema, or layout problems.
    Data(String),
    /// The solver or a numeric routine failed on otherwise valid input.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config error",
            CliError::Data(_) => "data error",
            CliError::Numerical(_) => "numerical error",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Data(m) | CliError::Numerical(m) => m,
        }
    }

    /// Prefixes the message with row/functional context, keeping the kind.
    pub fn with_context(self, context: String) -> Self {
        let combined = format!("{context}: {}", self.message());
        match self {
            CliError::Config(_) => CliError::Config(combined),
            CliError::Data(_) => CliError::Data(combined),
            CliError::Numerical(_) => CliError::Numerical(combined),
        }
    }

    /// Maps library failures onto the exit-code taxonomy: parameter problems
    /// are configuration errors, shape/content problems are data errors, and
    /// solver breakdowns are numerical failures.
    pub fn from_core(e: ridgeboost_core::Error) -> Self {
        use ridgeboost_core::Error as E;
        match e {
            E::InvalidParameter(_) => CliError::Config(e.to_string()),
            E::DimensionMismatch { .. } | E::EmptyData(_) | E::DegenerateData(_) => {
                CliError::Data(e.to_string())
            }
            E::NotSymmetric { .. }
            | E::NotFactorizable { .. }
            | E::NoConvergence { .. }
            | E::EvaluationFailure(_) => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ridgeboost",
    version,
    about = "Once-boosted ridge regression: shift-robust estimation with efficient inference"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key=value configuration file (# comments allowed).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed from the configuration file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for artifacts (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo coverage study over a grid of sample sizes and shifts.
    Simulate(CommonArgs),
    /// Estimate one functional (or one counterfactual grid) from CSV data.
    Estimate(CommonArgs),
    /// Multiaccuracy audit: contraction certificate and holdout error.
    Audit(CommonArgs),
    /// Randomized check that the ridge and Riesz-weight routes agree.
    #[command(name = "check-equivalence")]
    CheckEquivalence(CommonArgs),
    /// Estimate a family of functionals from one fitted model.
    Profile(CommonArgs),
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let (args, runner): (
        &CommonArgs,
        fn(&config::RawConfig, &std::path::Path, Option<u64>) -> Result<i32, CliError>,
    ) = match &cli.command {
        Command::Simulate(a) => (a, commands::cmd_simulate),
        Command::Estimate(a) => (a, commands::cmd_estimate),
        Command::Audit(a) => (a, commands::cmd_audit),
        Command::CheckEquivalence(a) => (a, commands::cmd_check_equivalence),
        Command::Profile(a) => (a, commands::cmd_profile),
    };
    let cfg = commands::load_config(args.config.as_ref())?;
    runner(&cfg, &args.out, args.seed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}: {}", e.kind(), e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
