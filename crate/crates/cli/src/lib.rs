//! Command-line front end: wires the parsing, returns, estimation, and
//! diagnostics pipeline end to end and writes the report tables.

pub mod commands;
pub mod error;
pub mod inputs;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

pub use error::CliError;
use output::OutputFormat;

#[derive(Debug, Parser)]
#[command(
    name = "capmkit",
    version,
    about = "Market-model estimation from daily price lists: monthly excess returns, beta regressions, and residual diagnostics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a daily price list into a canonical panel file
    Parse(ParseArgs),
    /// Compute monthly log returns, and excess returns when rates are given
    Returns(ReturnsArgs),
    /// Estimate per-stock and portfolio regressions with hypothesis tests
    Estimate(EstimateArgs),
    /// Residual diagnostics and the index trend fit
    Diagnose(DiagnoseArgs),
    /// Generate synthetic fixtures and an estimator recovery report
    Simulate(SimulateArgs),
    /// Run the whole pipeline and bundle every report
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output directory, created if missing
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Report format
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Args)]
pub struct RangeArgs {
    /// Keep only dates on or after this day
    #[arg(long, value_name = "YYYY-MM-DD")]
    pub from: Option<NaiveDate>,
    /// Keep only dates on or before this day
    #[arg(long, value_name = "YYYY-MM-DD")]
    pub to: Option<NaiveDate>,
}

impl RangeArgs {
    pub fn validate(&self) -> Result<(), CliError> {
        if let (Some(from), Some(to)) = (self.from, self.to) {
            if from >= to {
                return Err(CliError::InvalidConfig(format!(
                    "--from {from} must be earlier than --to {to}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Args)]
pub struct ParseArgs {
    /// Daily price-list file (TICKER,YYYY-MM-DD,CLOSE[,VOLUME] lines)
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Fail on the first malformed line instead of logging and skipping it
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    pub range: RangeArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReturnsArgs {
    /// Daily price-list file
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Daily index levels (YYYY-MM-DD,level lines); adds MARKET rows
    #[arg(long, value_name = "FILE")]
    pub index: Option<PathBuf>,
    /// Monthly risk-free annual yields (YYYY-MM,annual_yield); adds excess output
    #[arg(long, value_name = "FILE")]
    pub riskfree: Option<PathBuf>,
    /// Dividend events (TICKER,YYYY-MM,amount)
    #[arg(long, value_name = "FILE")]
    pub dividends: Option<PathBuf>,
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    pub range: RangeArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    /// Daily price-list file
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Daily index levels (YYYY-MM-DD,level lines)
    #[arg(long, value_name = "FILE")]
    pub index: PathBuf,
    /// Monthly risk-free annual yields (YYYY-MM,annual_yield)
    #[arg(long, value_name = "FILE")]
    pub riskfree: PathBuf,
    /// Dividend events (TICKER,YYYY-MM,amount)
    #[arg(long, value_name = "FILE")]
    pub dividends: Option<PathBuf>,
    #[arg(long)]
    pub strict: bool,
    /// Significance levels in percent, a subset of 1,5,10
    #[arg(long, value_delimiter = ',', default_values_t = vec![1u32, 5, 10])]
    pub levels: Vec<u32>,
    #[command(flatten)]
    pub range: RangeArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

impl EstimateArgs {
    pub fn validate(&self) -> Result<(), CliError> {
        self.range.validate()?;
        if self.levels.is_empty() {
            return Err(CliError::InvalidConfig("--levels must not be empty".into()));
        }
        for level in &self.levels {
            if ![1u32, 5, 10].contains(level) {
                return Err(CliError::InvalidConfig(format!(
                    "--levels accepts only 1, 5, 10; got {level}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub estimate: EstimateArgs,
    /// Number of autocorrelation lags to report
    #[arg(long, value_name = "K", default_value_t = 12)]
    pub max_lag: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Simulation spec as a JSON document
    #[arg(long, value_name = "FILE")]
    pub spec: PathBuf,
    /// Monte-Carlo trials for the recovery report (at least 100)
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Override the seed in the spec file
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub diagnose: DiagnoseArgs,
}

/// Parse and dispatch. Returns the process exit code: 0 only when no error
/// was reported.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let is_usage_error = err.use_stderr();
            let _ = err.print();
            return if is_usage_error { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Parse(args) => commands::cmd_parse(&args),
        Command::Returns(args) => commands::cmd_returns(&args),
        Command::Estimate(args) => commands::cmd_estimate(&args),
        Command::Diagnose(args) => commands::cmd_diagnose(&args),
        Command::Simulate(args) => commands::cmd_simulate(&args),
        Command::Report(args) => commands::cmd_report(&args),
    }
}
