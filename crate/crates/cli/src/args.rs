use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "hetdiff", version, about = "Heterogeneous diffusions via (skew) Bessel processes")]
pub struct Cli {
    /// Worker threads; output does not depend on it.
    #[arg(long, global = true, env = "HETDIFF_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dimension, Bessel order and regime for (alpha, lambda).
    Regime(RegimeArgs),
    /// Simulate paths of X and write them as CSV with a manifest.
    Simulate(SimulateArgs),
    /// Tabulate a transition density on a y-grid.
    Density(DensityArgs),
    /// Run a verification suite and print JSON reports.
    Verify(VerifyArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RegimeArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    /// Time-changed Brownian motion; every regime.
    Timechange,
    /// Squared-Bessel Euler scheme; transient regime or one-sided skewness.
    Besq,
    /// Euler scheme for the skew Bessel SDE; dimension at least 1.
    Direct,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub x0: f64,
    /// Horizon.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1024)]
    pub steps: usize,
    #[arg(long, default_value_t = 100)]
    pub paths: usize,
    /// Master seed; drawn from entropy and recorded in the manifest when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV; the manifest goes to `<out>.manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Construction::Timechange)]
    pub construction: Construction,
    /// Keep every k-th grid point (the last point is always kept).
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bessel,
    Killed,
    Skew,
    Het,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DensityArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Dimension (bessel, killed, skew).
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Skewness (skew, het).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    /// Heterogeneity index (het).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Interpretation parameter (het).
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x: f64,
    /// `lo:hi:n`, n equally spaced points; defaults to `0:5:101` on the half
    /// line and `-5:5:201` on the line.
    #[arg(long, allow_hyphen_values = true)]
    pub ygrid: Option<String>,
    /// Output CSV (stdout when absent); a manifest is written beside it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteArg {
    Density,
    Exit,
    Skew,
    Trap,
    Occupation,
    Balance,
    All,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub theta: f64,
    /// Dimension for the Bessel-level suites.
    #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 4096)]
    pub steps: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the reports as one JSON array plus a manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
