//! The `nicr` command line: sample size, the example table, data
//! simulation, Fine–Gray fits and Monte Carlo power studies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod failure;
pub mod plot;

mod commands;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nicr_core::design::SizingMethod;
use nicr_core::power::Hypothesis;

pub use config::RunConfig;
pub use failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "nicr", version, about = "Sample size and simulation for non-inferiority trials with competing risks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Required events and sample size for a design.
    Size(SizeArgs),
    /// Recompute the six-row worked example table as CSV.
    ReproduceTable2(Table2Args),
    /// Simulate a trial dataset.
    Simulate(SimulateArgs),
    /// Fit the Fine–Gray model to a dataset and test non-inferiority.
    Fit(FitArgs),
    /// Monte Carlo power or type I error of the sample size formula.
    Power(PowerArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Sdh,
    SingleEvent,
}

impl From<ModeArg> for SizingMethod {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sdh => SizingMethod::Sdh,
            ModeArg::SingleEvent => SizingMethod::SingleEvent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HypothesisArg {
    Null,
    Alt,
}

impl From<HypothesisArg> for Hypothesis {
    fn from(h: HypothesisArg) -> Self {
        match h {
            HypothesisArg::Null => Hypothesis::Null,
            HypothesisArg::Alt => Hypothesis::Alt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridArg {
    /// The 120-scenario grid.
    Table1,
}

/// Flags that override config file values.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub tf: Option<f64>,
    #[arg(long = "r")]
    pub r: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub delta0: Option<f64>,
    #[arg(long)]
    pub delta1: Option<f64>,
    #[arg(long, value_enum)]
    pub hypothesis: Option<HypothesisArg>,
    #[arg(long)]
    pub n0: Option<usize>,
    #[arg(long)]
    pub n1: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, mut cfg: RunConfig) -> RunConfig {
        fn set<T: Copy>(slot: &mut Option<T>, v: Option<T>) {
            if v.is_some() {
                *slot = v;
            }
        }
        set(&mut cfg.mode, self.mode.map(Into::into));
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.replications, self.reps);
        set(&mut cfg.tf, self.tf);
        set(&mut cfg.r, self.r);
        set(&mut cfg.alpha, self.alpha);
        set(&mut cfg.delta0, self.delta0);
        set(&mut cfg.delta1, self.delta1);
        set(&mut cfg.hypothesis, self.hypothesis.map(Into::into));
        set(&mut cfg.n0, self.n0);
        set(&mut cfg.n1, self.n1);
        cfg
    }
}

#[derive(Debug, Args)]
pub struct SizeArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Print the result as JSON.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct Table2Args {
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Dataset CSV path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include the latent censoring time column.
    #[arg(long)]
    pub censor_time: bool,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset CSV in the simulate output format.
    pub data: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Use the recorded censoring times instead of Kaplan–Meier weights.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub delta0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[arg(long, conflicts_with = "config")]
    pub grid: Option<GridArg>,
    #[arg(long, required_unless_present = "grid")]
    pub config: Option<PathBuf>,
    /// Power CSV path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG scatter of rejection rate against censoring rate.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Run a parsed command, writing results to `out` and diagnostics to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    match &cli.command {
        Command::Size(a) => commands::size(a, out, err),
        Command::ReproduceTable2(a) => commands::reproduce_table2(a, out),
        Command::Simulate(a) => commands::simulate(a, out, err),
        Command::Fit(a) => commands::fit(a, out, err),
        Command::Power(a) => commands::power(a, out, err),
    }
}
