//! `momenta` command-line driver.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plots;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use momenta_core::{BracketRule, HamiltonianCut};

pub use error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Parser)]
#[command(name = "momenta", version, about = "Quantum-corrected dynamics from truncated moment hierarchies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Scenario TOML file; unknown keys are rejected.
    #[arg(long, global = true, value_name = "FILE")]
    pub scenario: Option<PathBuf>,

    /// Built-in scenario when no file is given: orbit, saturated or radial.
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,

    /// Truncation order N.
    #[arg(long, global = true)]
    pub order: Option<u32>,

    #[arg(long, global = true)]
    pub hbar: Option<f64>,

    #[arg(long = "t-end", global = true, value_name = "T")]
    pub t_end: Option<f64>,

    /// Sets both absolute and relative tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Seed for randomized state sampling (recorded in manifests).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Drop all moments: integrate the classical system.
    #[arg(long, global = true)]
    pub classical: bool,

    /// Choose momentum dispersions that saturate the uncertainty relation.
    #[arg(long, global = true)]
    pub saturate: bool,

    #[arg(long = "bracket-rule", global = true, value_enum)]
    pub bracket_rule: Option<RuleArg>,

    #[arg(long = "hamiltonian-cut", global = true, value_enum)]
    pub hamiltonian_cut: Option<CutArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Exact,
    Printed,
}

impl From<RuleArg> for BracketRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Exact => BracketRule::Exact,
            RuleArg::Printed => BracketRule::Printed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CutArg {
    /// Taylor H_Q truncated at order N.
    Order,
    /// Closed-form sums, not truncated.
    ClosedForm,
}

impl From<CutArg> for HamiltonianCut {
    fn from(c: CutArg) -> Self {
        match c {
            CutArg::Order => HamiltonianCut::Order,
            CutArg::ClosedForm => HamiltonianCut::ClosedFormSums,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the equations of motion and write them as text and as an equation file.
    Derive,
    /// Integrate a scenario and write trajectory, scenario, equations and manifest.
    Integrate(IntegrateArgs),
    /// Check brackets against the operator oracle and the generated systems against the reference transcriptions.
    Verify,
    /// Run a scenario once per initial dispersion.
    Sweep(SweepArgs),
    /// Render SVG plots from a trajectory CSV.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Args)]
pub struct IntegrateArgs {
    /// Use this equation file instead of generating the system.
    #[arg(long, value_name = "FILE")]
    pub equations: Option<PathBuf>,

    /// Repeat the run recorded in a manifest.
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    /// Skip plots even if the scenario asks for them.
    #[arg(long)]
    pub no_plots: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Initial position dispersions, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1e-3, 1e-4, 1e-5])]
    pub dispersions: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// Trajectory CSV; a `classical.csv` beside it is overlaid when present.
    #[arg(long, value_name = "FILE", default_value = "out/trajectory.csv")]
    pub input: PathBuf,
}

/// Parses `args` and runs the command, mapping failures to exit codes.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("momenta: {e}");
            e.exit_code()
        }
    }
}
