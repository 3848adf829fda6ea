//! `carrier` command-line front end.
//!
//! Exit codes: 0 success, 2 input error, 3 capability error (state too
//! large), 4 verification failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use carrier::optimize::OptimizerOpts;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "carrier", version, about = "Correlation measures and entanglement-distribution checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master seed for optimizers and random instances.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Optimizer restarts.
    #[arg(long, global = true, default_value_t = 32)]
    restarts: usize,
    /// Points per axis of the discord angle grid.
    #[arg(long, global = true, default_value_t = 64)]
    grid: usize,
    /// Simplex contraction tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Output format; `sweep` defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include full certificates in the report.
    #[arg(long, global = true)]
    certificate: bool,
    /// Omit the timestamp and timings so repeated runs are byte-identical.
    #[arg(long, global = true)]
    deterministic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Example {
    #[value(name = "1")]
    #[serde(rename = "1")]
    One,
    #[value(name = "2")]
    #[serde(rename = "2")]
    Two,
    #[value(name = "3")]
    #[serde(rename = "3")]
    Three,
    #[value(name = "cubitt")]
    #[serde(rename = "cubitt")]
    Cubitt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum SweepExample {
    #[value(name = "2")]
    #[serde(rename = "2")]
    Two,
    #[value(name = "3")]
    #[serde(rename = "3")]
    Three,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Entropy, mutual information, discord and entanglement of a state file.
    Measures {
        state: PathBuf,
        /// Bipartition such as `A:BC` or `A,C:B`.
        #[arg(long)]
        cut: Option<String>,
        /// Subsystem measured for the discord.
        #[arg(long)]
        measured: Option<String>,
        /// Project slightly invalid input back onto density matrices.
        #[arg(long)]
        repair: bool,
    },
    /// Run one of the worked protocols and check every claim about it.
    Reproduce {
        #[arg(value_enum)]
        example: Example,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        u: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
        /// Pure three-party state file for example 1.
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long)]
        repair: bool,
    },
    /// Parameter scan: `lo:hi:n` or a comma-separated list.
    Sweep {
        #[arg(value_enum)]
        example: SweepExample,
        grid_spec: String,
    },
    /// Random-instance verification sweeps.
    Verify {
        /// theorem1, eq2, eq4, eq6, eq7, lemma1, theorem3, theorem4 or all.
        suite: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
    },
}

/// Everything that determines a run's output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub inputs: Vec<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub restarts: usize,
    pub grid: usize,
    pub tol: f64,
    pub trials: Option<usize>,
    #[serde(skip)]
    pub certificate: bool,
    #[serde(skip)]
    pub deterministic: bool,
}

impl RunConfig {
    pub fn opts(&self) -> OptimizerOpts {
        OptimizerOpts {
            seed: self.seed,
            restarts: self.restarts,
            grid: self.grid,
            tol: self.tol,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Capability(String),
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Capability(_) => 3,
            CliError::Failed(_) => 4,
        }
    }
}

impl From<carrier::Error> for CliError {
    fn from(e: carrier::Error) -> Self {
        match e {
            carrier::Error::TooLarge(..) => CliError::Capability(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn config(cli: &Cli) -> Result<RunConfig, CliError> {
    if cli.restarts == 0 {
        return Err(CliError::Input("--restarts must be at least 1".into()));
    }
    if cli.grid < 2 {
        return Err(CliError::Input("--grid must be at least 2".into()));
    }
    if cli.tol.is_nan() || cli.tol <= 0.0 {
        return Err(CliError::Input("--tol must be positive".into()));
    }
    let (subcommand, inputs, trials, default_format) = match &cli.command {
        Command::Measures { state, .. } => ("measures", vec![state.clone()], None, Format::Json),
        Command::Reproduce { state, .. } => ("reproduce", state.iter().cloned().collect(), None, Format::Json),
        Command::Sweep { .. } => ("sweep", vec![], None, Format::Csv),
        Command::Verify { trials, .. } => ("verify", vec![], *trials, Format::Json),
    };
    Ok(RunConfig {
        subcommand,
        inputs,
        output: cli.out.clone(),
        format: cli.format.unwrap_or(default_format),
        seed: cli.seed,
        restarts: cli.restarts,
        grid: cli.grid,
        tol: cli.tol,
        trials,
        certificate: cli.certificate,
        deterministic: cli.deterministic,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = config(&cli)?;
    match cli.command {
        Command::Measures {
            state,
            cut,
            measured,
            repair,
        } => commands::measures(&cfg, &state, cut.as_deref(), measured.as_deref(), repair),
        Command::Reproduce {
            example,
            p,
            u,
            s,
            state,
            repair,
        } => commands::reproduce(&cfg, example, p, u, s, state.as_deref(), repair),
        Command::Sweep { example, grid_spec } => commands::sweep(&cfg, example, &grid_spec),
        Command::Verify { suite, n, trials } => commands::verify(&cfg, &suite, n, trials),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Input(m) | CliError::Capability(m) | CliError::Failed(m)) = &e;
            eprintln!("error: {m}");
            ExitCode::from(e.code())
        }
    }
}
