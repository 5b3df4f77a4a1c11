mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{parse_levels, Case, Levels, Mode, Mortar, RunConfig};

#[derive(Parser)]
#[command(
    name = "stmortar",
    version,
    about = "Space-time mortar mixed finite element solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a configuration and write tables and snapshots.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    case: Option<Case>,
    /// Refinement levels, `0..4` (inclusive) or `0,2,4`.
    #[arg(long, value_parser = parse_levels)]
    levels: Option<Levels>,
    #[arg(long, value_enum)]
    mortar: Option<Mortar>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Compare against the monolithic direct solve.
    #[arg(long)]
    oracle: bool,
    /// Dense spectral report of the interface operator.
    #[arg(long)]
    spectral: bool,
    #[arg(long)]
    check_assumptions: bool,
    /// Snapshot times for VTK output, comma separated.
    #[arg(long, value_delimiter = ',')]
    vtk_times: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.case {
            c.case = v;
        }
        if let Some(v) = self.levels {
            c.levels = v.0;
        }
        if let Some(v) = self.mortar {
            c.mortar = v;
        }
        if let Some(v) = self.mode {
            c.mode = v;
        }
        if let Some(v) = self.tol {
            c.gmres.tol = v;
        }
        if let Some(v) = self.max_iter {
            c.gmres.max_iter = v;
        }
        if let Some(v) = self.vtk_times {
            c.output.vtk_times = v;
        }
        if let Some(v) = self.out {
            c.out = v;
        }
        c.diagnostics.oracle |= self.oracle;
        c.diagnostics.spectral |= self.spectral;
        c.diagnostics.check_assumptions |= self.check_assumptions;
        c.validate()?;
        Ok(c)
    }
}

fn execute(cli: Cli) -> Result<()> {
    if let Ok(n) = std::env::var("STMORTAR_THREADS") {
        let n: usize = n
            .parse()
            .context("STMORTAR_THREADS must be a positive integer")?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    match cli.command {
        Command::Run(args) => run::run(&args.into_config()?),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
