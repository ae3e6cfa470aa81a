//! `gcsurf`: curvature tables, invariant-region certificates, viscous runs,
//! surface reconstruction and zero-locus plots from one configuration file.

mod commands;
mod config;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliError, CliResult};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "gcsurf", version, about)]
struct Cli {
    /// Configuration file of `section.key=value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Re-reads the configuration echoed in the header of an emitted file.
    #[arg(long, global = true)]
    from_header: Option<PathBuf>,

    /// Overrides one key; applied after the files, in order.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Metric, curvature and Christoffel tables over the domain grid.
    Curvature,
    /// Invariant-region certificate for a square, or a search for one.
    Region {
        #[command(subcommand)]
        mode: RegionMode,
    },
    /// Viscous run or viscosity sweep with trajectory and residual tables.
    Solve,
    /// Surface mesh from a second fundamental form or a closed form.
    Reconstruct,
    /// SVG of the source zero loci in the (u, v) plane.
    PlotLoci,
}

#[derive(Subcommand)]
enum RegionMode {
    Verify,
    Search,
}

fn resolve(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = RunConfig::load(path)?;
        cfg.apply_text(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &cli.from_header {
        let text = RunConfig::load(path)?;
        cfg.apply_header(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    }
    for assignment in &cli.set {
        cfg.apply_override(assignment)?;
    }
    Ok(cfg)
}

fn threads_from_env() -> CliResult<()> {
    match std::env::var("GCSURF_THREADS") {
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .map_err(|_| CliError::Config(format!("GCSURF_THREADS: expected a positive integer, got `{raw}`")))?;
            gauss_codazzi::exec::configure_threads(n).map_err(|e| CliError::Config(format!("GCSURF_THREADS: {e}")))
        }
        Err(_) => Ok(()),
    }
}

fn run(cli: &Cli) -> CliResult<commands::Outcome> {
    threads_from_env()?;
    let cfg = resolve(cli)?;
    match &cli.command {
        Command::Curvature => commands::curvature(&cfg),
        Command::Region { mode: RegionMode::Verify } => commands::region_verify(&cfg),
        Command::Region { mode: RegionMode::Search } => commands::region_search(&cfg),
        Command::Solve => commands::solve(&cfg),
        Command::Reconstruct => commands::reconstruct(&cfg),
        Command::PlotLoci => commands::plot_loci(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("gcsurf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
