//! Command-line front end for the rateless-UEP simulator.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rateless_uep::Error;

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "rateless-uep",
    version,
    about = "Rateless coding with prior-guided unequal error protection: \
             design, encode, decode, and broadcast simulation"
)]
struct Cli {
    /// Flat key-value configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for trial parallelism (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output path; most commands print to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also emit the per-iteration decode trace.
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tune the selection skew and report the design constraints.
    Design {
        /// Priors file; a synthetic source is drawn when omitted.
        #[arg(long)]
        source: Option<PathBuf>,
    },
    /// Encode a priors file into a coded-symbol file (requires --out).
    Encode {
        #[arg(long)]
        source: PathBuf,
        /// Number of coded symbols (default: config `n`, else 2k).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Decode a coded-symbol file against its priors.
    Decode {
        #[arg(long)]
        symbols: PathBuf,
        #[arg(long)]
        priors: PathBuf,
    },
    /// Run one broadcast session over the configured receivers.
    Simulate,
    /// Averaged rate/complexity/distortion table over the configured grid.
    Sweep,
}

fn run(cli: Cli) -> rateless_uep::Result<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        rateless_uep::configure_threads(jobs)?;
    }
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Design { source } => commands::cmd_design(&config, source.as_deref(), out),
        Command::Encode { source, n } => commands::cmd_encode(&config, source, *n, out),
        Command::Decode { symbols, priors } => {
            commands::cmd_decode(&config, symbols, priors, out, cli.trace)
        }
        Command::Simulate => commands::cmd_simulate(&config, out),
        Command::Sweep => commands::cmd_sweep(&config, out),
    }
}

fn exit_code(error: &Error) -> u8 {
    match error {
        Error::Config(_) => 2,
        Error::Parse { .. } | Error::Structural(_) | Error::Io(_) => 3,
        Error::Infeasible { .. } => 4,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code(&error))
        }
    }
}
