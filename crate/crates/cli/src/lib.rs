//! Command-line front-end: `simulate`, `verify`, `twin`, `sweep` and `config`.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use commands::Status;
pub use config::{parse_config, ConfigError, ConfigErrors, ExperimentConfig};

/// Worker-thread count for the parallel kernels; all cores when unset.
pub const THREADS_VAR: &str = "QTENSOR_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "qtensor",
    version,
    about = "Beris-Edwards Q-tensor simulator and verification harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the flow and write energy.csv (and snapshots if enabled).
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the identity suites on generated data and write verify.csv.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Evolve the initial data and a perturbed copy; write twin.csv.
    Twin {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        perturb_scale: f64,
        #[arg(long)]
        perturb_seed: u64,
    },
    /// Tabulate sup Ã over a list of viscosities; write sweep.csv.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        mu: Vec<f64>,
    },
    /// Print the resolved configuration.
    Config {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

impl Command {
    fn config_path(&self) -> Option<&Path> {
        match self {
            Self::Simulate { config }
            | Self::Verify { config }
            | Self::Twin { config, .. }
            | Self::Sweep { config, .. }
            | Self::Config { config } => config.as_deref(),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Self::Simulate { .. } => "simulate",
            Self::Verify { .. } => "verify",
            Self::Twin { .. } => "twin",
            Self::Sweep { .. } => "sweep",
            Self::Config { .. } => "config",
        }
    }
}

pub fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, String> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?,
        None => String::new(),
    };
    parse_config(&text).map_err(|e| e.to_string())
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR} = {raw:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

/// Runs the command line `args` (program name first) and returns the exit
/// status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Status::Usage as i32
            } else {
                0
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return Status::Usage as i32;
    }
    let config = match load_config(cli.command.config_path()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("invalid configuration:\n{e}");
            return Status::Usage as i32;
        }
    };
    if let Command::Config { .. } = cli.command {
        print!("{}", config.echo());
        return Status::Pass as i32;
    }
    println!(
        "{}",
        commands::reproducibility_line(&config, cli.command.name())
    );
    let outcome = match &cli.command {
        Command::Simulate { .. } => commands::simulate(&config),
        Command::Verify { .. } => commands::verify(&config),
        Command::Twin {
            perturb_scale,
            perturb_seed,
            ..
        } => commands::twin(&config, *perturb_scale, *perturb_seed),
        Command::Sweep { mu, .. } => commands::sweep(&config, mu),
        Command::Config { .. } => unreachable!(),
    };
    match outcome {
        Ok(s) => s as i32,
        Err(e) => {
            eprintln!("error: {e}");
            e.status() as i32
        }
    }
}
