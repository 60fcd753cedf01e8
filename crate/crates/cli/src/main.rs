use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shor_afs::BackendKind;
use shor_afs_cli::commands;
use shor_afs_cli::config::{Overrides, RunConfig};
use shor_afs_cli::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "shor-afs", version, about = "Fluctuations and noise sensitivity of the states in Shor's algorithm")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration; defaults are used for anything it omits.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed of the noise streams.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Noise coupling in units of ħ/τ.
    #[arg(long, global = true)]
    lambda: Option<f64>,

    /// Active noise components, a subset of "xyz".
    #[arg(long, global = true)]
    components: Option<String>,

    /// Number of noise realizations.
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// State backend: dense or structured.
    #[arg(long, global = true)]
    backend: Option<BackendKind>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Also render SVG plots.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fluctuations of the magnetizations at every captured step.
    Trace,
    /// Outcome distribution of the first register and the clean success probability.
    Spectrum,
    /// Fidelity, entropy and success probability with noise after each step.
    NoiseScan,
    /// One state under a range of couplings, one component at a time.
    StateNoise {
        /// Step whose state is perturbed.
        #[arg(long)]
        step: Option<usize>,
        /// Comma-separated couplings.
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
    },
    /// Size scaling of the landmark states and the fitted indices.
    Scaling,
    /// Print the effective configuration.
    PrintConfig,
}

fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    let mut cfg = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let c = cli.common;
    cfg.apply(&Overrides {
        seed: c.seed,
        lambda: c.lambda,
        components: c.components,
        samples: c.samples,
        backend: c.backend,
        out: c.out,
        svg: c.svg,
    })?;
    match cli.command {
        Command::Trace => commands::trace(&cfg),
        Command::Spectrum => commands::spectrum(&cfg),
        Command::NoiseScan => commands::noise_scan(&cfg),
        Command::StateNoise { step, lambdas } => {
            if step.is_some() {
                cfg.state_noise.step = step;
            }
            if let Some(l) = lambdas {
                cfg.state_noise.lambdas = l;
            }
            commands::state_noise(&cfg)
        }
        Command::Scaling => commands::scaling(&cfg),
        Command::PrintConfig => {
            print!("{}", cfg.to_toml()?);
            Ok(Vec::new())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
