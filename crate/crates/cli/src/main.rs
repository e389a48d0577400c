use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dce_cli::commands::DEFAULT_M_CAP;
use dce_cli::{execute, Command, Options};

#[derive(Parser)]
#[command(name = "dce", version, about = "Modulated cavity with an intracavity detector")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Master seed for trajectory ensembles; overrides monitor.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for trajectory ensembles.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Sub {
    /// Deterministic evolution; writes the observable series.
    Run,
    /// Resonance shifts for the configured detector.
    Catalog,
    /// Dressed eigensystem and pump couplings.
    Spectrum {
        /// Highest excitation number.
        #[arg(long, default_value_t = DEFAULT_M_CAP)]
        m_cap: usize,
    },
    /// Monitored trajectory ensemble.
    Trajectory,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let Some(config) = cli.config else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(1);
    };
    let command = match cli.command {
        Sub::Run => Command::Run,
        Sub::Catalog => Command::Catalog,
        Sub::Spectrum { m_cap } => Command::Spectrum { m_cap },
        Sub::Trajectory => Command::Trajectory,
    };
    if cli.threads == Some(0) {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(1);
    }
    let opts = Options {
        out: cli.out,
        seed: cli.seed,
        threads: cli.threads,
    };
    match execute(&command, &config, &opts) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            for path in &outcome.outputs {
                log::info!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
