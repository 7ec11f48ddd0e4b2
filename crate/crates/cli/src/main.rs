use std::path::PathBuf;
use std::process::ExitCode;

use cellflow_cli::commands::{evaluate_cmd, simulate_cmd, train_cmd, validate_solver};
use cellflow_cli::{CliError, PolicySource, RunConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cellflow", version, about = "Swimmer navigation in Taylor-Green cellular flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the spectral solver against the exact Taylor-Green decay.
    ValidateSolver(Common),
    /// Train a tabular Q-learning agent.
    Train(Common),
    /// Evaluate a frozen policy on an ensemble of swimmers.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Q-table written by `train`.
        #[arg(long, conflicts_with = "naive")]
        qtable: Option<PathBuf>,
        /// Always steer upwards instead of following a Q-table.
        #[arg(long)]
        naive: bool,
        /// Also write a PNG of the trajectories.
        #[arg(long)]
        render: bool,
    },
    /// Write solver vorticity snapshots.
    Simulate(Common),
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    let text = std::fs::read_to_string(&common.config).map_err(|source| CliError::Io {
        path: common.config.clone(),
        source,
    })?;
    let cfg = RunConfig::parse(&text)?;
    cfg.validate()?;
    let out = common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::ValidateSolver(common) => {
            let (cfg, out) = load(&common)?;
            let r = validate_solver(&cfg, &out)?;
            println!(
                "max_error={:e} l2_error={:e} energy_ratio_error={:e}",
                r.max_error, r.l2_error, r.energy_ratio_error
            );
        }
        Command::Train(common) => {
            let (cfg, out) = load(&common)?;
            let s = train_cmd(&cfg, &out)?;
            println!(
                "episodes={} first_100_mean={} last_100_mean={}",
                s.episodes, s.first_100_mean, s.last_100_mean
            );
        }
        Command::Evaluate {
            common,
            qtable,
            naive,
            render,
        } => {
            let source = match (qtable, naive) {
                (Some(path), false) => PolicySource::QTable(path),
                (None, true) => PolicySource::Naive,
                _ => return Err(CliError::Input("evaluate needs exactly one of --qtable <file> or --naive".into())),
            };
            let (cfg, out) = load(&common)?;
            let s = evaluate_cmd(&cfg, &source, render, &out)?;
            println!(
                "n={} mean_dy={} median_dy={} fraction_positive={}",
                s.stats.count, s.stats.mean, s.stats.median, s.stats.fraction_positive
            );
        }
        Command::Simulate(common) => {
            let (cfg, out) = load(&common)?;
            let written = simulate_cmd(&cfg, &out)?;
            println!("wrote {} snapshots to {}", written.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
