use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use phaseloc::commands::{cmd_evaluate, cmd_locate, cmd_simulate};
use phaseloc::config::default_config_json;
use phaseloc::{CliError, Outcome};

/// Relative localization of an RFID-tagged drone swarm from backscatter phase.
///
/// Exit status: 0 success, 1 partial result, 2 config or input error, 3 I/O error.
#[derive(Debug, Parser)]
#[command(name = "phaseloc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one x, y and z sweep and write them as recordings.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (sweep_x.jsonl, sweep_y.jsonl, sweep_z.jsonl).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's master_seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Rank the drones on every axis from three recordings.
    Locate {
        /// The x, y and z recordings, in any order.
        #[arg(num_args = 3, required = true)]
        recordings: Vec<PathBuf>,
        /// Config file whose `pipeline` section is used.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Geometry report path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the Monte-Carlo evaluation.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (aggregate.json, aggregate.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the calibration experiment config.
    DefaultConfig {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: u64,
    },
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Simulate { config, out, seed } => {
            for path in cmd_simulate(&config, out.as_deref(), seed)? {
                println!("{}", path.display());
            }
            Ok(Outcome::Complete)
        }
        Command::Locate {
            recordings,
            config,
            out,
        } => {
            let (report, outcome) = cmd_locate(&recordings, config.as_deref(), &out)?;
            for axis in &report.axes {
                for f in &axis.failures {
                    eprintln!(
                        "warning: {} sweep, drone {} (tag {}): {}",
                        axis.axis, f.drone_id, f.tag_id, f.reason
                    );
                }
            }
            println!("{}", out.display());
            Ok(outcome)
        }
        Command::Evaluate {
            config,
            out,
            seed,
            jobs,
        } => {
            let (report, paths) = cmd_evaluate(&config, out.as_deref(), seed, jobs)?;
            for p in &report.points {
                let mean = p.metric("accuracy_axis_mean").map_or(f64::NAN, |m| m.mean);
                let geo = p.metric("geometry").map_or(f64::NAN, |m| m.mean);
                println!(
                    "sigma={} drop={} speed={} distance={} scale={}: axis accuracy {mean:.4}, geometry {geo:.4}",
                    p.point.phase_sigma, p.point.read_drop_prob, p.point.speed, p.point.reader_distance, p.point.spacing_scale
                );
            }
            for p in paths {
                println!("{}", p.display());
            }
            Ok(Outcome::Complete)
        }
        Command::DefaultConfig { seed, trials } => {
            print!("{}", default_config_json(seed, trials));
            Ok(Outcome::Complete)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
