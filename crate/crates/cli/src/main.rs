//! Command-line front end: parse a config (file or preset), run the
//! experiment, and emit CSV. Exit codes: 0 success, 1 configuration
//! error, 2 numerical failure.

mod config;
mod experiment;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{load_config, preset, Config, PRESETS};
use experiment::{run, AppError};

#[derive(Parser)]
#[command(name = "vlc-secrecy", version, about = "Secrecy beamforming and outage simulator for indoor VLC downlinks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or preset name
    Run {
        /// Config file path, or a preset name from `list`
        config: String,
        /// Override a config value by dotted path, e.g. experiment.trials=1000
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Override the random seed
        #[arg(long)]
        seed: Option<u64>,
        /// Write CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Monte Carlo worker threads (default: all cores)
        #[arg(long)]
        workers: Option<usize>,
    },
    /// List bundled experiment presets and generic modes
    List,
    /// Print a preset config as TOML (default: fig7)
    DumpConfig {
        /// Preset name
        #[arg(default_value = "fig7")]
        name: String,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(e @ AppError::Numerical(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch() -> Result<(), AppError> {
    match Cli::parse().command {
        Command::Run {
            config,
            mut set,
            seed,
            out,
            workers,
        } => {
            if let Some(seed) = seed {
                set.push(format!("experiment.seed={seed}"));
            }
            let cfg: Config = load_config(&config, &set)?;
            let worker_count = match workers {
                Some(n) if n >= 1 => {
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build_global()
                        .map_err(|e| AppError::Config(format!("worker pool: {e}")))?;
                    n
                }
                Some(_) => return Err(AppError::Config("--workers must be at least 1".into())),
                None => rayon::current_num_threads(),
            };
            let output = run(&cfg, worker_count)?;
            let out_path = out.or_else(|| cfg.experiment.out.clone().map(PathBuf::from));
            let io = |e: std::io::Error| AppError::Config(format!("output: {e}"));
            match out_path {
                Some(path) => {
                    let file = std::fs::File::create(&path).map_err(io)?;
                    output.write_csv(file).map_err(io)?;
                    let mut stdout = std::io::stdout().lock();
                    for line in &output.summaries {
                        writeln!(stdout, "{line}").map_err(io)?;
                    }
                    writeln!(stdout, "wrote {}", path.display()).map_err(io)?;
                }
                None => {
                    // CSV to stdout; summaries stay on stderr
                    output.write_csv(std::io::stdout().lock()).map_err(io)?;
                    for line in &output.summaries {
                        eprintln!("{line}");
                    }
                }
            }
            Ok(())
        }
        Command::List => {
            println!("presets:");
            for (name, _, desc) in PRESETS {
                println!("  {name:<6} {desc}");
            }
            println!("modes (experiment.mode in a config file):");
            println!("  beamform    optimal weight vector at given UE positions");
            println!("  select      nearest-fixture selection metrics at given UE positions");
            println!("  sop-closed  closed-form secrecy outage bounds");
            println!("  sop-mc      closed-form bounds plus Monte Carlo estimates");
            Ok(())
        }
        Command::DumpConfig { name } => {
            let text = preset(&name)
                .ok_or_else(|| AppError::Config(format!("no preset named `{name}`")))?;
            // echo the validated form so the dump round-trips exactly
            let cfg = Config::from_toml(text, &[])?;
            print!("{}", cfg.to_toml());
            Ok(())
        }
    }
}
