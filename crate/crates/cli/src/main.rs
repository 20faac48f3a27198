use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use herding_cli::{commands, load_config, LoadedConfig};

#[derive(Parser)]
#[command(name = "herding", version, about = "Herding market simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one run and its paired gBm baseline.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sweep the herding constant and record max |sentiment| per run.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Herding constant implied by a report period and sentiment level.
    Calibrate {
        #[arg(long, default_value_t = 80.0)]
        report_days: f64,
        #[arg(long, default_value_t = 0.5)]
        sentiment: f64,
        /// Log-price distance to close; defaults to |ln 0.85|.
        #[arg(long)]
        threshold_distance: Option<f64>,
        /// Model time per trading day; defaults to 10 steps of 4e-6.
        #[arg(long, default_value_t = 0.00004)]
        day_length: f64,
    },
    /// Write only the gBm baseline for a config.
    Baseline {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn config(path: Option<&Path>) -> Result<LoadedConfig> {
    Ok(match path {
        Some(p) => load_config(p)?,
        None => herding_cli::parse_config("{}")?,
    })
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config: path, out, seed } => {
            let mut cfg = config(path.as_deref())?.run;
            if let Some(seed) = seed {
                cfg.params.seed = seed;
            }
            let result = commands::run(&cfg, &out)?;
            println!("wrote {} days to {}", result.model.len(), out.display());
        }
        Command::Sweep { config: path, out } => {
            let cfg = config(path.as_deref())?;
            let result = commands::sweep(&cfg.sweep, &cfg.run, &out, None)?;
            for row in &result.per_c {
                match row.mean {
                    Some(m) => println!("C={:<8} mean max|sigma|={m:.4}", row.c),
                    None => println!("C={:<8} all runs failed", row.c),
                }
            }
            if !result.errors.is_empty() {
                anyhow::bail!("{} sweep runs failed; see sweep.json", result.errors.len());
            }
        }
        Command::Calibrate {
            report_days,
            sentiment,
            threshold_distance,
            day_length,
        } => {
            let distance = threshold_distance.unwrap_or_else(|| 0.85f64.ln().abs());
            let c = commands::calibrate(report_days, sentiment, distance, day_length)?;
            println!("{c}");
        }
        Command::Baseline { config: path, out } => {
            let cfg = config(path.as_deref())?.run;
            let result = commands::baseline(&cfg, &out)?;
            println!("wrote {} days to {}", result.baseline.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let line = serde_json::json!({ "error": format!("{err:#}") });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
