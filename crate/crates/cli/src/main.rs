//! Command-line experiment runner for the hybrid-band D2D engine.

mod config;
mod presets;
mod runner;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "duoband",
    about = "Coverage analysis and simulation of hybrid mmWave/microwave D2D networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment config: analytic sweeps, Monte Carlo runs,
    /// CSV curves and a manifest.
    Run {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Check a config and print the derived quantities without running.
    Validate { config: PathBuf },
    /// Run a bundled figure-reproduction preset (fig4, fig5, fig6).
    Preset {
        name: String,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        iterations: Option<usize>,
    },
}

fn apply_overrides(
    cfg: &mut config::ExperimentConfig,
    seed: Option<u64>,
    iterations: Option<usize>,
    output_dir: &Option<PathBuf>,
) {
    if let Some(s) = seed {
        cfg.run.seed = s;
    }
    if let Some(n) = iterations {
        cfg.run.iterations = n;
    }
    if let Some(dir) = output_dir {
        cfg.run.output_dir = dir.display().to_string();
    }
}

fn finish(summary: runner::RunSummary) -> Result<ExitCode> {
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    if summary.failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for (curve, x, why) in &summary.failures {
            eprintln!("point failure in {curve} at x = {x}: {why}");
        }
        eprintln!(
            "{} grid point(s) failed; completed points were written",
            summary.failures.len()
        );
        Ok(ExitCode::from(2))
    }
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            output_dir,
            seed,
            iterations,
        } => {
            let mut cfg = config::ExperimentConfig::from_path(&config)?;
            apply_overrides(&mut cfg, seed, iterations, &output_dir);
            let out = PathBuf::from(&cfg.run.output_dir);
            finish(runner::execute(&cfg, &out)?)
        }
        Command::Validate { config } => {
            let cfg = config::ExperimentConfig::from_path(&config)?;
            print!("{}", runner::validate_report(&cfg)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Preset {
            name,
            output_dir,
            seed,
            iterations,
        } => {
            let Some(mut cfg) =
                presets::by_name(&name, seed.unwrap_or(42), iterations.unwrap_or(10_000))
            else {
                bail!(
                    "unknown preset `{name}`; available: {}",
                    presets::PRESET_NAMES.join(", ")
                );
            };
            apply_overrides(&mut cfg, None, None, &output_dir);
            let out = PathBuf::from(&cfg.run.output_dir);
            // Keep the exact config next to the outputs so the run can
            // be repeated or edited.
            std::fs::create_dir_all(&out)?;
            let cfg_path = out.join(format!("{}_config.toml", cfg.run.file_prefix));
            std::fs::write(&cfg_path, toml::to_string_pretty(&runner::portable(&cfg))?)?;
            println!("wrote {}", cfg_path.display());
            finish(runner::execute(&cfg, &out)?)
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
