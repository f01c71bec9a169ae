use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use ccnsim::cli;

#[derive(Parser)]
#[command(
    name = "ccnsim",
    version,
    about = "Cache simulator for content-centric networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file; prints a summary and the CSV row.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the file's seed.
        #[arg(long, env = "ICB_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        scale: Option<u64>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every configuration of a sweep file and write one CSV table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Base seed when the sweep declares no `seeds`.
        #[arg(long, env = "ICB_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        scale: Option<u64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the six preset scenario files.
    Presets {
        /// Output directory.
        #[arg(long, default_value = "presets")]
        out: PathBuf,
    },
    /// Daily traffic kept off upstream links.
    Savings {
        #[arg(long)]
        volume_tb: f64,
        #[arg(long)]
        ratio: f64,
    },
}

fn base_dir(config: &Path) -> Option<&Path> {
    config.parent().filter(|p| !p.as_os_str().is_empty())
}

fn write_table(reports: &[ccnsim::MetricsReport], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            cli::emit_csv(reports, path)
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            cli::write_csv(&mut lock, reports)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run {
            config,
            seed,
            scale,
            out,
        } => {
            let cfg = cli::load_scenario(&config, seed, scale)?;
            let reports = cli::run_all(std::slice::from_ref(&cfg), 1, base_dir(&config))?;
            eprintln!("{}", reports[0].summary());
            write_table(&reports, out.as_deref())
        }
        Command::Sweep {
            config,
            seed,
            scale,
            jobs,
            out,
        } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("cannot read {}", config.display()))?;
            let mut spec = cli::SweepSpec::parse(&text)?;
            if let Some(s) = seed {
                spec.base.seed = s;
            }
            if let Some(s) = scale {
                spec.base.scale = s;
            }
            let runs = spec.expand()?;
            for r in &runs {
                r.validate()?;
            }
            let reports = cli::run_all(&runs, jobs, base_dir(&config))?;
            write_table(&reports, out.as_deref())
        }
        Command::Presets { out } => {
            for path in cli::write_presets(&out)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Savings { volume_tb, ratio } => {
            println!("{}", cli::format_savings(volume_tb, ratio)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match execute(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
