use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};
use pdmp_lab::output::{write_report, write_timing};
use pdmp_lab::{parse_config, run_experiment, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "pdmp-lab", version, about = "Run reproducible PDMP experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV and JSON outputs.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Worker threads (results do not depend on it).
        #[arg(long)]
        workers: Option<usize>,
        /// Replace the seed given in the config.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
}

const EXIT_ROWS_FAILED: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;

fn load(path: &PathBuf) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_config(&text).with_context(|| format!("invalid config {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => match load(&config) {
            Ok(cfg) => {
                println!("{}: valid {} experiment", config.display(), cfg.kind);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e:#}");
                ExitCode::from(EXIT_BAD_INPUT)
            }
        },
        Command::Run {
            config,
            out,
            workers,
            seed_override,
        } => {
            let cfg = match load(&config) {
                Ok(cfg) => match seed_override {
                    Some(s) => cfg.with_seed(s),
                    None => cfg,
                },
                Err(e) => {
                    eprintln!("{e:#}");
                    return ExitCode::from(EXIT_BAD_INPUT);
                }
            };
            let start = Instant::now();
            let report = run_experiment(&cfg, RunOptions { workers });
            let elapsed = start.elapsed().as_secs_f64();
            print!("{}", report.summary());
            let written = write_report(&report, &out, &cfg.output)
                .and_then(|mut files| {
                    files.push(write_timing(&out, &cfg.output, elapsed, workers)?);
                    Ok(files)
                });
            match written {
                Ok(files) => {
                    for f in files {
                        println!("wrote {}", f.display());
                    }
                }
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_BAD_INPUT);
                }
            }
            let failed = report.failures().count();
            if failed == 0 {
                println!("all {} rows passed", report.rows.len());
                ExitCode::SUCCESS
            } else {
                println!("{failed} of {} rows failed", report.rows.len());
                ExitCode::from(EXIT_ROWS_FAILED)
            }
        }
    }
}
