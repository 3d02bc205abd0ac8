#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

mod config;
mod experiments;
mod output;
mod symbol;

use config::{ConfigError, ExperimentConfig};
use experiments::Failure;
use output::{write_atomic, FileEntry};

const VERSION: &str = env!("QE_VERSION");

#[derive(Parser)]
#[command(name = "qe", version = VERSION, about = "Quantum ergodicity experiment runner")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a TOML or JSON config.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'a str,
    config: &'a ExperimentConfig,
    seed: u64,
    wall_time_s: f64,
    files: Vec<FileEntry>,
    failures: Vec<Failure>,
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if seed.is_some() {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cfg: &ExperimentConfig, out: &Path) -> std::io::Result<bool> {
    let start = Instant::now();
    std::fs::create_dir_all(out)?;
    let seed = cfg.seed().unwrap_or(0);
    let res = experiments::run(cfg, out, seed);
    let ext = match cfg.format {
        config::Format::Csv => "csv",
        config::Format::Json => "json",
    };
    let mut files = res.files;
    for (name, t) in &res.extras {
        files.push(write_atomic(out, &format!("{name}.{ext}"), &t.render(cfg.format))?);
    }
    files.push(write_atomic(
        out,
        &format!("summary.{ext}"),
        &res.summary.render(cfg.format),
    )?);
    for f in &res.failures {
        eprintln!("point {} failed: {}", f.point, f.error);
    }
    let ok = res.failures.is_empty();
    let manifest = Manifest {
        version: VERSION,
        config: cfg,
        seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        files,
        failures: res.failures,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    bytes.push(b'\n');
    write_atomic(out, "manifest.json", &bytes)?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Validate { config } => match load(&config, None) {
            Ok(_) => {
                println!("ok");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(1)
            }
        },
        Cmd::Run { config, seed, out } => {
            let cfg = match load(&config, seed) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(1);
                }
            };
            let dir = out
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("out"));
            match run(&cfg, &dir) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(2),
                Err(e) => {
                    eprintln!("io error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
