//! Command-line front end: configuration, result bundles, CSV/JSON/SVG
//! output and the command runner behind the `weyl-lab` binary.
//!
//! Every command reads a [`RunConfig`], runs one experiment and writes
//! `<command>.json` (a [`ResultBundle`]), CSV data and SVG plots into the
//! output directory. Wall time goes to `<command>.meta.json` so the bundle
//! itself is byte-identical across runs with the same config and seed.

mod commands;
pub mod config;
pub mod svg;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::Serialize;

pub use commands::{execute, Artifacts};
pub use config::{RunConfig, System};
pub use svg::{plot_field, plot_series, PlotStyle, Series};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Pressure,
    Dimension,
    SigmaCurve,
    BilliardOrbits,
    Spectrum,
    WeylFit,
    Propagate,
    HusimiFrames,
    TraceCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Pressure => "pressure",
            Command::Dimension => "dimension",
            Command::SigmaCurve => "sigma-curve",
            Command::BilliardOrbits => "billiard-orbits",
            Command::Spectrum => "spectrum",
            Command::WeylFit => "weyl-fit",
            Command::Propagate => "propagate",
            Command::HusimiFrames => "husimi-frames",
            Command::TraceCheck => "trace-check",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Svg,
    All,
}

/// Pressure, dimensions, spectra and coherent-state experiments for open
/// baker maps and disk billiards.
#[derive(Clone, Debug, Parser)]
#[command(name = "weyl-lab", version)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// RNG seed; overrides `rng_seed` from the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value = "all")]
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultBundle {
    pub command: &'static str,
    pub tool_version: &'static str,
    pub rng_seed: u64,
    /// The configuration file exactly as read.
    pub config: String,
    pub payload: serde_json::Value,
    #[serde(skip)]
    pub wall_time_s: f64,
}

#[derive(Serialize)]
struct Metadata {
    command: &'static str,
    wall_time_s: f64,
}

/// Process exit status for an error: 2 for configuration problems, 1 for
/// everything raised by the numerics.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ConfigParse(_) => 2,
        _ => 1,
    }
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, bytes)?;
    Ok(path)
}

/// Runs one command and writes its outputs; returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let (cfg, text) = RunConfig::load(&cli.config)?;
    let seed = cli.seed.unwrap_or(cfg.rng_seed);
    let out_dir = cli.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let artifacts = pool.install(|| execute(cli.command, &cfg, seed))?;
    let bundle = ResultBundle {
        command: cli.command.name(),
        tool_version: env!("CARGO_PKG_VERSION"),
        rng_seed: seed,
        config: text,
        payload: artifacts.payload,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    std::fs::create_dir_all(&out_dir)?;
    let mut written = Vec::new();
    let want = |f: OutputFormat| cli.format == f || cli.format == OutputFormat::All;
    if want(OutputFormat::Json) {
        let body = serde_json::to_string_pretty(&bundle).map_err(|e| Error::Serialization(e.to_string()))?;
        written.push(write_file(&out_dir, &format!("{}.json", bundle.command), (body + "\n").as_bytes())?);
        let meta = Metadata { command: bundle.command, wall_time_s: bundle.wall_time_s };
        let body = serde_json::to_string_pretty(&meta).map_err(|e| Error::Serialization(e.to_string()))?;
        written.push(write_file(&out_dir, &format!("{}.meta.json", bundle.command), (body + "\n").as_bytes())?);
    }
    if want(OutputFormat::Csv) {
        for (name, bytes) in &artifacts.csv {
            written.push(write_file(&out_dir, name, bytes)?);
        }
    }
    if want(OutputFormat::Svg) {
        for (name, body) in &artifacts.svg {
            written.push(write_file(&out_dir, name, body.as_bytes())?);
        }
    }
    log::info!("{} finished in {:.2}s, {} files in {}", bundle.command, bundle.wall_time_s, written.len(), out_dir.display());
    Ok(written)
}

/// Parses arguments, runs, reports errors on standard error and returns the
/// exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("{e}");
            exit_code(&e)
        }
    }
}
