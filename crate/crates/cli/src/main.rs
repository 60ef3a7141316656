//! `ab3dmot`: track KITTI detections, evaluate tracking results, and measure
//! tracker throughput.

mod bench;
mod evaluate;
mod manifest;
mod output;
mod track;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "ab3dmot",
    version,
    about = "Online 3D multi-object tracking and 3D MOT evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Track every `NNNN.txt` detection file in a directory.
    Track(TrackArgs),
    /// Evaluate tracking results against KITTI tracking labels.
    Eval(EvalArgs),
    /// Measure tracker throughput on a synthetic scene.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Object category to process (case-insensitive).
    #[arg(long, default_value = "Car")]
    pub category: String,
    /// Worker threads for per-sequence parallelism (default: all cores).
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    /// Directory of per-sequence KITTI detection files.
    #[arg(long)]
    pub detections: PathBuf,
    /// Output directory for per-sequence result files and `manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Tracker configuration file (`key = value` lines).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Association gate; overrides the config file.
    #[arg(long)]
    pub iou_gate: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory of per-sequence KITTI tracking label files.
    #[arg(long)]
    pub gt: PathBuf,
    /// Directory of per-sequence tracking result files.
    #[arg(long)]
    pub results: PathBuf,
    /// Minimum 3D IoU for a prediction to match ground truth.
    #[arg(long, default_value_t = ab3dmot::eval::DEFAULT_MIN_IOU)]
    pub iou_gate: f64,
    /// Number of recall targets in the integral metrics.
    #[arg(long, default_value_t = ab3dmot::eval::DEFAULT_RECALL_POINTS)]
    pub recall_points: usize,
    /// Write the per-recall-point curve to this CSV file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write a JSON run manifest with the metrics to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u32).range(1..))]
    pub frames: u32,
    #[arg(long, default_value_t = 5)]
    pub objects: usize,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub reps: u32,
    /// Seed for scene generation.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tracker configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the throughput report as JSON to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("AB3DMOT_LOG", "warn"))
        .format_timestamp(None)
        .init();
}

/// Runs `f` on a pool limited to `jobs` threads, or the global pool.
pub fn with_jobs<T: Send>(jobs: Option<u16>, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(usize::from(n))
                .build()
                .context("cannot start worker threads")?;
            Ok(pool.install(f))
        }
    }
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Track(args) => track::run(&args),
        Command::Eval(args) => evaluate::run(&args),
        Command::Bench(args) => bench::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
