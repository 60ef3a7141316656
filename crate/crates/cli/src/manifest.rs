//! JSON run manifests, written only after a command succeeds.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct SequenceStats {
    pub name: String,
    pub frames: u32,
    pub detections: usize,
    pub reports: usize,
    pub tracks: usize,
    pub tracker_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct TrackManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub detections: PathBuf,
    pub out: PathBuf,
    pub category: String,
    pub config: Option<PathBuf>,
    pub iou_gate: f64,
    pub max_age: u32,
    pub min_hits: u32,
    pub sequences: Vec<SequenceStats>,
    pub total_frames: u64,
    /// Sum of per-sequence tracker-loop time; file I/O excluded.
    pub tracker_seconds: f64,
    /// `total_frames / tracker_seconds`.
    pub fps: f64,
    pub size_clamps: u64,
    pub wall_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct EvalManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub gt: PathBuf,
    pub results: PathBuf,
    pub category: String,
    pub iou_gate: f64,
    pub recall_points: usize,
    pub sequences: Vec<EvalSequenceStats>,
    pub thresholds_evaluated: usize,
    pub samota: f64,
    pub amota: f64,
    pub amotp: f64,
    pub mota: f64,
    pub motp: f64,
    pub best_threshold: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub ids: u64,
    pub frag: u64,
    pub num_gt: u64,
    pub wall_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct EvalSequenceStats {
    pub name: String,
    pub frames: u32,
    pub gt_objects: usize,
    pub predictions: usize,
}

#[derive(Debug, Serialize)]
pub struct BenchManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub frames: u32,
    pub objects: usize,
    pub reps: u32,
    pub seed: u64,
    pub fps: Vec<f64>,
    pub mean_fps: f64,
    pub median_fps: f64,
}

pub const TOOL: &str = "ab3dmot";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value).context("cannot serialize manifest")?;
    std::fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
}
