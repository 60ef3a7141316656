use std::path::PathBuf;
use std::time::Instant;

use ab3dmot::kitti::{read_detections, write_tracking_results};
use ab3dmot::{discover_sequences, Detection, FrameGroups, TrackReport, Tracker, TrackerConfig};
use anyhow::{bail, Context};
use rayon::prelude::*;

use crate::manifest::{write_json, SequenceStats, TrackManifest, TOOL, VERSION};
use crate::output::OutputGuard;
use crate::{with_jobs, TrackArgs};

struct Tracked {
    reports: Vec<TrackReport>,
    stats: SequenceStats,
    size_clamps: u64,
}

/// Tracks frames `0..=last`, timing only the tracker loop.
fn track_sequence(
    name: &str,
    cfg: &TrackerConfig,
    dets: &FrameGroups<Detection>,
) -> anyhow::Result<Tracked> {
    let frames = dets.keys().next_back().map_or(0, |&last| last + 1);
    let mut tracker = Tracker::new(cfg.clone());
    let mut reports = Vec::new();
    let start = Instant::now();
    for frame in 0..frames {
        let d = dets.get(&frame).map_or(&[][..], Vec::as_slice);
        reports.extend(
            tracker
                .step(frame, d)
                .with_context(|| format!("sequence {name}"))?,
        );
    }
    let tracker_seconds = start.elapsed().as_secs_f64();
    let mut ids: Vec<u64> = reports.iter().map(|r| r.id).collect();
    ids.sort_unstable();
    ids.dedup();
    Ok(Tracked {
        stats: SequenceStats {
            name: name.to_string(),
            frames,
            detections: dets.values().map(Vec::len).sum(),
            reports: reports.len(),
            tracks: ids.len(),
            tracker_seconds,
        },
        size_clamps: tracker.size_clamps(),
        reports,
    })
}

pub fn run(args: &TrackArgs) -> anyhow::Result<()> {
    let wall = Instant::now();
    let mut cfg = match &args.config {
        Some(path) => TrackerConfig::from_file(path)?,
        None => TrackerConfig::default(),
    };
    if let Some(gate) = args.iou_gate {
        cfg.iou_gate = gate;
        cfg.validate()?;
    }
    let sequences = discover_sequences(&args.detections)?;
    if sequences.is_empty() {
        bail!("no sequence files found in {}", args.detections.display());
    }
    log::info!(
        "tracking {} sequences from {}",
        sequences.len(),
        args.detections.display()
    );

    let category = args.common.category.as_str();
    let tracked: Vec<(String, Tracked)> = with_jobs(args.common.jobs, || {
        sequences
            .par_iter()
            .map(|(name, path)| {
                let dets = read_detections(path, Some(category))?;
                let t = track_sequence(name, &cfg, &dets)?;
                log::info!(
                    "sequence {name}: {} frames, {} reports, {} tracks",
                    t.stats.frames,
                    t.stats.reports,
                    t.stats.tracks
                );
                Ok((name.clone(), t))
            })
            .collect::<anyhow::Result<Vec<_>>>()
    })??;

    let mut guard = OutputGuard::new();
    guard
        .create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    for (name, t) in &tracked {
        let path: PathBuf = args.out.join(format!("{name}.txt"));
        guard.track_file(&path);
        write_tracking_results(&t.reports, category, &path)?;
    }

    let total_frames: u64 = tracked.iter().map(|(_, t)| u64::from(t.stats.frames)).sum();
    let tracker_seconds: f64 = tracked.iter().map(|(_, t)| t.stats.tracker_seconds).sum();
    let size_clamps = tracked.iter().map(|(_, t)| t.size_clamps).sum();
    if size_clamps > 0 {
        log::warn!("{size_clamps} filter size estimates were clamped to the minimum size");
    }
    let fps = if tracker_seconds > 0.0 {
        total_frames as f64 / tracker_seconds
    } else {
        0.0
    };
    let manifest = TrackManifest {
        tool: TOOL,
        version: VERSION,
        command: "track",
        detections: args.detections.clone(),
        out: args.out.clone(),
        category: category.to_string(),
        config: args.config.clone(),
        iou_gate: cfg.iou_gate,
        max_age: cfg.max_age,
        min_hits: cfg.min_hits,
        sequences: tracked.into_iter().map(|(_, t)| t.stats).collect(),
        total_frames,
        tracker_seconds,
        fps,
        size_clamps,
        wall_seconds: wall.elapsed().as_secs_f64(),
    };
    let manifest_path = args.out.join("manifest.json");
    guard.track_file(&manifest_path);
    write_json(&manifest, &manifest_path)?;
    guard.commit();
    println!(
        "tracked {} sequences, {total_frames} frames at {fps:.1} FPS (tracker only); results in {}",
        manifest.sequences.len(),
        args.out.display()
    );
    Ok(())
}
