use std::time::Instant;

use ab3dmot::synth::{generate, SceneConfig};
use ab3dmot::{Tracker, TrackerConfig};

use crate::manifest::{write_json, BenchManifest, TOOL, VERSION};
use crate::output::OutputGuard;
use crate::BenchArgs;

/// Frames per second of the tracker loop over every frame of the scene,
/// including frames without detections.
fn run_once(scene: &ab3dmot::synth::Scene, frames: u32, cfg: &TrackerConfig) -> f64 {
    let mut tracker = Tracker::new(cfg.clone());
    let start = Instant::now();
    for frame in 0..frames {
        let dets = scene.detections.get(&frame).map_or(&[][..], Vec::as_slice);
        std::hint::black_box(tracker.step(frame, dets).expect("frames increase"));
    }
    f64::from(frames) / start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE)
}

pub fn run(args: &BenchArgs) -> anyhow::Result<()> {
    let cfg = match &args.config {
        Some(path) => TrackerConfig::from_file(path)?,
        None => TrackerConfig::default(),
    };
    let scene = generate(&SceneConfig {
        frames: args.frames,
        objects: args.objects,
        seed: args.seed,
        ..SceneConfig::default()
    });
    let fps: Vec<f64> = (0..args.reps)
        .map(|_| run_once(&scene, args.frames, &cfg))
        .collect();
    let mean_fps = fps.iter().sum::<f64>() / fps.len() as f64;
    let mut sorted = fps.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median_fps = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    println!(
        "{} frames x {} objects, {} reps: mean {mean_fps:.1} FPS, median {median_fps:.1} FPS",
        args.frames, args.objects, args.reps
    );
    if let Some(out) = &args.out {
        let mut guard = OutputGuard::new();
        if let Some(parent) = out.parent() {
            guard.create_dir_all(parent)?;
        }
        guard.track_file(out);
        write_json(
            &BenchManifest {
                tool: TOOL,
                version: VERSION,
                command: "bench",
                frames: args.frames,
                objects: args.objects,
                reps: args.reps,
                seed: args.seed,
                fps,
                mean_fps,
                median_fps,
            },
            out,
        )?;
        guard.commit();
    }
    Ok(())
}
