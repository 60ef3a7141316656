//! Seeded inputs shared by the criterion benchmarks.

use std::f64::consts::PI;

use ab3dmot::synth::{generate, SceneConfig};
use ab3dmot::{run_sequence, Box3D, CostMatrix, EvalSequence, FrameGroups, TrackerConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Overlapping car-sized box pairs with random headings.
pub fn box_pairs(n: usize, seed: u64) -> Vec<(Box3D, Box3D)> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let a = Box3D::new(0.0, 1.6, 20.0, 4.2, 1.8, 1.5, rng.gen_range(-PI..PI)).unwrap();
            let b = Box3D::new(
                rng.gen_range(-2.0..2.0),
                1.6 + rng.gen_range(-0.3..0.3),
                20.0 + rng.gen_range(-2.0..2.0),
                rng.gen_range(3.5..4.8),
                rng.gen_range(1.6..2.0),
                rng.gen_range(1.4..1.7),
                rng.gen_range(-PI..PI),
            )
            .unwrap();
            (a, b)
        })
        .collect()
}

/// Square matrix of `-IoU`-like costs in `[-1, 0]`.
pub fn cost_matrix(n: usize, seed: u64) -> CostMatrix {
    let mut rng = StdRng::seed_from_u64(seed);
    CostMatrix::from_fn(n, n, |_, _| -rng.gen::<f64>()).unwrap()
}

/// A tracked synthetic scene ready for evaluation.
pub fn eval_sequence(frames: u32, objects: usize, seed: u64) -> EvalSequence {
    let scene = generate(&SceneConfig {
        frames,
        objects,
        position_noise: 0.2,
        miss_rate: 0.1,
        clutter_rate: 1.0,
        seed,
    });
    let reports = run_sequence(&TrackerConfig::default(), &scene.detections).unwrap();
    let mut preds = FrameGroups::new();
    for r in reports {
        preds.entry(r.frame).or_insert_with(Vec::new).push(r);
    }
    EvalSequence {
        name: format!("{seed:04}"),
        gt: scene.ground_truth,
        preds,
    }
}
