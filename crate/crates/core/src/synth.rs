//! Seeded synthetic scenes: cars moving at constant velocity, observed by a
//! noisy detector with misses and clutter. Used by tests, benches and the CLI.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::geometry::{normalize_angle, Box3D};
use crate::kitti::GtObject;
use crate::tracker::{Detection, FrameGroups};

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub frames: u32,
    pub objects: usize,
    /// Standard deviation of detector position noise, metres.
    pub position_noise: f64,
    /// Probability a visible object is not detected in a frame.
    pub miss_rate: f64,
    /// Expected false detections per frame.
    pub clutter_rate: f64,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            frames: 100,
            objects: 5,
            position_noise: 0.05,
            miss_rate: 0.0,
            clutter_rate: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Scene {
    pub detections: FrameGroups<Detection>,
    pub ground_truth: FrameGroups<GtObject>,
}

struct Mover {
    x: f64,
    z: f64,
    vx: f64,
    vz: f64,
    l: f64,
    w: f64,
    h: f64,
    theta: f64,
}

/// Objects start on separate lanes (8 m apart in x) so that true boxes never
/// overlap; each moves along its lane with a small lateral drift.
pub fn generate(cfg: &SceneConfig) -> Scene {
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let movers: Vec<Mover> = (0..cfg.objects)
        .map(|i| {
            let speed = rng.gen_range(-1.5..1.5);
            Mover {
                x: (i as f64 - cfg.objects as f64 / 2.0) * 8.0,
                z: rng.gen_range(10.0..60.0),
                vx: rng.gen_range(-0.02..0.02),
                vz: speed,
                l: rng.gen_range(3.5..4.8),
                w: rng.gen_range(1.6..2.0),
                h: rng.gen_range(1.4..1.7),
                theta: if speed >= 0.0 {
                    0.0
                } else {
                    std::f64::consts::PI
                },
            }
        })
        .collect();

    let clutter_count = (cfg.clutter_rate > 0.0)
        .then(|| Poisson::new(cfg.clutter_rate).expect("positive clutter rate"));
    let mut scene = Scene::default();
    for frame in 0..cfg.frames {
        let t = f64::from(frame);
        for (i, m) in movers.iter().enumerate() {
            let (x, z) = (m.x + m.vx * t, m.z + m.vz * t);
            let truth = Box3D::new(x, 1.6, z, m.l, m.w, m.h, m.theta).expect("valid synthetic box");
            scene.ground_truth.entry(frame).or_default().push(GtObject {
                frame,
                track_id: i as i64,
                category: "Car".into(),
                truncated: 0.0,
                occluded: 0.0,
                alpha: 0.0,
                bbox2d: [0.0; 4],
                box3d: Some(truth),
            });
            if rng.gen::<f64>() < cfg.miss_rate {
                continue;
            }
            let n = cfg.position_noise;
            let noisy = Box3D::new(
                x + n * gauss(&mut rng),
                1.6 + n * gauss(&mut rng),
                z + n * gauss(&mut rng),
                m.l,
                m.w,
                m.h,
                normalize_angle(m.theta + 0.02 * gauss(&mut rng)),
            )
            .expect("valid synthetic box");
            let score = rng.gen_range(2.0..10.0);
            scene
                .detections
                .entry(frame)
                .or_default()
                .push(Detection::new(frame, noisy, score, "Car"));
        }
        let clutter = clutter_count.map_or(0.0, |p| p.sample(&mut rng));
        for _ in 0..clutter as usize {
            let b = Box3D::new(
                rng.gen_range(-40.0..40.0),
                1.6,
                rng.gen_range(5.0..70.0),
                rng.gen_range(3.0..5.0),
                rng.gen_range(1.5..2.0),
                1.5,
                rng.gen_range(-3.0..3.0),
            )
            .expect("valid synthetic box");
            let score = rng.gen_range(-2.0..3.0);
            scene
                .detections
                .entry(frame)
                .or_default()
                .push(Detection::new(frame, b, score, "Car"));
        }
    }
    scene
}

fn gauss(rng: &mut StdRng) -> f64 {
    StandardNormal.sample(rng)
}
