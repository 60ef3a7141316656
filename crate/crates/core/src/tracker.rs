//! The online tracking loop: predict, associate by 3D IoU, update, birth, death.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::assignment::{solve_min_cost, CostMatrix};
use crate::config::TrackerConfig;
use crate::filter::{KalmanTrack, NoiseModel};
use crate::geometry::{iou3d, Box3D};

/// Items grouped by frame index; within a frame, input order is preserved.
pub type FrameGroups<T> = BTreeMap<u32, Vec<T>>;

/// One detector output.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub frame: u32,
    pub box3d: Box3D,
    /// Raw detector confidence; any finite value, only its order matters.
    pub score: f64,
    pub category: String,
}

impl Detection {
    pub fn new(frame: u32, box3d: Box3D, score: f64, category: impl Into<String>) -> Self {
        Self {
            frame,
            box3d,
            score,
            category: category.into(),
        }
    }
}

/// A confirmed track's post-update box in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackReport {
    pub frame: u32,
    pub id: u64,
    pub box3d: Box3D,
    pub score: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackerError {
    #[error("frames must strictly increase: got frame {got} after frame {previous}")]
    OutOfOrder { previous: u32, got: u32 },
    #[error("detection for frame {found} passed to step for frame {expected}")]
    FrameMismatch { expected: u32, found: u32 },
    #[error("detection score is not finite in frame {frame}")]
    NonFiniteScore { frame: u32 },
}

/// Tracker state for one sequence.
#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    noise: NoiseModel,
    tracks: Vec<KalmanTrack>,
    next_id: u64,
    last_frame: Option<u32>,
    retired_size_clamps: u64,
}

impl Tracker {
    pub fn new(config: TrackerConfig) -> Self {
        let noise = NoiseModel::new(&config.noise);
        Self {
            config,
            noise,
            tracks: Vec::new(),
            next_id: 1,
            last_frame: None,
            retired_size_clamps: 0,
        }
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    /// Live tracks, in creation (and therefore id) order.
    pub fn tracks(&self) -> &[KalmanTrack] {
        &self.tracks
    }

    /// Total size clamps applied by the filter so far, including deleted tracks.
    pub fn size_clamps(&self) -> u64 {
        self.retired_size_clamps
            + self
                .tracks
                .iter()
                .map(|t| u64::from(t.size_clamps))
                .sum::<u64>()
    }

    /// Processes one frame and returns the tracks reported for it.
    pub fn step(
        &mut self,
        frame: u32,
        detections: &[Detection],
    ) -> Result<Vec<TrackReport>, TrackerError> {
        if let Some(previous) = self.last_frame {
            if frame <= previous {
                return Err(TrackerError::OutOfOrder {
                    previous,
                    got: frame,
                });
            }
        }
        for d in detections {
            if d.frame != frame {
                return Err(TrackerError::FrameMismatch {
                    expected: frame,
                    found: d.frame,
                });
            }
            if !d.score.is_finite() {
                return Err(TrackerError::NonFiniteScore { frame });
            }
        }
        self.last_frame = Some(frame);

        for t in &mut self.tracks {
            t.predict(&self.noise);
        }

        let (matches, unmatched_dets) = self.associate(detections);
        let mut matched = vec![false; self.tracks.len()];
        for (ti, di) in matches {
            self.tracks[ti].update(&detections[di], &self.noise);
            matched[ti] = true;
        }
        for (t, m) in self.tracks.iter_mut().zip(&matched) {
            if !m {
                t.hit_streak = 0;
            }
        }

        for di in unmatched_dets {
            let track = KalmanTrack::new(&detections[di], self.next_id, &self.noise);
            self.next_id += 1;
            self.tracks.push(track);
        }

        let max_age = self.config.max_age;
        let mut retired = 0u64;
        self.tracks.retain(|t| {
            let keep = t.time_since_update <= max_age;
            if !keep {
                retired += u64::from(t.size_clamps);
            }
            keep
        });
        self.retired_size_clamps += retired;

        let min_hits = self.config.min_hits;
        let warmup = frame < min_hits;
        Ok(self
            .tracks
            .iter()
            .filter(|t| t.time_since_update == 0 && (t.hit_streak >= min_hits || warmup))
            .map(|t| TrackReport {
                frame,
                id: t.id,
                box3d: t.box3d(),
                score: t.score,
            })
            .collect())
    }

    /// Single Hungarian pass on `-IoU`, then gating.
    /// Returns `(track, detection)` matches and unmatched detection indices.
    fn associate(&self, detections: &[Detection]) -> (Vec<(usize, usize)>, Vec<usize>) {
        if self.tracks.is_empty() || detections.is_empty() {
            return (Vec::new(), (0..detections.len()).collect());
        }
        let predicted: Vec<Box3D> = self.tracks.iter().map(KalmanTrack::box3d).collect();
        let mut ious = vec![0.0; predicted.len() * detections.len()];
        for (i, p) in predicted.iter().enumerate() {
            for (j, d) in detections.iter().enumerate() {
                ious[i * detections.len() + j] = iou3d(p, &d.box3d);
            }
        }
        let cost = CostMatrix::new(
            predicted.len(),
            detections.len(),
            ious.iter().map(|v| -v).collect(),
        )
        .expect("IoU values are finite");

        let mut det_matched = vec![false; detections.len()];
        let mut matches = Vec::new();
        for (i, j) in solve_min_cost(&cost).pairs {
            if ious[i * detections.len() + j] >= self.config.iou_gate {
                det_matched[j] = true;
                matches.push((i, j));
            }
        }
        let unmatched = (0..detections.len()).filter(|&j| !det_matched[j]).collect();
        (matches, unmatched)
    }
}

/// Tracks a whole sequence from frame 0 through the last frame holding a
/// detection, feeding empty frames where nothing was detected.
pub fn run_sequence(
    config: &TrackerConfig,
    detections: &FrameGroups<Detection>,
) -> Result<Vec<TrackReport>, TrackerError> {
    let mut tracker = Tracker::new(config.clone());
    let mut reports = Vec::new();
    let Some(&last) = detections.keys().next_back() else {
        return Ok(reports);
    };
    for frame in 0..=last {
        let dets = detections.get(&frame).map_or(&[][..], Vec::as_slice);
        reports.extend(tracker.step(frame, dets)?);
    }
    Ok(reports)
}
