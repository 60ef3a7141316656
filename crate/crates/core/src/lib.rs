//! AB3DMOT: online 3D multi-object tracking with a constant-velocity Kalman
//! filter and Hungarian association on 3D IoU, plus a 3D MOT evaluator
//! (CLEAR metrics, sAMOTA, AMOTA, AMOTP).
//!
//! Boxes live in KITTI camera coordinates: x right, y down, z forward, the
//! box position at the center of its bottom face, and heading a rotation
//! about the y axis.

pub mod assignment;
pub mod config;
pub mod eval;
pub mod filter;
pub mod geometry;
pub mod kitti;
pub mod synth;
pub mod tracker;

pub use assignment::{solve_min_cost, Assignment, AssignmentError, CostMatrix};
pub use config::{ConfigError, TrackerConfig};
pub use eval::{
    accumulate_clear, evaluate, match_frame, metrics_from_counts, sweep_thresholds, ClearCounts,
    EvalConfig, EvalError, EvalReport, EvalSequence, IntegralMetrics, RecallPoint, ThresholdResult,
};
pub use filter::{KalmanTrack, NoiseConfig, NoiseModel};
pub use geometry::{
    convex_intersection_area, iou3d, normalize_angle, Box3D, GeometryError, Point2, Polygon2D,
};
pub use kitti::{discover_sequences, GtObject, KittiError};
pub use tracker::{run_sequence, Detection, FrameGroups, TrackReport, Tracker, TrackerError};
