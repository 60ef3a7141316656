//! Constant-velocity Kalman filter over the 10-dimensional box state
//! `[x, y, z, θ, l, w, h, vx, vy, vz]`.
//!
//! The observation is the first seven components (a box). Velocities are never
//! observed directly; they move only through the state cross-covariance.
//! One step is one frame.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::geometry::{normalize_angle, Box3D};
use crate::tracker::Detection;

pub const STATE_DIM: usize = 10;
pub const OBS_DIM: usize = 7;

pub type StateVector = SVector<f64, STATE_DIM>;
pub type StateCovariance = SMatrix<f64, STATE_DIM, STATE_DIM>;
pub type Observation = SVector<f64, OBS_DIM>;
type ObsCovariance = SMatrix<f64, OBS_DIM, OBS_DIM>;

const THETA: usize = 3;
const SIZE: std::ops::Range<usize> = 4..7;
const VELOCITY: std::ops::Range<usize> = 7..10;

/// Sizes are clamped to this floor when an update drives them non-positive.
pub const MIN_SIZE: f64 = 0.01;

/// Scalar multipliers applied to the default noise matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub p0_scale: f64,
    pub q_scale: f64,
    pub r_scale: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            p0_scale: 1.0,
            q_scale: 1.0,
            r_scale: 1.0,
        }
    }
}

/// Initial covariance, process noise and measurement noise.
///
/// Defaults: `P0 = 10·I` with the velocity diagonal ×1000, `Q = I` with the
/// velocity diagonal ×0.01 and no process noise on size, `R = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub initial_covariance: StateCovariance,
    pub process_noise: StateCovariance,
    pub measurement_noise: ObsCovariance,
}

impl NoiseModel {
    pub fn new(cfg: &NoiseConfig) -> Self {
        let mut p0 = StateCovariance::identity() * 10.0;
        let mut q = StateCovariance::identity();
        for k in VELOCITY {
            p0[(k, k)] *= 1000.0;
            q[(k, k)] *= 0.01;
        }
        for k in SIZE {
            q[(k, k)] = 0.0;
        }
        Self {
            initial_covariance: p0 * cfg.p0_scale,
            process_noise: q * cfg.q_scale,
            measurement_noise: ObsCovariance::identity() * cfg.r_scale,
        }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::new(&NoiseConfig::default())
    }
}

/// Kalman state of one tracked object together with its lifecycle counters.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanTrack {
    pub id: u64,
    pub state: StateVector,
    pub covariance: StateCovariance,
    /// Total matched updates, including the birth detection.
    pub hits: u32,
    /// Consecutive frames with a matched update.
    pub hit_streak: u32,
    pub time_since_update: u32,
    /// Score of the most recent matched detection.
    pub score: f64,
    /// Number of times a size component had to be clamped to [`MIN_SIZE`].
    pub size_clamps: u32,
}

pub fn observation_of(b: &Box3D) -> Observation {
    Observation::from([b.x(), b.y(), b.z(), b.theta(), b.l(), b.w(), b.h()])
}

impl KalmanTrack {
    pub fn new(detection: &Detection, id: u64, noise: &NoiseModel) -> Self {
        let obs = observation_of(&detection.box3d);
        let mut state = StateVector::zeros();
        state.fixed_rows_mut::<OBS_DIM>(0).copy_from(&obs);
        Self {
            id,
            state,
            covariance: noise.initial_covariance,
            hits: 1,
            hit_streak: 1,
            time_since_update: 0,
            score: detection.score,
            size_clamps: 0,
        }
    }

    /// Advances one frame: `x ← F·x`, `P ← F·P·Fᵀ + Q`.
    pub fn predict(&mut self, noise: &NoiseModel) {
        for k in 0..3 {
            self.state[k] += self.state[VELOCITY.start + k];
        }
        self.state[THETA] = normalize_angle(self.state[THETA]);

        // F = I + E where E copies velocity rows into position rows, so
        // F·P·Fᵀ = P + E·P + P·Eᵀ + E·P·Eᵀ. Done in place on the 3×3 blocks.
        let p = &mut self.covariance;
        for i in 0..3 {
            let vi = VELOCITY.start + i;
            for c in 0..STATE_DIM {
                let add = p[(vi, c)];
                p[(i, c)] += add;
            }
        }
        for i in 0..3 {
            let vi = VELOCITY.start + i;
            for r in 0..STATE_DIM {
                let add = p[(r, vi)];
                p[(r, i)] += add;
            }
        }
        *p += noise.process_noise;
        self.time_since_update += 1;
    }

    /// Kalman correction with a matched detection.
    ///
    /// The heading residual is wrapped into `(-π, π]`; if it still exceeds
    /// π/2 in magnitude the detection heading is flipped by π, since a box's
    /// footprint is unchanged by a half turn.
    pub fn update(&mut self, detection: &Detection, noise: &NoiseModel) {
        let mut z = observation_of(&detection.box3d);
        let predicted_theta = self.state[THETA];
        let mut residual = normalize_angle(z[THETA] - predicted_theta);
        if residual.abs() > std::f64::consts::FRAC_PI_2 {
            z[THETA] = normalize_angle(z[THETA] + std::f64::consts::PI);
            residual = normalize_angle(z[THETA] - predicted_theta);
        }

        let mut innovation: Observation = z - self.state.fixed_rows::<OBS_DIM>(0);
        innovation[THETA] = residual;

        // H selects the first seven components: H·P = P[0..7, :], S = P[0..7, 0..7] + R.
        let p_top = self.covariance.fixed_rows::<OBS_DIM>(0).into_owned();
        let s: ObsCovariance =
            self.covariance.fixed_view::<OBS_DIM, OBS_DIM>(0, 0) + noise.measurement_noise;
        let Some(chol) = s.cholesky() else {
            log::warn!(
                "track {}: innovation covariance not positive definite",
                self.id
            );
            return;
        };
        // K = P·Hᵀ·S⁻¹ = (S⁻¹·H·P)ᵀ since S and P are symmetric.
        let gain: SMatrix<f64, STATE_DIM, OBS_DIM> = chol.solve(&p_top).transpose();

        self.state += gain * innovation;
        self.state[THETA] = normalize_angle(self.state[THETA]);

        // Joseph form keeps P symmetric PSD: (I-KH)·P·(I-KH)ᵀ + K·R·Kᵀ.
        let mut i_kh = StateCovariance::identity();
        let mut kh_cols = i_kh.fixed_columns_mut::<OBS_DIM>(0);
        kh_cols -= gain;
        let p = i_kh * self.covariance * i_kh.transpose()
            + gain * noise.measurement_noise * gain.transpose();
        self.covariance = (p + p.transpose()) * 0.5;

        for k in SIZE {
            if self.state[k] < MIN_SIZE {
                self.state[k] = MIN_SIZE;
                self.size_clamps += 1;
            }
        }

        self.hits += 1;
        self.hit_streak += 1;
        self.time_since_update = 0;
        self.score = detection.score;
    }

    /// Current box estimate.
    pub fn box3d(&self) -> Box3D {
        let s = &self.state;
        Box3D::new(
            s[0],
            s[1],
            s[2],
            s[4].max(MIN_SIZE),
            s[5].max(MIN_SIZE),
            s[6].max(MIN_SIZE),
            s[THETA],
        )
        .expect("filter state stays finite")
    }

    pub fn velocity(&self) -> [f64; 3] {
        [self.state[7], self.state[8], self.state[9]]
    }
}
