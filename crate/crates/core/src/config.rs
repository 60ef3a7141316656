//! Tracker configuration and its flat `key = value` file format.
//!
//! ```text
//! # all keys optional
//! iou_gate = 0.1
//! max_age = 2
//! min_hits = 3
//! p0_scale = 1.0
//! q_scale = 1.0
//! r_scale = 1.0
//! ```

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::filter::NoiseConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config value: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    /// Minimum 3D IoU for a detection–track match.
    pub iou_gate: f64,
    /// Frames a track may go unmatched before deletion.
    pub max_age: u32,
    /// Consecutive matches before a track is reported (waived for frames
    /// `0..min_hits`).
    pub min_hits: u32,
    pub noise: NoiseConfig,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            iou_gate: 0.1,
            max_age: 2,
            min_hits: 3,
            noise: NoiseConfig::default(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    iou_gate: Option<f64>,
    max_age: Option<u32>,
    min_hits: Option<u32>,
    p0_scale: Option<f64>,
    q_scale: Option<f64>,
    r_scale: Option<f64>,
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.iou_gate) {
            return Err(ConfigError::Invalid(format!(
                "iou_gate must be in [0, 1], got {}",
                self.iou_gate
            )));
        }
        if self.min_hits < 1 {
            return Err(ConfigError::Invalid("min_hits must be at least 1".into()));
        }
        let n = &self.noise;
        for (key, v) in [
            ("p0_scale", n.p0_scale),
            ("q_scale", n.q_scale),
            ("r_scale", n.r_scale),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::Invalid(format!(
                    "{key} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let file: ConfigFile = toml::from_str(text)?;
        let d = Self::default();
        let cfg = Self {
            iou_gate: file.iou_gate.unwrap_or(d.iou_gate),
            max_age: file.max_age.unwrap_or(d.max_age),
            min_hits: file.min_hits.unwrap_or(d.min_hits),
            noise: NoiseConfig {
                p0_scale: file.p0_scale.unwrap_or(d.noise.p0_scale),
                q_scale: file.q_scale.unwrap_or(d.noise.q_scale),
                r_scale: file.r_scale.unwrap_or(d.noise.r_scale),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }
}
