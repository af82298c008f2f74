//! Pipeline tunables, read from a flat JSON object. Keys left out keep their
//! defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::segmenter::{ArrowParams, SegmentParams, SupportParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("malformed config: {0}")]
    Malformed(String),
    #[error("{key}: {reason}")]
    Invalid { key: &'static str, reason: String },
}

/// Joint erosion radius: derived from stroke width, or fixed in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SeRadius {
    #[default]
    Auto,
    Px(f64),
}

impl Serialize for SeRadius {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SeRadius::Auto => s.serialize_str("auto"),
            SeRadius::Px(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for SeRadius {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(SeRadius::Px(v)),
            Raw::Text(t) if t == "auto" => Ok(SeRadius::Auto),
            Raw::Text(t) => {
                Err(serde::de::Error::custom(format!("joint_se_radius must be \"auto\" or a number, got {t:?}")))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Components smaller than this many pixels are treated as text.
    pub small_region_min_area: usize,
    pub joint_se_radius: SeRadius,
    pub member_coverage_min: f64,
    pub arrow_line_similarity_min: f64,
    pub arrow_centroid_shift_min: f64,
    /// Fill-ratio band of support triangles after joint clear-out.
    pub support_band: [f64; 2],
    pub support_centroid_shift_min: f64,
    /// Roller probe dilation diameter as a fraction of the triangle size.
    pub roller_dilation_fraction: f64,
    pub roller_line_similarity_min: f64,
    /// Support apex attaches to a joint within this many joint radii.
    pub support_attach_factor: f64,
    /// Character box area band relative to the word mean, for slope fitting.
    pub ocr_area_band: [f64; 2],
    /// Mean and minimum character scores below which a reading is flagged.
    pub flip_thresholds: [f64; 2],
    pub word_dilation_radius: f64,
    /// Residual specks below this area are dropped before arrow detection.
    pub residual_min_area: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            small_region_min_area: 180,
            joint_se_radius: SeRadius::Auto,
            member_coverage_min: 0.90,
            arrow_line_similarity_min: 0.95,
            arrow_centroid_shift_min: 0.01,
            support_band: [0.65, 0.75],
            support_centroid_shift_min: 0.01,
            roller_dilation_fraction: 0.20,
            roller_line_similarity_min: 0.95,
            support_attach_factor: 3.0,
            ocr_area_band: [0.5, 1.4],
            flip_thresholds: [0.5, 0.3],
            word_dilation_radius: 8.0,
            residual_min_area: 20,
        }
    }
}

fn unit(key: &'static str, v: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ConfigError::Invalid { key, reason: format!("{v} is outside [0, 1]") })
    }
}

fn positive(key: &'static str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Invalid { key, reason: format!("{v} must be positive") })
    }
}

fn band(key: &'static str, b: [f64; 2]) -> Result<(), ConfigError> {
    if !(b[0].is_finite() && b[1].is_finite() && b[0] >= 0.0) {
        return Err(ConfigError::Invalid { key, reason: "band values must be finite and non-negative".into() });
    }
    if b[0] > b[1] {
        return Err(ConfigError::Invalid { key, reason: "band not ordered".into() });
    }
    Ok(())
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let c: Config = serde_json::from_str(text).map_err(|e| ConfigError::Malformed(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let SeRadius::Px(r) = self.joint_se_radius {
            positive("joint_se_radius", r)?;
        }
        unit("member_coverage_min", self.member_coverage_min)?;
        unit("arrow_line_similarity_min", self.arrow_line_similarity_min)?;
        unit("arrow_centroid_shift_min", self.arrow_centroid_shift_min)?;
        band("support_band", self.support_band)?;
        unit("support_band", self.support_band[1])?;
        unit("support_centroid_shift_min", self.support_centroid_shift_min)?;
        unit("roller_dilation_fraction", self.roller_dilation_fraction)?;
        unit("roller_line_similarity_min", self.roller_line_similarity_min)?;
        positive("support_attach_factor", self.support_attach_factor)?;
        band("ocr_area_band", self.ocr_area_band)?;
        unit("flip_thresholds", self.flip_thresholds[0])?;
        unit("flip_thresholds", self.flip_thresholds[1])?;
        positive("word_dilation_radius", self.word_dilation_radius)?;
        Ok(())
    }

    pub fn segment_params(&self) -> SegmentParams {
        SegmentParams {
            se_radius: match self.joint_se_radius {
                SeRadius::Auto => None,
                SeRadius::Px(r) => Some(r),
            },
            coverage_min: self.member_coverage_min,
            residual_min_area: self.residual_min_area,
            arrows: ArrowParams {
                line_similarity_min: self.arrow_line_similarity_min,
                centroid_shift_min: self.arrow_centroid_shift_min,
            },
            supports: SupportParams {
                fill_band: (self.support_band[0], self.support_band[1]),
                centroid_shift_min: self.support_centroid_shift_min,
                dilation_fraction: self.roller_dilation_fraction,
                line_similarity_min: self.roller_line_similarity_min,
                attach_factor: self.support_attach_factor,
            },
        }
    }
}

/// Defaults when `path` is `None`, otherwise the file merged over them.
pub fn load_config(path: Option<&Path>) -> Result<Config, ConfigError> {
    let Some(path) = path else { return Ok(Config::default()) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), reason: e.to_string() })?;
    Config::from_json(&text)
}
