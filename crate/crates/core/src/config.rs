//! Pipeline configuration files.
//!
//! A flat TOML table whose keys are all optional:
//!
//! ```toml
//! thresh_score = 0.5
//! thresh_iou = 0.5
//! thresh_nms = 0.5
//! bt_frames = 30
//! inner_margin_ratio = 0.1
//! min_pixels = 16
//! scale_mode = "affine_fit"   # or "none"
//! ```
//!
//! Values resolve as command line over file over default.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::ScaleMode;
use crate::pipeline::{PipelineConfig, PipelineError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Invalid(#[from] PipelineError),
}

/// A partial configuration; unset fields defer to a lower layer.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub thresh_score: Option<f64>,
    pub thresh_iou: Option<f64>,
    pub thresh_nms: Option<f64>,
    pub bt_frames: Option<usize>,
    pub inner_margin_ratio: Option<f64>,
    pub min_pixels: Option<usize>,
    pub scale_mode: Option<ScaleMode>,
}

impl Overrides {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Fields set here win over those of `lower`.
    pub fn over(self, lower: Overrides) -> Overrides {
        Overrides {
            thresh_score: self.thresh_score.or(lower.thresh_score),
            thresh_iou: self.thresh_iou.or(lower.thresh_iou),
            thresh_nms: self.thresh_nms.or(lower.thresh_nms),
            bt_frames: self.bt_frames.or(lower.bt_frames),
            inner_margin_ratio: self.inner_margin_ratio.or(lower.inner_margin_ratio),
            min_pixels: self.min_pixels.or(lower.min_pixels),
            scale_mode: self.scale_mode.or(lower.scale_mode),
        }
    }

    /// Applies the set fields onto `base` and validates the result.
    pub fn apply(&self, base: PipelineConfig) -> Result<PipelineConfig, ConfigError> {
        let mut c = base;
        if let Some(v) = self.thresh_score {
            c.fuse.thresh_score = v;
        }
        if let Some(v) = self.thresh_iou {
            c.fuse.thresh_iou = v;
        }
        if let Some(v) = self.thresh_nms {
            c.fuse.thresh_nms = v;
        }
        if let Some(v) = self.bt_frames {
            c.bt_frames = v;
        }
        if let Some(v) = self.inner_margin_ratio {
            c.motion.inner_margin_ratio = v;
        }
        if let Some(v) = self.min_pixels {
            c.motion.min_pixels = v;
        }
        if let Some(v) = self.scale_mode {
            c.motion.scale_mode = v;
        }
        c.validate()?;
        Ok(c)
    }
}

/// The defaults written out as a complete config file.
pub fn default_config_toml() -> String {
    let d = PipelineConfig::default();
    let o = Overrides {
        thresh_score: Some(d.fuse.thresh_score),
        thresh_iou: Some(d.fuse.thresh_iou),
        thresh_nms: Some(d.fuse.thresh_nms),
        bt_frames: Some(d.bt_frames),
        inner_margin_ratio: Some(d.motion.inner_margin_ratio),
        min_pixels: Some(d.motion.min_pixels),
        scale_mode: Some(d.motion.scale_mode),
    };
    toml::to_string(&o).expect("plain table serializes")
}
