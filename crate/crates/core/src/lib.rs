//! Multi-object tracking by flowing targets through dense optical flow and
//! fusing them with per-frame detections.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`] and [`track`]: boxes, detections, targets, trajectories.
//! - [`flow`]: per-target motion pooled from a dense flow field.
//! - [`nms`], [`refine`] and [`fuse`]: proposal refinement and two-level fusion.
//! - [`pipeline`]: the per-frame loop, including lookback re-attachment.
//! - [`metrics`]: CLEAR MOT and identity metrics with a Hungarian solver.
//! - [`io`]: MOTChallenge text files, `.flo` flow files, sequence info.
//! - [`synth`]: seeded synthetic sequences with analytic flow.
//! - [`config`] and [`render`]: config files and PPM overlays.

pub mod config;
pub mod flow;
pub mod fuse;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod nms;
pub mod pipeline;
pub mod refine;
pub mod render;
pub mod synth;
pub mod track;

pub use flow::{FlowField, FlowSource, MotionEstimatorConfig, ScaleMode};
pub use fuse::{FuseConfig, FuseOutcome};
pub use geometry::{apply_motion, clip_to_frame, iou, BBox, Motion};
pub use pipeline::{FrameBundle, PipelineConfig, PipelineError};
pub use refine::{FileRefiner, IdentityRefiner, OverlapRefiner, Refiner};
pub use track::{Detection, Target, TrackId, Trajectory, TrajectorySet};
