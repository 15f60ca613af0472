//! The frame-by-frame tracking loop.
//!
//! Frame 0 seeds one trajectory per refined detection. Every later frame
//! refines its detections, flows the previous frame's targets forward, fuses
//! the two, then tries to re-attach leftover detections to trajectories that
//! went missing by flowing their last box directly from up to `bt_frames`
//! frames back. Detections still unclaimed start new trajectories.

use std::borrow::Cow;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::flow::{flow_targets, FlowError, FlowField, FlowLoadError, FlowSource, MotionEstimatorConfig};
use crate::fuse::{fuse, refine_and_kill, FuseConfig, FuseError};
use crate::geometry::{iou, BBox};
use crate::nms::nms;
use crate::refine::{Proposal, Refiner};
use crate::track::{Detection, Target, TrackError, TrackId, TrajectorySet};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("flow for frame {frame} at depth {depth} is missing")]
    MissingFlow { frame: usize, depth: usize },
    #[error(transparent)]
    FlowLoad(#[from] FlowLoadError),
    #[error(transparent)]
    Fuse(#[from] FuseError),
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error("invalid pipeline config: {0}")]
    InvalidConfig(String),
    #[error("step called for frame {0}; frame 0 goes through init")]
    FrameZero(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub fuse: FuseConfig,
    /// Deepest lookback tried when re-attaching detections; 1 disables it.
    pub bt_frames: usize,
    pub motion: MotionEstimatorConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            fuse: FuseConfig::default(),
            bt_frames: DEFAULT_BT_FRAMES,
            motion: MotionEstimatorConfig::default(),
        }
    }
}

pub const DEFAULT_BT_FRAMES: usize = 30;

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.bt_frames == 0 {
            return Err(PipelineError::InvalidConfig("bt_frames must be >= 1".into()));
        }
        self.fuse
            .validate()
            .map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
        self.motion
            .validate()
            .map_err(|e: FlowError| PipelineError::InvalidConfig(e.to_string()))
    }
}

/// Lookback depth by video frame rate: 3 below 7 fps, 10 below 14 fps, else 30.
pub fn bt_frames_for_fps(fps: f64) -> usize {
    if fps < 7.0 {
        3
    } else if fps < 14.0 {
        10
    } else {
        30
    }
}

/// In-memory inputs for one frame.
#[derive(Debug, Clone, Default)]
pub struct FrameBundle {
    pub frame: usize,
    /// Flow from `frame - 1` to `frame`.
    pub flow_prev: Option<FlowField>,
    /// Flow from `frame - d` to `frame`, keyed by `d >= 2`.
    pub lookback: BTreeMap<usize, FlowField>,
    pub detections: Vec<Detection>,
}

impl FlowSource for FrameBundle {
    fn flow(&self, to: usize, depth: usize) -> Result<Option<Cow<'_, FlowField>>, FlowLoadError> {
        if to != self.frame {
            return Ok(None);
        }
        let f = if depth == 1 {
            self.flow_prev.as_ref()
        } else {
            self.lookback.get(&depth)
        };
        Ok(f.map(Cow::Borrowed))
    }
}

/// Serves each frame's flows from its own bundle.
impl FlowSource for &[FrameBundle] {
    fn flow(&self, to: usize, depth: usize) -> Result<Option<Cow<'_, FlowField>>, FlowLoadError> {
        match self.iter().find(|b| b.frame == to) {
            Some(b) => b.flow(to, depth),
            None => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameStats {
    pub frame: usize,
    /// Detections left after refinement, killing and NMS.
    pub detections: usize,
    /// Trajectories extended by flowing and fusing.
    pub tracked: usize,
    /// Trajectories re-attached by lookback.
    pub revived: usize,
    /// New trajectories.
    pub minted: usize,
}

fn non_degenerate(dets: &[Detection]) -> Vec<Detection> {
    dets.iter().copied().filter(|d| !d.bbox.is_degenerate()).collect()
}

/// Refines detections, kills low scores and applies frame-wise NMS.
/// Survivors keep input order.
pub fn refine_detections(
    frame: usize,
    detections: &[Detection],
    refiner: &dyn Refiner,
    cfg: &FuseConfig,
) -> Result<Vec<Detection>, PipelineError> {
    let props: Vec<Proposal> = detections.iter().map(Proposal::detection).collect();
    let scored = refine_and_kill(frame, &props, refiner, cfg)?;
    let boxes: Vec<(BBox, f64)> = scored.iter().map(|s| (s.bbox, s.score)).collect();
    let mut keep = nms(&boxes, cfg.thresh_nms);
    keep.sort_unstable();
    Ok(keep
        .into_iter()
        .map(|k| Detection {
            bbox: scored[k].bbox,
            score: scored[k].score,
        })
        .collect())
}

/// Seeds the trajectory set from frame 0, issuing ids in detection order.
pub fn init(
    detections: &[Detection],
    refiner: &dyn Refiner,
    cfg: &PipelineConfig,
) -> Result<TrajectorySet, PipelineError> {
    cfg.validate()?;
    let mut set = TrajectorySet::new();
    for d in refine_detections(0, &non_degenerate(detections), refiner, &cfg.fuse)? {
        set.mint(0, d.bbox, d.score)?;
    }
    Ok(set)
}

/// Re-attaches `unmatched` detections at `frame` to trajectories in `missing`.
///
/// Depths are tried nearest first. At depth `d`, only trajectories whose last
/// entry is exactly at `frame - d` take part; their box is flowed straight to
/// `frame` with the depth-`d` field and fused with the detections still
/// unclaimed. Only targets backed by a detection are revived. Depths whose
/// field is unavailable are skipped.
pub fn backtrack(
    set: &TrajectorySet,
    missing: &[TrackId],
    unmatched: &[Detection],
    frame: usize,
    flows: &dyn FlowSource,
    refiner: &dyn Refiner,
    cfg: &PipelineConfig,
) -> Result<(Vec<Target>, Vec<Detection>), PipelineError> {
    let mut remaining = unmatched.to_vec();
    let mut revived = Vec::new();
    let mut occupied: Vec<BBox> = set.targets_at(frame).iter().map(|t| t.bbox).collect();

    let mut missing = missing.to_vec();
    missing.sort_unstable();
    missing.dedup();

    for depth in 2..=cfg.bt_frames {
        if remaining.is_empty() || depth > frame {
            break;
        }
        let from = frame - depth;
        let stale: Vec<Target> = missing
            .iter()
            .filter_map(|&id| set.get(id))
            .filter(|t| t.get(frame).is_none() && t.last_frame() == Some(from))
            .filter_map(|t| t.target_at(from))
            .collect();
        if stale.is_empty() {
            continue;
        }
        let Some(flow) = flows.flow(frame, depth)? else {
            log::debug!("frame {frame}: no flow at depth {depth}, skipped");
            continue;
        };
        let moved: Vec<Target> = flow_targets(&flow, &stale, &cfg.motion, frame)
            .into_iter()
            .filter(|t| !t.bbox.is_degenerate())
            .collect();
        if moved.is_empty() {
            continue;
        }
        let out = fuse(&moved, &remaining, refiner, frame, &cfg.fuse)?;
        let mut keep = out.unmatched_indices.clone();
        for ft in out.tracked {
            let clear = occupied
                .iter()
                .all(|b| iou(b, &ft.target.bbox) <= cfg.fuse.thresh_nms);
            if ft.matched && clear {
                occupied.push(ft.target.bbox);
                revived.push(ft.target);
            } else {
                keep.extend(ft.absorbed);
            }
        }
        keep.sort_unstable();
        remaining = keep.into_iter().map(|i| remaining[i]).collect();
    }
    Ok((revived, remaining))
}

/// Processes one frame `>= 1`, updating `set` in place.
pub fn step(
    set: &mut TrajectorySet,
    frame: usize,
    detections: &[Detection],
    flows: &dyn FlowSource,
    refiner: &dyn Refiner,
    cfg: &PipelineConfig,
) -> Result<FrameStats, PipelineError> {
    if frame == 0 {
        return Err(PipelineError::FrameZero(frame));
    }
    cfg.validate()?;
    let refined = refine_detections(frame, &non_degenerate(detections), refiner, &cfg.fuse)?;

    let previous = set.targets_at(frame - 1);
    let flowed: Vec<Target> = if previous.is_empty() {
        Vec::new()
    } else {
        let flow = flows
            .flow(frame, 1)?
            .ok_or(PipelineError::MissingFlow { frame, depth: 1 })?;
        flow_targets(&flow, &previous, &cfg.motion, frame)
            .into_iter()
            .filter(|t| !t.bbox.is_degenerate())
            .collect()
    };

    let fused = fuse(&flowed, &refined, refiner, frame, &cfg.fuse)?;
    for ft in &fused.tracked {
        set.push(&ft.target)?;
    }

    let missing: Vec<TrackId> = set
        .iter()
        .filter(|t| t.get(frame).is_none())
        .map(|t| t.id())
        .collect();
    let (revived, leftover) = backtrack(
        set,
        &missing,
        &fused.unmatched_detections,
        frame,
        flows,
        refiner,
        cfg,
    )?;
    for t in &revived {
        set.push(t)?;
    }

    let occupied: Vec<BBox> = set.targets_at(frame).iter().map(|t| t.bbox).collect();
    let mut minted = 0;
    for d in leftover {
        if occupied.iter().any(|b| iou(b, &d.bbox) > cfg.fuse.thresh_nms) {
            continue;
        }
        set.mint(frame, d.bbox, d.score)?;
        minted += 1;
    }

    Ok(FrameStats {
        frame,
        detections: refined.len(),
        tracked: fused.tracked.len(),
        revived: revived.len(),
        minted,
    })
}

/// Tracks a whole sequence; `detections[t]` holds frame `t`'s detections.
pub fn run(
    detections: &[Vec<Detection>],
    flows: &dyn FlowSource,
    refiner: &dyn Refiner,
    cfg: &PipelineConfig,
) -> Result<TrajectorySet, PipelineError> {
    run_with_stats(detections, flows, refiner, cfg).map(|(set, _)| set)
}

pub fn run_with_stats(
    detections: &[Vec<Detection>],
    flows: &dyn FlowSource,
    refiner: &dyn Refiner,
    cfg: &PipelineConfig,
) -> Result<(TrajectorySet, Vec<FrameStats>), PipelineError> {
    let Some(first) = detections.first() else {
        return Ok((TrajectorySet::new(), Vec::new()));
    };
    let mut set = init(first, refiner, cfg)?;
    let mut stats = vec![FrameStats {
        frame: 0,
        detections: set.len(),
        minted: set.len(),
        ..Default::default()
    }];
    for (frame, dets) in detections.iter().enumerate().skip(1) {
        stats.push(step(&mut set, frame, dets, flows, refiner, cfg)?);
    }
    Ok((set, stats))
}

/// Runs over materialized bundles, which must be consecutive from frame 0.
pub fn run_bundles(
    bundles: &[FrameBundle],
    refiner: &dyn Refiner,
    cfg: &PipelineConfig,
) -> Result<TrajectorySet, PipelineError> {
    if let Some((k, b)) = bundles.iter().enumerate().find(|(k, b)| b.frame != *k) {
        return Err(PipelineError::InvalidConfig(format!(
            "bundle {k} has frame {}, bundles must be consecutive from 0",
            b.frame
        )));
    }
    let dets: Vec<Vec<Detection>> = bundles.iter().map(|b| b.detections.clone()).collect();
    run(&dets, &bundles, refiner, cfg)
}
