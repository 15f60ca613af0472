//! Fusion of flowed targets with the frame's detections.
//!
//! Both sources are treated as proposals. Tracked proposals are refined and
//! low-confidence ones are killed; each source is then NMS'd on its own; each
//! tracked target takes over its best-overlapping detection; a joint NMS over
//! the merged set resolves the remaining conflicts, handing a target's id to
//! a detection that outscores it.

use thiserror::Error;

use crate::geometry::{iou, BBox};
use crate::nms::{nms, score_order};
use crate::refine::{Proposal, Refiner, RefinerError};
use crate::track::{Detection, Target, TrackId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuseError {
    #[error("refiner failed: {0}")]
    RefinerFailure(#[from] RefinerError),
    #[error("invalid fuse config: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuseConfig {
    /// Refined proposals scoring below this are killed.
    pub thresh_score: f64,
    /// Minimum IoU (exclusive) for a detection to match a tracked target.
    pub thresh_iou: f64,
    /// NMS suppression threshold (exclusive) for both NMS levels.
    pub thresh_nms: f64,
}

impl Default for FuseConfig {
    fn default() -> Self {
        Self {
            thresh_score: 0.5,
            thresh_iou: 0.5,
            thresh_nms: 0.5,
        }
    }
}

impl FuseConfig {
    pub fn validate(&self) -> Result<(), FuseError> {
        let unit = 0.0..=1.0;
        if !unit.contains(&self.thresh_score) {
            return Err(FuseError::InvalidConfig("thresh_score must be in [0, 1]"));
        }
        if !unit.contains(&self.thresh_iou) {
            return Err(FuseError::InvalidConfig("thresh_iou must be in [0, 1]"));
        }
        if !unit.contains(&self.thresh_nms) {
            return Err(FuseError::InvalidConfig("thresh_nms must be in [0, 1]"));
        }
        Ok(())
    }
}

/// A refined proposal that survived the score threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub bbox: BBox,
    pub score: f64,
    pub id: Option<TrackId>,
    /// Position in the proposal list passed to [`refine_and_kill`].
    pub index: usize,
}

/// Runs the refiner over `proposals` and drops results scoring below
/// `thresh_score`. Survivors keep input order and carry their ids through.
pub fn refine_and_kill(
    frame: usize,
    proposals: &[Proposal],
    refiner: &dyn Refiner,
    cfg: &FuseConfig,
) -> Result<Vec<Scored>, FuseError> {
    let refined = refiner.refine(frame, proposals)?;
    if refined.len() != proposals.len() {
        return Err(RefinerError::LengthMismatch {
            expected: proposals.len(),
            got: refined.len(),
        }
        .into());
    }
    let mut out = Vec::with_capacity(refined.len());
    for (index, (p, r)) in proposals.iter().zip(&refined).enumerate() {
        if !(0.0..=1.0).contains(&r.score) {
            return Err(RefinerError::InvalidOutput {
                index,
                reason: format!("score {} outside [0, 1]", r.score),
            }
            .into());
        }
        if BBox::new(r.bbox.x, r.bbox.y, r.bbox.w, r.bbox.h).is_err() {
            return Err(RefinerError::InvalidOutput {
                index,
                reason: format!("invalid box {:?}", r.bbox),
            }
            .into());
        }
        if r.score >= cfg.thresh_score {
            out.push(Scored {
                bbox: r.bbox,
                score: r.score,
                id: p.id,
                index,
            });
        }
    }
    Ok(out)
}

/// One tracked output of [`fuse`].
#[derive(Debug, Clone, PartialEq)]
pub struct FusedTarget {
    pub target: Target,
    /// Whether a detection backed this target, by matching or by handing it its id.
    pub matched: bool,
    /// Indices (into the `detections` argument) of detections merged into this target.
    pub absorbed: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FuseOutcome {
    /// Tracked targets at this frame, in descending score order.
    pub tracked: Vec<FusedTarget>,
    /// Detections that inherited no id, in input order.
    pub unmatched_detections: Vec<Detection>,
    /// Input indices of `unmatched_detections`.
    pub unmatched_indices: Vec<usize>,
}

struct Candidate {
    bbox: BBox,
    score: f64,
    id: Option<TrackId>,
    matched: bool,
    absorbed: Vec<usize>,
}

/// Fuses flowed targets with refined detections at `frame`.
///
/// `detections` must already be refined; `tracked` are raw flowed targets
/// and are refined here. Never mints ids.
pub fn fuse(
    tracked: &[Target],
    detections: &[Detection],
    refiner: &dyn Refiner,
    frame: usize,
    cfg: &FuseConfig,
) -> Result<FuseOutcome, FuseError> {
    let proposals: Vec<Proposal> = tracked
        .iter()
        .map(|t| Proposal::tracked(t.bbox, t.id))
        .collect();
    let refined = refine_and_kill(frame, &proposals, refiner, cfg)?;

    // level 1: within each source
    let tracked_boxes: Vec<(BBox, f64)> = refined.iter().map(|s| (s.bbox, s.score)).collect();
    let keep_tracked = nms(&tracked_boxes, cfg.thresh_nms);
    let det_boxes: Vec<(BBox, f64)> = detections.iter().map(|d| (d.bbox, d.score)).collect();
    let mut keep_dets = nms(&det_boxes, cfg.thresh_nms);
    keep_dets.sort_unstable();

    // matching, highest-scoring tracked target first
    let mut consumed = vec![false; detections.len()];
    let mut cands = Vec::with_capacity(keep_tracked.len() + keep_dets.len());
    for &ti in &keep_tracked {
        let t = &refined[ti];
        let mut best: Option<(usize, f64)> = None;
        for &di in &keep_dets {
            if consumed[di] {
                continue;
            }
            let o = iou(&t.bbox, &detections[di].bbox);
            if best.is_none_or(|(_, b)| o > b) {
                best = Some((di, o));
            }
        }
        let mut cand = Candidate {
            bbox: t.bbox,
            score: t.score,
            id: t.id,
            matched: false,
            absorbed: Vec::new(),
        };
        if let Some((di, o)) = best {
            if o > cfg.thresh_iou {
                consumed[di] = true;
                cand.matched = true;
                cand.absorbed.push(di);
                let d = &detections[di];
                if d.score > t.score {
                    cand.bbox = d.bbox;
                    cand.score = d.score;
                }
            }
        }
        cands.push(cand);
    }
    for &di in &keep_dets {
        if !consumed[di] {
            let d = &detections[di];
            cands.push(Candidate {
                bbox: d.bbox,
                score: d.score,
                id: None,
                matched: false,
                absorbed: vec![di],
            });
        }
    }

    // level 2: joint NMS with max-score selection across sources
    let order = score_order(cands.iter().map(|c| c.score));
    let mut suppressed = vec![false; cands.len()];
    let mut kept = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if suppressed[i] {
            continue;
        }
        kept.push(i);
        for &j in &order[pos + 1..] {
            if suppressed[j] || iou(&cands[i].bbox, &cands[j].bbox) <= cfg.thresh_nms {
                continue;
            }
            suppressed[j] = true;
            let loser_id = cands[j].id;
            let absorbed = std::mem::take(&mut cands[j].absorbed);
            let winner = &mut cands[i];
            if winner.id.is_none() && loser_id.is_some() {
                winner.id = loser_id;
                winner.matched = true;
            }
            winner.absorbed.extend(absorbed);
        }
    }

    let mut out = FuseOutcome::default();
    for &i in &kept {
        let c = &cands[i];
        match c.id {
            Some(id) => out.tracked.push(FusedTarget {
                target: Target {
                    bbox: c.bbox,
                    id,
                    score: c.score,
                    frame,
                },
                matched: c.matched,
                absorbed: c.absorbed.clone(),
            }),
            None => out.unmatched_indices.push(c.absorbed[0]),
        }
    }
    out.unmatched_indices.sort_unstable();
    out.unmatched_detections = out.unmatched_indices.iter().map(|&i| detections[i]).collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refine::{IdentityRefiner, Refined};

    fn bb(x: f64, y: f64, w: f64, h: f64) -> BBox {
        BBox::new(x, y, w, h).unwrap()
    }

    fn tid(k: u64) -> TrackId {
        TrackId::new(k).unwrap()
    }

    fn target(k: u64, b: BBox) -> Target {
        Target::new(b, tid(k), 1.0, 0).unwrap()
    }

    fn det(b: BBox, s: f64) -> Detection {
        Detection::new(b, s).unwrap()
    }

    /// Refiner giving tracked proposals a fixed score.
    fn fixed(score: f64) -> impl Refiner {
        move |_: usize, ps: &[Proposal]| -> Result<Vec<Refined>, RefinerError> {
            Ok(ps
                .iter()
                .map(|p| Refined {
                    bbox: p.bbox,
                    score: p.score.unwrap_or(score),
                })
                .collect())
        }
    }

    fn scores(values: Vec<f64>) -> impl Refiner {
        move |_: usize, ps: &[Proposal]| -> Result<Vec<Refined>, RefinerError> {
            Ok(ps
                .iter()
                .zip(&values)
                .map(|(p, &s)| Refined { bbox: p.bbox, score: s })
                .collect())
        }
    }

    #[test]
    fn refine_and_kill_thresholds() {
        let cfg = FuseConfig::default();
        let props: Vec<Proposal> = (0..3)
            .map(|k| Proposal::tracked(bb(k as f64 * 20.0, 0., 10., 10.), tid(k + 1)))
            .collect();
        assert_eq!(refine_and_kill(0, &props, &fixed(1.0), &cfg).unwrap().len(), 3);
        assert!(refine_and_kill(0, &props, &fixed(0.0), &cfg).unwrap().is_empty());
        let out = refine_and_kill(0, &props, &scores(vec![0.9, 0.49, 0.51]), &cfg).unwrap();
        let idx: Vec<usize> = out.iter().map(|s| s.index).collect();
        assert_eq!(idx, vec![0, 2]);
        assert_eq!(out[1].id, Some(tid(3)));
    }

    #[test]
    fn refiner_failures_propagate() {
        let cfg = FuseConfig::default();
        let props = [Proposal::tracked(bb(0., 0., 5., 5.), tid(1))];
        let short = |_: usize, _: &[Proposal]| -> Result<Vec<Refined>, RefinerError> { Ok(vec![]) };
        assert!(matches!(
            refine_and_kill(0, &props, &short, &cfg),
            Err(FuseError::RefinerFailure(RefinerError::LengthMismatch { .. }))
        ));
        assert!(matches!(
            refine_and_kill(0, &props, &scores(vec![1.5]), &cfg),
            Err(FuseError::RefinerFailure(RefinerError::InvalidOutput { .. }))
        ));
        let failing = |_: usize, _: &[Proposal]| -> Result<Vec<Refined>, RefinerError> {
            Err(RefinerError::Other("boom".into()))
        };
        assert!(fuse(&[target(1, bb(0., 0., 5., 5.))], &[], &failing, 0, &cfg).is_err());
    }

    #[test]
    fn higher_scoring_detection_replaces_box() {
        let out = fuse(
            &[target(7, bb(0., 0., 10., 10.))],
            &[det(bb(1., 0., 10., 10.), 0.9)],
            &fixed(0.6),
            3,
            &FuseConfig::default(),
        )
        .unwrap();
        assert_eq!(out.tracked.len(), 1);
        let t = &out.tracked[0];
        assert_eq!(t.target.id, tid(7));
        assert_eq!(t.target.bbox, bb(1., 0., 10., 10.));
        assert_eq!(t.target.frame, 3);
        assert!(t.matched);
        assert!(out.unmatched_detections.is_empty());
    }

    #[test]
    fn no_tracked_targets_leaves_detections_unmatched() {
        let dets = [det(bb(0., 0., 10., 10.), 0.9), det(bb(50., 0., 10., 10.), 0.7)];
        let out = fuse(&[], &dets, &IdentityRefiner, 0, &FuseConfig::default()).unwrap();
        assert!(out.tracked.is_empty());
        assert_eq!(out.unmatched_detections, dets.to_vec());
        assert_eq!(out.unmatched_indices, vec![0, 1]);
    }

    #[test]
    fn higher_scoring_target_keeps_its_box() {
        let x = bb(4., 4., 10., 20.);
        let trk = bb(5., 4., 10., 20.);
        let out = fuse(&[target(3, trk)], &[det(x, 0.6)], &fixed(0.8), 0, &FuseConfig::default())
            .unwrap();
        assert_eq!(out.tracked[0].target.bbox, trk);
        assert_eq!(out.tracked[0].target.score, 0.8);
        assert!(out.unmatched_detections.is_empty());
    }

    #[test]
    fn equal_scores_keep_tracked_box() {
        let trk = bb(5., 4., 10., 20.);
        let out = fuse(
            &[target(3, trk)],
            &[det(bb(4., 4., 10., 20.), 0.8)],
            &fixed(0.8),
            0,
            &FuseConfig::default(),
        )
        .unwrap();
        assert_eq!(out.tracked[0].target.bbox, trk);
    }

    #[test]
    fn tracker_only_survivor_without_detections() {
        let out = fuse(&[target(2, bb(0., 0., 10., 10.))], &[], &fixed(0.8), 1, &FuseConfig::default())
            .unwrap();
        assert_eq!(out.tracked.len(), 1);
        assert!(!out.tracked[0].matched);
    }

    #[test]
    fn each_detection_matches_once() {
        // both targets overlap the single detection; the higher-scored one takes it
        let refiner = scores(vec![0.6, 0.9]);
        let cfg = FuseConfig {
            thresh_nms: 0.95,
            ..Default::default()
        };
        let out = fuse(
            &[target(1, bb(0., 0., 10., 10.)), target(2, bb(1., 0., 10., 10.))],
            &[det(bb(0.5, 0., 10., 10.), 0.95)],
            &refiner,
            0,
            &cfg,
        )
        .unwrap();
        let matched: Vec<(u64, bool)> = out
            .tracked
            .iter()
            .map(|t| (t.target.id.get(), t.matched))
            .collect();
        assert_eq!(matched, vec![(2, true), (1, false)]);
    }

    #[test]
    fn level_one_nms_can_drop_a_tracked_id() {
        let out = fuse(
            &[target(1, bb(0., 0., 10., 10.)), target(2, bb(0., 0., 10., 10.))],
            &[],
            &scores(vec![0.7, 0.9]),
            0,
            &FuseConfig::default(),
        )
        .unwrap();
        assert_eq!(out.tracked.len(), 1);
        assert_eq!(out.tracked[0].target.id, tid(2));
    }

    #[test]
    fn outscoring_unmatched_detection_inherits_id() {
        // target 1 matches d0; d1 overlaps target 2 above thresh_nms but below
        // thresh_iou, and outscores it
        let cfg = FuseConfig {
            thresh_score: 0.5,
            thresh_iou: 0.8,
            thresh_nms: 0.3,
        };
        let out = fuse(
            &[target(1, bb(0., 0., 10., 10.)), target(2, bb(100., 0., 10., 10.))],
            &[det(bb(0., 0., 10., 10.), 0.9), det(bb(104., 0., 10., 10.), 0.95)],
            &fixed(0.6),
            0,
            &cfg,
        )
        .unwrap();
        assert!(out.unmatched_detections.is_empty());
        let t2 = out.tracked.iter().find(|t| t.target.id == tid(2)).unwrap();
        assert_eq!(t2.target.bbox, bb(104., 0., 10., 10.));
        assert!(t2.matched);
        assert_eq!(t2.absorbed, vec![1]);
    }
}
