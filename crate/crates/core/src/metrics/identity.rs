//! Identity-preserving measures (IDF1, IDP, IDR).

use std::collections::BTreeMap;

use super::{frame_count, hungarian, EvalConfig, MetricsError};
use crate::geometry::iou;
use crate::track::{TrackId, TrajectorySet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityScores {
    pub idtp: usize,
    pub idfp: usize,
    pub idfn: usize,
    pub idf1: f64,
    pub idp: f64,
    pub idr: f64,
}

/// Global one-to-one matching of whole trajectories maximizing the number
/// of frames where paired boxes overlap at or above the IoU threshold.
pub fn identity_metrics(
    gt: &TrajectorySet,
    pred: &TrajectorySet,
    cfg: &EvalConfig,
) -> Result<IdentityScores, MetricsError> {
    let frames = frame_count(gt, pred, cfg)?;
    let gt_ids: Vec<TrackId> = gt.iter().map(|t| t.id()).collect();
    let pred_ids: Vec<TrackId> = pred.iter().map(|t| t.id()).collect();
    let gi: BTreeMap<TrackId, usize> = gt_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let pi: BTreeMap<TrackId, usize> =
        pred_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();

    let mut overlap = vec![vec![0usize; pred_ids.len()]; gt_ids.len()];
    let (mut n_gt, mut n_pred) = (0, 0);
    for f in 0..frames {
        let gts = gt.targets_at(f);
        let preds = pred.targets_at(f);
        n_gt += gts.len();
        n_pred += preds.len();
        for g in &gts {
            for p in &preds {
                if iou(&g.bbox, &p.bbox) >= cfg.iou_thresh {
                    overlap[gi[&g.id]][pi[&p.id]] += 1;
                }
            }
        }
    }

    let cost: Vec<Vec<f64>> = overlap
        .iter()
        .map(|r| r.iter().map(|&c| -(c as f64)).collect())
        .collect();
    let idtp: usize = hungarian(&cost)
        .pairs
        .into_iter()
        .map(|(i, j)| overlap[i][j])
        .sum();

    let ratio = |a: usize, b: usize| if b > 0 { a as f64 / b as f64 } else { 0.0 };
    Ok(IdentityScores {
        idtp,
        idfp: n_pred - idtp,
        idfn: n_gt - idtp,
        idf1: ratio(2 * idtp, n_gt + n_pred),
        idp: ratio(idtp, n_pred),
        idr: ratio(idtp, n_gt),
    })
}
