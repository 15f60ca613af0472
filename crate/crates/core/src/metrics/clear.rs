//! CLEAR MOT frame-by-frame matching.

use std::collections::{BTreeMap, BTreeSet};

use super::{frame_count, hungarian, EvalConfig, MetricsError, MotCounts, MOSTLY_LOST, MOSTLY_TRACKED};
use crate::geometry::iou;
use crate::track::{TrackId, TrajectorySet};

/// Matches made in one frame as `(gt id, predicted id, IoU)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameAssignment {
    pub frame: usize,
    pub matches: Vec<(TrackId, TrackId, f64)>,
    pub switches: Vec<TrackId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClearMot {
    /// Counts with `idtp` left at zero.
    pub counts: MotCounts,
    pub frames: Vec<FrameAssignment>,
}

/// Runs CLEAR MOT matching.
///
/// Correspondences from the previous frame are kept while their IoU stays at
/// or above the threshold; the rest are assigned by Hungarian matching on
/// `1 - IoU`. An ID switch is counted when a ground-truth target is matched
/// to a different prediction than the one it was last matched to.
pub fn clear_mot(
    gt: &TrajectorySet,
    pred: &TrajectorySet,
    cfg: &EvalConfig,
) -> Result<ClearMot, MetricsError> {
    let frames = frame_count(gt, pred, cfg)?;
    let thresh = cfg.iou_thresh;

    let mut counts = MotCounts {
        gt_tracks: gt.len(),
        ..Default::default()
    };
    let mut prev: BTreeMap<TrackId, TrackId> = BTreeMap::new();
    let mut last: BTreeMap<TrackId, TrackId> = BTreeMap::new();
    // per gt track: matched flag for each frame it is present
    let mut history: BTreeMap<TrackId, Vec<bool>> = BTreeMap::new();
    let mut out = Vec::with_capacity(frames);

    for f in 0..frames {
        let gts = gt.targets_at(f);
        let preds = pred.targets_at(f);
        counts.gt_boxes += gts.len();
        counts.pred_boxes += preds.len();

        let overlaps: Vec<Vec<f64>> = gts
            .iter()
            .map(|g| preds.iter().map(|p| iou(&g.bbox, &p.bbox)).collect())
            .collect();
        let mut gt_used = vec![false; gts.len()];
        let mut pred_used = vec![false; preds.len()];
        let mut pairs: Vec<(usize, usize)> = Vec::new();

        let pred_index: BTreeMap<TrackId, usize> =
            preds.iter().enumerate().map(|(j, p)| (p.id, j)).collect();
        for (i, g) in gts.iter().enumerate() {
            if let Some(&j) = prev.get(&g.id).and_then(|pid| pred_index.get(pid)) {
                if overlaps[i][j] >= thresh {
                    gt_used[i] = true;
                    pred_used[j] = true;
                    pairs.push((i, j));
                }
            }
        }

        let free_g: Vec<usize> = (0..gts.len()).filter(|&i| !gt_used[i]).collect();
        let free_p: Vec<usize> = (0..preds.len()).filter(|&j| !pred_used[j]).collect();
        if !free_g.is_empty() && !free_p.is_empty() {
            // exceeds any total of admissible costs, which are each at most 1
            let forbidden = (free_g.len().min(free_p.len()) + 1) as f64;
            let cost: Vec<Vec<f64>> = free_g
                .iter()
                .map(|&i| {
                    free_p
                        .iter()
                        .map(|&j| {
                            let o = overlaps[i][j];
                            if o >= thresh {
                                1.0 - o
                            } else {
                                forbidden
                            }
                        })
                        .collect()
                })
                .collect();
            for (a, b) in hungarian(&cost).pairs {
                let (i, j) = (free_g[a], free_p[b]);
                if overlaps[i][j] >= thresh {
                    pairs.push((i, j));
                }
            }
        }

        let mut fa = FrameAssignment {
            frame: f,
            ..Default::default()
        };
        let mut matched_gt = BTreeSet::new();
        prev.clear();
        pairs.sort_unstable();
        for (i, j) in pairs {
            let (gid, pid) = (gts[i].id, preds[j].id);
            if last.get(&gid).is_some_and(|&l| l != pid) {
                counts.id_switches += 1;
                fa.switches.push(gid);
            }
            last.insert(gid, pid);
            prev.insert(gid, pid);
            matched_gt.insert(gid);
            counts.iou_sum += overlaps[i][j];
            fa.matches.push((gid, pid, overlaps[i][j]));
        }
        counts.matches += fa.matches.len();
        counts.false_negatives += gts.len() - fa.matches.len();
        counts.false_positives += preds.len() - fa.matches.len();
        for g in &gts {
            history.entry(g.id).or_default().push(matched_gt.contains(&g.id));
        }
        out.push(fa);
    }

    for h in history.values() {
        let hits = h.iter().filter(|&&m| m).count();
        let coverage = hits as f64 / h.len() as f64;
        if coverage >= MOSTLY_TRACKED {
            counts.mostly_tracked += 1;
        } else if coverage <= MOSTLY_LOST {
            counts.mostly_lost += 1;
        }
        counts.fragmentations += fragments(h);
    }
    // gt tracks with no entries inside the range are lost
    counts.mostly_lost += gt.len() - history.len();

    Ok(ClearMot {
        counts,
        frames: out,
    })
}

/// Times tracking resumes after an interruption, over the frames a target is present.
fn fragments(h: &[bool]) -> usize {
    let mut seen = false;
    let mut n = 0;
    for w in h.windows(2) {
        seen |= w[0];
        if seen && !w[0] && w[1] {
            n += 1;
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::super::testutil::set;
    use super::*;

    fn run(gt: &TrajectorySet, pred: &TrajectorySet) -> MotCounts {
        clear_mot(gt, pred, &EvalConfig::default()).unwrap().counts
    }

    #[test]
    fn fragment_counting() {
        assert_eq!(fragments(&[true, false, true]), 1);
        assert_eq!(fragments(&[false, true, false, true, false, true]), 2);
        assert_eq!(fragments(&[false, false, true]), 0);
        assert_eq!(fragments(&[true, true]), 0);
        assert_eq!(fragments(&[]), 0);
    }

    #[test]
    fn id_switch_counted_once() {
        let gt = set(&[(1, 0, 0.), (1, 1, 0.), (1, 2, 0.)]);
        let pred = set(&[(7, 0, 0.), (8, 1, 0.), (8, 2, 0.)]);
        let c = run(&gt, &pred);
        assert_eq!(c.id_switches, 1);
        assert_eq!((c.false_positives, c.false_negatives), (0, 0));
    }

    #[test]
    fn switch_counted_against_last_match_across_gap() {
        // matched to 7, missed, then matched to 8
        let gt = set(&[(1, 0, 0.), (1, 1, 0.), (1, 2, 0.)]);
        let pred = set(&[(7, 0, 0.), (8, 2, 0.)]);
        let c = run(&gt, &pred);
        assert_eq!(c.id_switches, 1);
        assert_eq!(c.fragmentations, 1);
        assert_eq!(c.false_negatives, 1);
    }

    #[test]
    fn previous_match_is_kept() {
        // pred 8 overlaps better at frame 1, but 7 is still above threshold
        let gt = set(&[(1, 0, 0.), (1, 1, 0.)]);
        let pred = set(&[(7, 0, 0.), (7, 1, 2.), (8, 1, 0.)]);
        let c = run(&gt, &pred);
        assert_eq!(c.id_switches, 0);
        assert_eq!(c.false_positives, 1);
    }

    #[test]
    fn below_threshold_is_miss_and_false_positive() {
        let gt = set(&[(1, 0, 0.)]);
        let pred = set(&[(1, 0, 6.)]);
        let c = run(&gt, &pred);
        assert_eq!((c.matches, c.false_positives, c.false_negatives), (0, 1, 1));
    }

    #[test]
    fn threshold_is_inclusive() {
        // 10x10 boxes shifted by 10/3 give IoU exactly 0.5
        let gt = set(&[(1, 0, 0.)]);
        let pred = set(&[(1, 0, 10.0 / 3.0)]);
        let o = iou(
            &gt.targets_at(0)[0].bbox,
            &pred.targets_at(0)[0].bbox,
        );
        let c = clear_mot(
            &gt,
            &pred,
            &EvalConfig {
                iou_thresh: o,
                ..Default::default()
            },
        )
        .unwrap()
        .counts;
        assert_eq!(c.matches, 1);
    }

    #[test]
    fn hungarian_maximizes_matches() {
        // greedy best-IoU would pair g1 with p2 and leave g2 unmatched
        let gt = set(&[(1, 0, 0.), (2, 0, 3.)]);
        let pred = set(&[(1, 0, -2.), (2, 0, 1.)]);
        let c = run(&gt, &pred);
        assert_eq!(c.matches, 2);
    }

    #[test]
    fn mostly_tracked_and_lost() {
        let mut e: Vec<(u64, usize, f64)> = (0..10).map(|f| (1, f, 0.)).collect();
        e.extend((0..10).map(|f| (2, f, 50.)));
        e.extend((0..10).map(|f| (3, f, 100.)));
        let gt = set(&e);
        let mut p: Vec<(u64, usize, f64)> = (0..8).map(|f| (1, f, 0.)).collect(); // 80%
        p.extend((0..2).map(|f| (2, f, 50.))); // 20%
        p.extend((0..5).map(|f| (3, f, 100.))); // 50%
        let c = run(&gt, &set(&p));
        assert_eq!((c.mostly_tracked, c.mostly_lost, c.gt_tracks), (1, 1, 3));
    }

    #[test]
    fn motp_is_mean_iou() {
        let gt = set(&[(1, 0, 0.), (2, 0, 50.)]);
        let pred = set(&[(1, 0, 0.), (2, 0, 51.)]);
        let c = run(&gt, &pred);
        assert!((c.iou_sum / c.matches as f64 - (1.0 + 9.0 / 11.0) / 2.0).abs() < 1e-12);
    }
}
