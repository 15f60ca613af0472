//! Tracking evaluation: CLEAR MOT counts, identity measures, report tables.

mod clear;
mod hungarian;
mod identity;

pub use clear::{clear_mot, ClearMot, FrameAssignment};
pub use hungarian::{hungarian, Assignment};
pub use identity::{identity_metrics, IdentityScores};

use thiserror::Error;

use crate::track::TrajectorySet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("{which} has entries at frame {frame}, outside the evaluated range 0..{frames}")]
    FrameRangeMismatch {
        which: &'static str,
        frame: usize,
        frames: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// Minimum IoU (inclusive) for a prediction to count as a hit.
    pub iou_thresh: f64,
    /// Sequence length. When absent, the ground truth's last frame bounds the range.
    pub num_frames: Option<usize>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_thresh: 0.5,
            num_frames: None,
        }
    }
}

pub const MOSTLY_TRACKED: f64 = 0.8;
pub const MOSTLY_LOST: f64 = 0.2;

/// Number of frames to evaluate, checking both sets fall inside it.
pub(crate) fn frame_count(
    gt: &TrajectorySet,
    pred: &TrajectorySet,
    cfg: &EvalConfig,
) -> Result<usize, MetricsError> {
    let gt_end = gt.frame_range().map(|(_, hi)| hi + 1);
    let pred_end = pred.frame_range().map(|(_, hi)| hi + 1);
    let frames = match (cfg.num_frames, gt_end) {
        (Some(n), _) => n,
        (None, Some(n)) => n,
        (None, None) => pred_end.unwrap_or(0),
    };
    for (which, end) in [("ground truth", gt_end), ("prediction", pred_end)] {
        if let Some(end) = end {
            if end > frames {
                return Err(MetricsError::FrameRangeMismatch {
                    which,
                    frame: end - 1,
                    frames,
                });
            }
        }
    }
    Ok(frames)
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Raw counts for one or more sequences; sums across sequences aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotCounts {
    pub gt_boxes: usize,
    pub pred_boxes: usize,
    pub matches: usize,
    pub iou_sum: f64,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub id_switches: usize,
    pub fragmentations: usize,
    pub gt_tracks: usize,
    pub mostly_tracked: usize,
    pub mostly_lost: usize,
    pub idtp: usize,
}

impl std::ops::Add for MotCounts {
    type Output = MotCounts;

    fn add(self, o: MotCounts) -> MotCounts {
        MotCounts {
            gt_boxes: self.gt_boxes + o.gt_boxes,
            pred_boxes: self.pred_boxes + o.pred_boxes,
            matches: self.matches + o.matches,
            iou_sum: self.iou_sum + o.iou_sum,
            false_positives: self.false_positives + o.false_positives,
            false_negatives: self.false_negatives + o.false_negatives,
            id_switches: self.id_switches + o.id_switches,
            fragmentations: self.fragmentations + o.fragmentations,
            gt_tracks: self.gt_tracks + o.gt_tracks,
            mostly_tracked: self.mostly_tracked + o.mostly_tracked,
            mostly_lost: self.mostly_lost + o.mostly_lost,
            idtp: self.idtp + o.idtp,
        }
    }
}

impl std::iter::Sum for MotCounts {
    fn sum<I: Iterator<Item = MotCounts>>(iter: I) -> MotCounts {
        iter.fold(MotCounts::default(), |a, b| a + b)
    }
}

/// Summary metrics in the usual benchmark column order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotReport {
    pub mota: f64,
    pub motp: f64,
    pub idf1: f64,
    pub idp: f64,
    pub idr: f64,
    /// Percent of ground-truth tracks.
    pub mt: f64,
    /// Percent of ground-truth tracks.
    pub ml: f64,
    pub fp: usize,
    pub fn_: usize,
    pub idsw: usize,
    pub frag: usize,
}

impl MotReport {
    pub fn from_counts(c: &MotCounts) -> Self {
        let errors = (c.false_positives + c.false_negatives + c.id_switches) as f64;
        // with no ground truth the error count is taken over a unit denominator
        let mota = 1.0 - errors / (c.gt_boxes.max(1) as f64);
        let idtp = c.idtp as f64;
        Self {
            mota,
            motp: ratio(c.iou_sum, c.matches as f64),
            idf1: ratio(2.0 * idtp, (c.gt_boxes + c.pred_boxes) as f64),
            idp: ratio(idtp, c.pred_boxes as f64),
            idr: ratio(idtp, c.gt_boxes as f64),
            mt: 100.0 * ratio(c.mostly_tracked as f64, c.gt_tracks as f64),
            ml: 100.0 * ratio(c.mostly_lost as f64, c.gt_tracks as f64),
            fp: c.false_positives,
            fn_: c.false_negatives,
            idsw: c.id_switches,
            frag: c.fragmentations,
        }
    }
}

/// Full evaluation of one sequence.
pub fn evaluate(
    gt: &TrajectorySet,
    pred: &TrajectorySet,
    cfg: &EvalConfig,
) -> Result<MotCounts, MetricsError> {
    let clear = clear_mot(gt, pred, cfg)?;
    let ident = identity_metrics(gt, pred, cfg)?;
    Ok(MotCounts {
        idtp: ident.idtp,
        ..clear.counts
    })
}

pub const TABLE_HEADER: [&str; 12] = [
    "Sequence", "MOTA", "MOTP", "IDF1", "IDP", "IDR", "MT", "ML", "FP", "FN", "IDSW", "Frag",
];

/// Tab-separated table, one row per `(name, report)`, with a header line.
/// Ratios are printed as fractions, MT and ML as percentages.
pub fn format_table(rows: &[(String, MotReport)]) -> String {
    let mut out = TABLE_HEADER.join("\t");
    out.push('\n');
    for (name, r) in rows {
        out.push_str(&format!(
            "{name}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.1}\t{:.1}\t{}\t{}\t{}\t{}\n",
            r.mota, r.motp, r.idf1, r.idp, r.idr, r.mt, r.ml, r.fp, r.fn_, r.idsw, r.frag
        ));
    }
    out
}
