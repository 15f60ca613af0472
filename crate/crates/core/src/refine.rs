//! Proposal refinement.
//!
//! A [`Refiner`] turns box proposals into refined boxes with confidence
//! scores. The tracker only relies on this contract; the shipped
//! implementations stand in for a learned detection head.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::geometry::{iou, BBox};
use crate::track::{Detection, TrackId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefinerError {
    #[error("refiner returned {got} results for {expected} proposals")]
    LengthMismatch { expected: usize, got: usize },
    #[error("refiner returned an invalid result at index {index}: {reason}")]
    InvalidOutput { index: usize, reason: String },
    #[error("{0}")]
    Other(String),
}

/// A box submitted for refinement.
///
/// Detections carry their score; flowed targets carry their id and no score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    pub bbox: BBox,
    pub score: Option<f64>,
    pub id: Option<TrackId>,
}

impl Proposal {
    pub fn detection(d: &Detection) -> Self {
        Self {
            bbox: d.bbox,
            score: Some(d.score),
            id: None,
        }
    }

    pub fn tracked(bbox: BBox, id: TrackId) -> Self {
        Self {
            bbox,
            score: None,
            id: Some(id),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refined {
    pub bbox: BBox,
    pub score: f64,
}

/// Refines a frame's proposals. Output must be index-aligned with the input.
pub trait Refiner: Send + Sync {
    fn refine(&self, frame: usize, proposals: &[Proposal]) -> Result<Vec<Refined>, RefinerError>;
}

impl<F> Refiner for F
where
    F: Fn(usize, &[Proposal]) -> Result<Vec<Refined>, RefinerError> + Send + Sync,
{
    fn refine(&self, frame: usize, proposals: &[Proposal]) -> Result<Vec<Refined>, RefinerError> {
        self(frame, proposals)
    }
}

/// Keeps boxes as they are. Detections keep their score, flowed targets get 1.0.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityRefiner;

impl Refiner for IdentityRefiner {
    fn refine(&self, _frame: usize, proposals: &[Proposal]) -> Result<Vec<Refined>, RefinerError> {
        Ok(proposals
            .iter()
            .map(|p| Refined {
                bbox: p.bbox,
                score: p.score.unwrap_or(1.0),
            })
            .collect())
    }
}

/// Scores flowed targets by their best IoU against the frame's raw detections,
/// so targets with no detection support are killed. Detections keep their score.
#[derive(Debug, Clone, Default)]
pub struct OverlapRefiner {
    detections: BTreeMap<usize, Vec<BBox>>,
}

impl OverlapRefiner {
    pub fn new(detections: &BTreeMap<usize, Vec<Detection>>) -> Self {
        Self {
            detections: detections
                .iter()
                .map(|(&f, ds)| (f, ds.iter().map(|d| d.bbox).collect()))
                .collect(),
        }
    }
}

impl Refiner for OverlapRefiner {
    fn refine(&self, frame: usize, proposals: &[Proposal]) -> Result<Vec<Refined>, RefinerError> {
        let dets = self.detections.get(&frame).map(Vec::as_slice).unwrap_or(&[]);
        Ok(proposals
            .iter()
            .map(|p| {
                let score = p.score.unwrap_or_else(|| {
                    dets.iter().map(|d| iou(&p.bbox, d)).fold(0.0, f64::max)
                });
                Refined {
                    bbox: p.bbox,
                    score,
                }
            })
            .collect())
    }
}

/// Replays boxes and scores refined offline.
///
/// Each proposal takes the refined row of its frame with the highest IoU,
/// provided that IoU is at least `min_iou`; otherwise it keeps its box and
/// scores 0.
#[derive(Debug, Clone)]
pub struct FileRefiner {
    rows: BTreeMap<usize, Vec<Refined>>,
    min_iou: f64,
}

impl FileRefiner {
    pub const DEFAULT_MIN_IOU: f64 = 0.7;

    pub fn new(rows: BTreeMap<usize, Vec<Refined>>) -> Self {
        Self {
            rows,
            min_iou: Self::DEFAULT_MIN_IOU,
        }
    }

    pub fn with_min_iou(self, min_iou: f64) -> Self {
        Self { min_iou, ..self }
    }
}

impl Refiner for FileRefiner {
    fn refine(&self, frame: usize, proposals: &[Proposal]) -> Result<Vec<Refined>, RefinerError> {
        let rows = self.rows.get(&frame).map(Vec::as_slice).unwrap_or(&[]);
        Ok(proposals
            .iter()
            .map(|p| {
                let mut best: Option<(f64, &Refined)> = None;
                for r in rows {
                    let o = iou(&p.bbox, &r.bbox);
                    if best.is_none_or(|(b, _)| o > b) {
                        best = Some((o, r));
                    }
                }
                match best {
                    Some((o, r)) if o >= self.min_iou => *r,
                    _ => Refined {
                        bbox: p.bbox,
                        score: 0.0,
                    },
                }
            })
            .collect())
    }
}
