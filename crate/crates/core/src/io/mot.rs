//! Comma-separated MOTChallenge rows: detections, ground truth, results.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use log::info;
use thiserror::Error;

use crate::geometry::BBox;
use crate::refine::Refined;
use crate::track::{Detection, Target, TrackId, TrajectorySet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

fn err(line: usize, reason: impl Into<String>) -> ParseError {
    ParseError {
        line,
        reason: reason.into(),
    }
}

/// Non-empty lines split on commas, with their 1-based line numbers.
fn rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        if l.is_empty() {
            None
        } else {
            Some((i + 1, l.split(',').map(str::trim).collect()))
        }
    })
}

fn need(line: usize, cols: &[&str], n: usize) -> Result<(), ParseError> {
    if cols.len() < n {
        Err(err(line, format!("expected at least {n} columns, found {}", cols.len())))
    } else {
        Ok(())
    }
}

fn num(line: usize, cols: &[&str], k: usize, what: &str) -> Result<f64, ParseError> {
    let v: f64 = cols[k]
        .parse()
        .map_err(|_| err(line, format!("{what} {:?} is not a number", cols[k])))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(err(line, format!("{what} is not finite")))
    }
}

/// A positive whole number, accepting forms like `3` or `3.0`.
fn index(line: usize, cols: &[&str], k: usize, what: &str) -> Result<u64, ParseError> {
    let v = num(line, cols, k, what)?;
    if v < 1.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
        return Err(err(line, format!("{what} {} must be a positive integer", cols[k])));
    }
    Ok(v as u64)
}

/// Reads `frame, x, y, w, h` starting at `frame_col`, converting to 0-based.
fn frame_and_box(
    line: usize,
    cols: &[&str],
    frame_col: usize,
    box_col: usize,
) -> Result<(usize, BBox), ParseError> {
    let frame = index(line, cols, frame_col, "frame")? as usize - 1;
    let x = num(line, cols, box_col, "x")?;
    let y = num(line, cols, box_col + 1, "y")?;
    let w = num(line, cols, box_col + 2, "width")?;
    let h = num(line, cols, box_col + 3, "height")?;
    let b = BBox::new(x - 1.0, y - 1.0, w, h).map_err(|e| err(line, e.to_string()))?;
    Ok((frame, b))
}

/// Parses a detection file (`frame, -1, x, y, w, h, score, ...`).
///
/// If any score falls outside `[0, 1]`, all scores of the file are min-max
/// normalized onto `[0, 1]` (to 1.0 when they are all equal) and the
/// transform is logged.
pub fn parse_detections(text: &str) -> Result<BTreeMap<usize, Vec<Detection>>, ParseError> {
    let mut raw: Vec<(usize, BBox, f64)> = Vec::new();
    for (line, cols) in rows(text) {
        need(line, &cols, 7)?;
        let (frame, b) = frame_and_box(line, &cols, 0, 2)?;
        let score = num(line, &cols, 6, "score")?;
        raw.push((frame, b, score));
    }

    let (lo, hi) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.2), hi.max(r.2)));
    let normalize = !raw.is_empty() && (lo < 0.0 || hi > 1.0);
    if normalize {
        info!("detection scores span [{lo}, {hi}]; min-max normalizing onto [0, 1]");
    }

    let mut out: BTreeMap<usize, Vec<Detection>> = BTreeMap::new();
    for (frame, b, s) in raw {
        let s = if !normalize {
            s
        } else if hi > lo {
            ((s - lo) / (hi - lo)).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let d = Detection::new(b, s).expect("score normalized into [0, 1]");
        out.entry(frame).or_default().push(d);
    }
    Ok(out)
}

/// Spreads a parsed detection map over `frames` consecutive frames.
/// Frames past the end are dropped.
pub fn detections_by_frame(
    map: &BTreeMap<usize, Vec<Detection>>,
    frames: usize,
) -> Vec<Vec<Detection>> {
    (0..frames)
        .map(|f| map.get(&f).cloned().unwrap_or_default())
        .collect()
}

/// Which ground-truth rows to keep.
#[derive(Debug, Clone, PartialEq)]
pub struct GtFilter {
    /// Accepted class labels; `None` accepts all. A class of `-1` (not annotated)
    /// always passes.
    pub classes: Option<BTreeSet<i64>>,
    pub min_visibility: f64,
}

impl Default for GtFilter {
    /// Pedestrians only, any visibility.
    fn default() -> Self {
        Self {
            classes: Some(BTreeSet::from([1])),
            min_visibility: 0.0,
        }
    }
}

impl GtFilter {
    pub fn all() -> Self {
        Self {
            classes: None,
            min_visibility: 0.0,
        }
    }
}

/// Parses a ground-truth file (`frame, id, x, y, w, h, active, class, visibility`).
///
/// Missing trailing columns default to active, unannotated class and full
/// visibility. Negative visibility is read as unknown, i.e. fully visible.
pub fn parse_ground_truth(text: &str, filter: &GtFilter) -> Result<TrajectorySet, ParseError> {
    let mut set = TrajectorySet::new();
    for (line, cols) in rows(text) {
        need(line, &cols, 6)?;
        let (frame, b) = frame_and_box(line, &cols, 0, 2)?;
        let id = index(line, &cols, 1, "id")?;
        let active = if cols.len() > 6 {
            num(line, &cols, 6, "active flag")?
        } else {
            1.0
        };
        let class = if cols.len() > 7 {
            num(line, &cols, 7, "class")? as i64
        } else {
            -1
        };
        let mut vis = if cols.len() > 8 {
            num(line, &cols, 8, "visibility")?
        } else {
            1.0
        };
        if vis < 0.0 {
            vis = 1.0;
        }
        if active == 0.0 || vis < filter.min_visibility {
            continue;
        }
        if let Some(cs) = &filter.classes {
            if class != -1 && !cs.contains(&class) {
                continue;
            }
        }
        let t = Target::new(b, TrackId::new(id).expect("id >= 1"), 1.0, frame)
            .expect("unit score is valid");
        set.insert(&t).map_err(|e| err(line, e.to_string()))?;
    }
    Ok(set)
}

/// Parses a results file (`frame, id, x, y, w, h, score, ...`).
///
/// A negative score (the `-1` placeholder used by some trackers) reads as 1.
pub fn parse_results(text: &str) -> Result<TrajectorySet, ParseError> {
    let mut set = TrajectorySet::new();
    for (line, cols) in rows(text) {
        need(line, &cols, 6)?;
        let (frame, b) = frame_and_box(line, &cols, 0, 2)?;
        let id = index(line, &cols, 1, "id")?;
        let mut score = if cols.len() > 6 {
            num(line, &cols, 6, "score")?
        } else {
            1.0
        };
        if score < 0.0 {
            score = 1.0;
        }
        let t = Target::new(b, TrackId::new(id).expect("id >= 1"), score, frame)
            .map_err(|e| err(line, e.to_string()))?;
        set.insert(&t).map_err(|e| err(line, e.to_string()))?;
    }
    Ok(set)
}

/// Parses refined proposal scores (`frame, x, y, w, h, score`).
pub fn parse_refined(text: &str) -> Result<BTreeMap<usize, Vec<Refined>>, ParseError> {
    let mut out: BTreeMap<usize, Vec<Refined>> = BTreeMap::new();
    for (line, cols) in rows(text) {
        need(line, &cols, 6)?;
        let (frame, bbox) = frame_and_box(line, &cols, 0, 1)?;
        let score = num(line, &cols, 5, "score")?;
        if !(0.0..=1.0).contains(&score) {
            return Err(err(line, format!("score {score} outside [0, 1]")));
        }
        out.entry(frame).or_default().push(Refined { bbox, score });
    }
    Ok(out)
}

/// Formats a coordinate with at most two decimals and no trailing zeros.
pub fn format_coord(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        &s
    };
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn push_box(out: &mut String, b: &BBox) {
    let _ = write!(
        out,
        "{},{},{},{}",
        format_coord(b.x + 1.0),
        format_coord(b.y + 1.0),
        format_coord(b.w),
        format_coord(b.h)
    );
}

/// Writes `frame,id,x,y,w,h,score,-1,-1,-1` rows sorted by frame then id.
///
/// Coordinates are rounded to two decimals; scores are written exactly.
pub fn write_results(set: &TrajectorySet) -> String {
    let mut rows: Vec<(usize, TrackId, BBox, f64)> = set
        .iter()
        .flat_map(|t| {
            t.entries()
                .iter()
                .map(move |(&f, e)| (f, t.id(), e.bbox, e.score))
        })
        .collect();
    rows.sort_by_key(|r| (r.0, r.1));
    let mut out = String::new();
    for (f, id, b, s) in rows {
        let _ = write!(out, "{},{},", f + 1, id);
        push_box(&mut out, &b);
        let _ = writeln!(out, ",{s},-1,-1,-1");
    }
    out
}

/// Writes ground truth rows with active flag 1, class 1 and visibility 1.
pub fn write_ground_truth(set: &TrajectorySet) -> String {
    let mut out = String::new();
    for line in write_results(set).lines() {
        let cols: Vec<&str> = line.split(',').collect();
        let _ = writeln!(out, "{},1,1,1", cols[..6].join(","));
    }
    out
}

/// Writes `frame,-1,x,y,w,h,score,-1,-1,-1` rows in frame order.
pub fn write_detections(frames: &[Vec<Detection>]) -> String {
    let mut out = String::new();
    for (f, dets) in frames.iter().enumerate() {
        for d in dets {
            let _ = write!(out, "{},-1,", f + 1);
            push_box(&mut out, &d.bbox);
            let _ = writeln!(out, ",{},-1,-1,-1", d.score);
        }
    }
    out
}
