//! Per-target motion from a dense flow field.
//!
//! Each target's displacement is pooled from the flow vectors inside a
//! slightly shrunken copy of its box: median for translation, or a
//! least-squares affine fit that also yields the change in width and height.

use std::borrow::Cow;
use std::error::Error as StdError;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{apply_motion, clip_to_frame, BBox, Motion};
use crate::track::Target;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("flow grid has {got} cells, expected {width}x{height}")]
    SizeMismatch {
        width: usize,
        height: usize,
        got: usize,
    },
    #[error("flow value at cell {0} is not finite")]
    NonFinite(usize),
    #[error("only {got} flow samples inside the box, need {need}")]
    TooFewSamples { got: usize, need: usize },
    #[error("{predicted} predicted motions but {truth} ground-truth motions")]
    LengthMismatch { predicted: usize, truth: usize },
    #[error("invalid motion estimator config: {0}")]
    InvalidConfig(&'static str),
}

/// Dense displacement field between two frames, one vector per pixel cell.
///
/// Cell `(i, j)` covers `[i, i+1) × [j, j+1)` and its vector is taken to act
/// at the cell center `(i + 0.5, j + 0.5)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    u: Vec<f32>,
    v: Vec<f32>,
}

impl FlowField {
    pub fn new(width: usize, height: usize, u: Vec<f32>, v: Vec<f32>) -> Result<Self, FlowError> {
        let n = width * height;
        for grid in [&u, &v] {
            if grid.len() != n {
                return Err(FlowError::SizeMismatch {
                    width,
                    height,
                    got: grid.len(),
                });
            }
        }
        if let Some(i) = u.iter().zip(&v).position(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(FlowError::NonFinite(i));
        }
        Ok(Self {
            width,
            height,
            u,
            v,
        })
    }

    /// Field filled with one constant vector.
    pub fn uniform(width: usize, height: usize, u: f32, v: f32) -> Self {
        Self {
            width,
            height,
            u: vec![u; width * height],
            v: vec![v; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::uniform(width, height, 0.0, 0.0)
    }

    /// Evaluates `f(cx, cy)` at every cell center.
    ///
    /// Panics if `f` returns a non-finite value.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(f64, f64) -> (f64, f64)) -> Self {
        let mut u = Vec::with_capacity(width * height);
        let mut v = Vec::with_capacity(width * height);
        for j in 0..height {
            for i in 0..width {
                let (a, b) = f(i as f64 + 0.5, j as f64 + 0.5);
                u.push(a as f32);
                v.push(b as f32);
            }
        }
        Self::new(width, height, u, v).expect("flow function produced a non-finite value")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn u(&self) -> &[f32] {
        &self.u
    }

    pub fn v(&self) -> &[f32] {
        &self.v
    }

    /// Flow vector at cell `(i, j)`.
    pub fn at(&self, i: usize, j: usize) -> (f32, f32) {
        let k = j * self.width + i;
        (self.u[k], self.v[k])
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, u: f32, v: f32) {
        let k = j * self.width + i;
        self.u[k] = u;
        self.v[k] = v;
    }

    /// Adds a constant vector to every cell.
    pub fn offset(&self, du: f32, dv: f32) -> Self {
        Self {
            width: self.width,
            height: self.height,
            u: self.u.iter().map(|x| x + du).collect(),
            v: self.v.iter().map(|x| x + dv).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    /// Translation only; `dw = dh = 0`.
    None,
    /// Least-squares affine fit; translation is the fit's value at the box center.
    AffineFit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionEstimatorConfig {
    /// Fraction of the box width/height trimmed from each side before pooling.
    pub inner_margin_ratio: f64,
    pub min_pixels: usize,
    pub scale_mode: ScaleMode,
}

impl Default for MotionEstimatorConfig {
    fn default() -> Self {
        Self {
            inner_margin_ratio: 0.1,
            min_pixels: 16,
            scale_mode: ScaleMode::AffineFit,
        }
    }
}

impl MotionEstimatorConfig {
    pub fn validate(&self) -> Result<(), FlowError> {
        if !(0.0..0.5).contains(&self.inner_margin_ratio) {
            return Err(FlowError::InvalidConfig("inner_margin_ratio must be in [0, 0.5)"));
        }
        if self.min_pixels == 0 {
            return Err(FlowError::InvalidConfig("min_pixels must be positive"));
        }
        Ok(())
    }
}

/// Index range of cells whose centers fall in `[lo, hi)`, limited to `0..n`.
fn cell_span(lo: f64, hi: f64, n: usize) -> std::ops::Range<usize> {
    let first = (lo - 0.5).ceil().max(0.0);
    let end = (hi - 0.5).ceil().max(0.0);
    let first = (first as usize).min(n);
    let end = (end as usize).min(n);
    first..end.max(first)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// `value ≈ a + b·ox + c·oy` by least squares; returns `(a, b, c)`.
fn affine_fit(ox: &[f64], oy: &[f64], value: &[f64]) -> (f64, f64, f64) {
    let n = value.len() as f64;
    let mx = ox.iter().sum::<f64>() / n;
    let my = oy.iter().sum::<f64>() / n;
    let mv = value.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy, mut sxv, mut syv) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&x, &y), &v) in ox.iter().zip(oy).zip(value) {
        let (x, y, v) = (x - mx, y - my, v - mv);
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        sxv += x * v;
        syv += y * v;
    }
    let det = sxx * syy - sxy * sxy;
    let (b, c) = if sxx > 0.0 && syy > 0.0 && det > 1e-12 * sxx * syy {
        ((sxv * syy - syv * sxy) / det, (syv * sxx - sxv * sxy) / det)
    } else if sxx > 0.0 {
        (sxv / sxx, 0.0)
    } else if syy > 0.0 {
        (0.0, syv / syy)
    } else {
        (0.0, 0.0)
    };
    (mv - b * mx - c * my, b, c)
}

/// Pools the flow inside `b` into one motion estimate.
pub fn pool_motion(
    flow: &FlowField,
    b: &BBox,
    cfg: &MotionEstimatorConfig,
) -> Result<Motion, FlowError> {
    let mx = cfg.inner_margin_ratio * b.w;
    let my = cfg.inner_margin_ratio * b.h;
    let cols = cell_span(b.x + mx, b.right() - mx, flow.width);
    let rows = cell_span(b.y + my, b.bottom() - my, flow.height);
    let count = cols.len() * rows.len();
    if count < cfg.min_pixels {
        return Err(FlowError::TooFewSamples {
            got: count,
            need: cfg.min_pixels,
        });
    }

    let mut us = Vec::with_capacity(count);
    let mut vs = Vec::with_capacity(count);
    for j in rows.clone() {
        for i in cols.clone() {
            let (u, v) = flow.at(i, j);
            us.push(u as f64);
            vs.push(v as f64);
        }
    }

    match cfg.scale_mode {
        ScaleMode::None => Ok(Motion::translation(median(&mut us), median(&mut vs))),
        ScaleMode::AffineFit => {
            let (cx, cy) = b.center();
            let mut ox = Vec::with_capacity(count);
            let mut oy = Vec::with_capacity(count);
            for j in rows {
                for i in cols.clone() {
                    ox.push(i as f64 + 0.5 - cx);
                    oy.push(j as f64 + 0.5 - cy);
                }
            }
            let (dx, su, _) = affine_fit(&ox, &oy, &us);
            let (dy, _, sv) = affine_fit(&ox, &oy, &vs);
            Ok(Motion::new(dx, dy, su * b.w, sv * b.h))
        }
    }
}

/// Advances every target by its pooled motion and clips it to the frame.
///
/// Targets whose box holds too few samples keep their box unchanged. Output
/// order, ids and scores match the input; `frame` is set to `to_frame`.
pub fn flow_targets(
    flow: &FlowField,
    targets: &[Target],
    cfg: &MotionEstimatorConfig,
    to_frame: usize,
) -> Vec<Target> {
    let (w, h) = (flow.width as f64, flow.height as f64);
    targets
        .iter()
        .map(|t| {
            let start = clip_to_frame(&t.bbox, w, h);
            let m = pool_motion(flow, &start, cfg).unwrap_or(Motion::ZERO);
            Target {
                bbox: clip_to_frame(&apply_motion(&t.bbox, &m), w, h),
                frame: to_frame,
                ..*t
            }
        })
        .collect()
}

/// Squared Frobenius norm of the stacked motion differences.
pub fn motion_regression_error(predicted: &[Motion], truth: &[Motion]) -> Result<f64, FlowError> {
    if predicted.len() != truth.len() {
        return Err(FlowError::LengthMismatch {
            predicted: predicted.len(),
            truth: truth.len(),
        });
    }
    Ok(predicted
        .iter()
        .zip(truth)
        .map(|(p, t)| {
            let d = [p.dx - t.dx, p.dy - t.dy, p.dw - t.dw, p.dh - t.dh];
            d.iter().map(|x| x * x).sum::<f64>()
        })
        .sum())
}

#[derive(Debug, Error)]
#[error("could not load flow {from} -> {to}: {source}")]
pub struct FlowLoadError {
    pub from: usize,
    pub to: usize,
    #[source]
    pub source: Box<dyn StdError + Send + Sync>,
}

/// Supplies flow fields on demand.
///
/// `flow(to, depth)` is the field mapping positions in frame `to - depth`
/// onto frame `to`. `Ok(None)` means the field does not exist.
pub trait FlowSource {
    fn flow(&self, to: usize, depth: usize) -> Result<Option<Cow<'_, FlowField>>, FlowLoadError>;
}
