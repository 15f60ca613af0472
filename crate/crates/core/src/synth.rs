//! Seeded synthetic sequences: ground truth, noisy detections, analytic flow.
//!
//! Targets move with constant velocity and a constant per-frame scale rate.
//! The flow from frame `a` to frame `b` is computed exactly from the ground
//! truth: inside target `k`'s box at `a`,
//!
//! ```text
//! u(x, y) = Δx + (Δw / w)·(x − cx)
//! v(x, y) = Δy + (Δh / h)·(y − cy)
//! ```
//!
//! where `Δ` is the difference between its boxes at `b` and `a` and `(cx, cy)`
//! is the box center at `a`. Pooling this field with an affine fit returns
//! `(Δx, Δy, Δw, Δh)`. Outside every box the field is the background motion
//! times the frame gap; where boxes overlap, the nearest box center wins.

use std::borrow::Cow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{FlowField, FlowLoadError, FlowSource};
use crate::geometry::{clip_to_frame, iou, BBox};
use crate::pipeline::FrameBundle;
use crate::track::{Detection, Target, TrackId, TrajectorySet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("{0}")]
    Invalid(String),
    #[error("target {target} leaves the frame at frame {frame}")]
    OutOfFrame { target: usize, frame: usize },
    #[error("target {target}: occlusion window [{start}, {end}) is empty or outside 0..{frames}")]
    BadOcclusion {
        target: usize,
        start: usize,
        end: usize,
        frames: usize,
    },
    #[error("spec file: {0}")]
    Parse(String),
}

fn invalid(msg: impl Into<String>) -> SpecError {
    SpecError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    /// Box at frame 0 as `[x, y, w, h]`.
    pub bbox: [f64; 4],
    /// Displacement of the top-left corner per frame.
    pub velocity: [f64; 2],
    /// Width and height grow by the factor `1 + scale_rate` per frame.
    #[serde(default)]
    pub scale_rate: f64,
    /// Frame intervals `[start, end)` with no detection for this target.
    #[serde(default)]
    pub occlusions: Vec<[usize; 2]>,
}

impl TargetSpec {
    pub fn box_at(&self, frame: usize) -> BBox {
        let [x, y, w, h] = self.bbox;
        let t = frame as f64;
        let s = (1.0 + self.scale_rate).powi(frame as i32);
        BBox::new(x + self.velocity[0] * t, y + self.velocity[1] * t, w * s, h * s)
            .expect("validated spec yields finite non-negative boxes")
    }

    pub fn occluded(&self, frame: usize) -> bool {
        self.occlusions.iter().any(|&[s, e]| (s..e).contains(&frame))
    }
}

/// Corruption applied to the ground truth to produce detections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpec {
    /// Standard deviation of the box-center offset, pixels.
    pub center_std: f64,
    /// Standard deviation of the width and height offsets, pixels.
    pub size_std: f64,
    /// Detection scores are uniform over `[lo, hi]`.
    pub score_range: [f64; 2],
    /// Mean number of false positives per frame.
    pub fp_rate: f64,
    /// Probability that a visible target yields no detection.
    pub miss_rate: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            center_std: 0.0,
            size_std: 0.0,
            score_range: [1.0, 1.0],
            fp_rate: 0.0,
            miss_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    #[serde(default = "default_frame_rate")]
    pub frame_rate: f64,
    /// Flow outside all boxes, per frame.
    #[serde(default)]
    pub background: [f64; 2],
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub targets: Vec<TargetSpec>,
}

fn default_frame_rate() -> f64 {
    30.0
}

impl SynthSpec {
    pub fn from_toml(text: &str) -> Result<Self, SpecError> {
        let spec: SynthSpec = toml::from_str(text).map_err(|e| SpecError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.frames == 0 || self.width == 0 || self.height == 0 {
            return Err(invalid("frames, width and height must be positive"));
        }
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0) {
            return Err(invalid("frame_rate must be positive"));
        }
        if !self.background.iter().all(|v| v.is_finite()) {
            return Err(invalid("background motion must be finite"));
        }
        let n = &self.noise;
        if !(n.center_std >= 0.0 && n.center_std.is_finite() && n.size_std >= 0.0 && n.size_std.is_finite()) {
            return Err(invalid("noise standard deviations must be finite and non-negative"));
        }
        let [lo, hi] = n.score_range;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(invalid("score_range must satisfy 0 <= lo <= hi <= 1"));
        }
        if !(n.fp_rate >= 0.0 && n.fp_rate.is_finite()) {
            return Err(invalid("fp_rate must be finite and non-negative"));
        }
        if !(0.0..=1.0).contains(&n.miss_rate) {
            return Err(invalid("miss_rate must be in [0, 1]"));
        }
        let (fw, fh) = (self.width as f64, self.height as f64);
        for (k, t) in self.targets.iter().enumerate() {
            let finite = t.bbox.iter().chain(&t.velocity).all(|v| v.is_finite());
            if !finite || !t.scale_rate.is_finite() || t.scale_rate <= -1.0 {
                return Err(invalid(format!("target {k} has non-finite kinematics or scale_rate <= -1")));
            }
            if t.bbox[2] <= 0.0 || t.bbox[3] <= 0.0 {
                return Err(invalid(format!("target {k} needs a positive-area box")));
            }
            for &[s, e] in &t.occlusions {
                if s >= e || e > self.frames {
                    return Err(SpecError::BadOcclusion {
                        target: k,
                        start: s,
                        end: e,
                        frames: self.frames,
                    });
                }
            }
            for f in 0..self.frames {
                let b = t.box_at(f);
                if b.x < 0.0 || b.y < 0.0 || b.right() > fw || b.bottom() > fh || b.is_degenerate() {
                    return Err(SpecError::OutOfFrame { target: k, frame: f });
                }
            }
        }
        Ok(())
    }
}

/// Everything [`generate`] produces for one sequence.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub gt: TrajectorySet,
    pub detections: Vec<Vec<Detection>>,
    pub flow: SyntheticFlow,
}

impl Synthetic {
    /// Materializes per-frame bundles with lookback fields up to `max_depth`.
    pub fn bundles(&self, max_depth: usize) -> Vec<FrameBundle> {
        self.detections
            .iter()
            .enumerate()
            .map(|(t, dets)| FrameBundle {
                frame: t,
                flow_prev: (t >= 1).then(|| self.flow.field(t, 1)),
                lookback: (2..=max_depth.min(t)).map(|d| (d, self.flow.field(t, d))).collect(),
                detections: dets.clone(),
            })
            .collect()
    }
}

/// Lazily evaluated analytic flow for a spec.
#[derive(Debug, Clone)]
pub struct SyntheticFlow {
    width: usize,
    height: usize,
    background: [f64; 2],
    /// `boxes[k][t]`: target `k` at frame `t`.
    boxes: Vec<Vec<BBox>>,
}

impl SyntheticFlow {
    pub fn new(spec: &SynthSpec) -> Self {
        Self {
            width: spec.width,
            height: spec.height,
            background: spec.background,
            boxes: spec
                .targets
                .iter()
                .map(|t| (0..spec.frames).map(|f| t.box_at(f)).collect())
                .collect(),
        }
    }

    pub fn frames(&self) -> usize {
        self.boxes.first().map_or(usize::MAX, Vec::len)
    }

    /// Field from frame `to - depth` to frame `to`. Panics if `depth > to`.
    pub fn field(&self, to: usize, depth: usize) -> FlowField {
        let from = to - depth;
        let g = depth as f64;
        let mut field = FlowField::uniform(
            self.width,
            self.height,
            (self.background[0] * g) as f32,
            (self.background[1] * g) as f32,
        );
        let mut owner_dist = vec![f64::INFINITY; self.width * self.height];
        for track in &self.boxes {
            let (a, b) = (track[from], track[to]);
            let (cx, cy) = a.center();
            let (ku, kv) = ((b.w - a.w) / a.w, (b.h - a.h) / a.h);
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let cols = centers_in(a.x, a.right(), self.width);
            let rows = centers_in(a.y, a.bottom(), self.height);
            for j in rows {
                let py = j as f64 + 0.5;
                for i in cols.clone() {
                    let px = i as f64 + 0.5;
                    let d = (px - cx).powi(2) + (py - cy).powi(2);
                    let k = j * self.width + i;
                    // strict comparison keeps the earlier target on ties
                    if d < owner_dist[k] {
                        owner_dist[k] = d;
                        field.set(i, j, (dx + ku * (px - cx)) as f32, (dy + kv * (py - cy)) as f32);
                    }
                }
            }
        }
        field
    }
}

/// Cells whose centers fall in `[lo, hi)`.
fn centers_in(lo: f64, hi: f64, n: usize) -> std::ops::Range<usize> {
    let first = ((lo - 0.5).ceil().max(0.0) as usize).min(n);
    let end = ((hi - 0.5).ceil().max(0.0) as usize).min(n);
    first..end.max(first)
}

impl FlowSource for SyntheticFlow {
    fn flow(&self, to: usize, depth: usize) -> Result<Option<Cow<'_, FlowField>>, FlowLoadError> {
        if depth == 0 || depth > to || to >= self.frames() {
            return Ok(None);
        }
        Ok(Some(Cow::Owned(self.field(to, depth))))
    }
}

/// Largest false-positive box side, pixels.
const FP_MAX_SIDE: f64 = 96.0;
const FP_MIN_SIDE: f64 = 16.0;

/// Generates ground truth, detections and flow. Deterministic in the spec.
pub fn generate(spec: &SynthSpec) -> Result<Synthetic, SpecError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (fw, fh) = (spec.width as f64, spec.height as f64);
    let n = &spec.noise;
    let center = Normal::new(0.0, n.center_std).expect("validated std");
    let size = Normal::new(0.0, n.size_std).expect("validated std");
    let fp_count = (n.fp_rate > 0.0).then(|| Poisson::new(n.fp_rate).expect("validated rate"));
    let [lo, hi] = n.score_range;

    let mut gt = TrajectorySet::new();
    let mut detections = Vec::with_capacity(spec.frames);
    for f in 0..spec.frames {
        let mut dets = Vec::new();
        for (k, t) in spec.targets.iter().enumerate() {
            let b = t.box_at(f);
            let id = TrackId::new(k as u64 + 1).expect("positive id");
            gt.insert(&Target::new(b, id, 1.0, f).expect("unit score"))
                .expect("one entry per frame");
            // draw the same numbers whether or not the detection is kept
            let missed = rng.random::<f64>() < n.miss_rate;
            let (ox, oy) = (center.sample(&mut rng), center.sample(&mut rng));
            let (ow, oh) = (size.sample(&mut rng), size.sample(&mut rng));
            let score = lo + (hi - lo) * rng.random::<f64>();
            if missed || t.occluded(f) {
                continue;
            }
            let (cx, cy) = b.center();
            let noisy = BBox::from_center(cx + ox, cy + oy, (b.w + ow).max(1.0), (b.h + oh).max(1.0));
            let clipped = clip_to_frame(&noisy, fw, fh);
            if !clipped.is_degenerate() {
                dets.push(Detection::new(clipped, score).expect("score in range"));
            }
        }
        let fps = fp_count.as_ref().map_or(0, |p| p.sample(&mut rng) as usize);
        for _ in 0..fps {
            let w = rng.random_range(FP_MIN_SIDE..=FP_MAX_SIDE).min(fw);
            let h = rng.random_range(FP_MIN_SIDE..=FP_MAX_SIDE).min(fh);
            let x = rng.random::<f64>() * (fw - w);
            let y = rng.random::<f64>() * (fh - h);
            let score = lo + (hi - lo) * rng.random::<f64>();
            let b = BBox::new(x, y, w, h).expect("finite box");
            dets.push(Detection::new(b, score).expect("score in range"));
        }
        detections.push(dets);
    }
    Ok(Synthetic {
        gt,
        detections,
        flow: SyntheticFlow::new(spec),
    })
}

pub const JITTER_MAX_RATIO: f64 = 0.15;
pub const JITTER_MIN_IOU: f64 = 0.8;
pub const JITTER_MAX_DRAWS: usize = 1000;

/// One perturbation: size factors and center shifts as fractions of the size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterDraw {
    pub scale_w: f64,
    pub scale_h: f64,
    pub shift_x: f64,
    pub shift_y: f64,
}

impl JitterDraw {
    pub const IDENTITY: JitterDraw = JitterDraw {
        scale_w: 1.0,
        scale_h: 1.0,
        shift_x: 0.0,
        shift_y: 0.0,
    };

    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let r = JITTER_MAX_RATIO;
        Self {
            scale_w: rng.random_range(1.0 - r..=1.0 + r),
            scale_h: rng.random_range(1.0 - r..=1.0 + r),
            shift_x: rng.random_range(-r..=r),
            shift_y: rng.random_range(-r..=r),
        }
    }
}

/// Applies a draw: the center moves by `shift · (w, h)` of the original box
/// and the size is scaled.
pub fn apply_jitter(b: &BBox, d: &JitterDraw) -> BBox {
    let (cx, cy) = b.center();
    BBox::from_center(
        cx + d.shift_x * b.w,
        cy + d.shift_y * b.h,
        b.w * d.scale_w,
        b.h * d.scale_h,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterOutcome {
    pub bbox: BBox,
    pub draw: JitterDraw,
    /// Draws taken, including the accepted one.
    pub draws: usize,
    /// No draw was accepted within [`JITTER_MAX_DRAWS`]; the box is unchanged.
    pub fell_back: bool,
}

/// Rejection-samples draws until the jittered box has IoU above
/// [`JITTER_MIN_IOU`] with `b`.
pub fn jitter_with<R: Rng + ?Sized>(b: &BBox, rng: &mut R) -> JitterOutcome {
    for k in 1..=JITTER_MAX_DRAWS {
        let draw = JitterDraw::sample(rng);
        let out = apply_jitter(b, &draw);
        if iou(b, &out) > JITTER_MIN_IOU {
            return JitterOutcome {
                bbox: out,
                draw,
                draws: k,
                fell_back: false,
            };
        }
    }
    JitterOutcome {
        bbox: *b,
        draw: JitterDraw::IDENTITY,
        draws: JITTER_MAX_DRAWS,
        fell_back: true,
    }
}

pub fn jitter(b: &BBox, seed: u64) -> BBox {
    jitter_with(b, &mut ChaCha8Rng::seed_from_u64(seed)).bbox
}

pub const SAMPLING_RATES: [usize; 8] = [1, 3, 5, 10, 15, 20, 25, 30];

/// Every frame pair `(t, t + r)` inside `0..frames`, rate by rate in the given order.
pub fn pair_sampling(frames: usize, rates: &[usize]) -> Vec<(usize, usize)> {
    rates
        .iter()
        .filter(|&&r| r > 0)
        .flat_map(|&r| (0..frames.saturating_sub(r)).map(move |t| (t, t + r)))
        .collect()
}

/// Suite shape shared by the clean and occlusion suites.
pub const SUITE_SEQUENCES: usize = 5;
pub const SUITE_TARGETS: usize = 8;
pub const SUITE_FRAMES: usize = 100;
pub const SUITE_WIDTH: usize = 640;
pub const SUITE_HEIGHT: usize = 480;

/// Eight targets in separate horizontal lanes, moving sideways at multiples
/// of a quarter pixel per frame.
fn lane_spec(seed: u64, occlude: bool) -> SynthSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lane = SUITE_HEIGHT as f64 / SUITE_TARGETS as f64;
    let frames = SUITE_FRAMES;
    let span = (frames - 1) as f64;
    let targets = (0..SUITE_TARGETS)
        .map(|k| {
            let w = 4.0 * rng.random_range(6..=10) as f64;
            let h = 4.0 * rng.random_range(8..=12) as f64;
            let vx = 0.25 * rng.random_range(-6..=6) as f64;
            let y = k as f64 * lane + ((lane - h) / 2.0).floor();
            let room = SUITE_WIDTH as f64 - w - span * vx.abs();
            let x = rng.random_range(0..=room as usize) as f64 + if vx < 0.0 { span * -vx } else { 0.0 };
            let mut occlusions = Vec::new();
            if occlude {
                let mut f = rng.random_range(5..15);
                while f + 5 < frames - 5 {
                    let len = rng.random_range(1..=5);
                    occlusions.push([f, f + len]);
                    f += len + rng.random_range(8..20);
                }
            }
            TargetSpec {
                bbox: [x, y, w, h],
                velocity: [vx, 0.0],
                scale_rate: 0.0,
                occlusions,
            }
        })
        .collect();
    SynthSpec {
        frames,
        width: SUITE_WIDTH,
        height: SUITE_HEIGHT,
        frame_rate: 30.0,
        background: [0.0, 0.0],
        seed,
        noise: NoiseSpec::default(),
        targets,
    }
}

fn suite(seed: u64, occlude: bool, prefix: &str) -> Vec<(String, SynthSpec)> {
    (0..SUITE_SEQUENCES as u64)
        .map(|k| {
            let s = seed.wrapping_mul(1_000).wrapping_add(k);
            (format!("{prefix}-{:02}", k + 1), lane_spec(s, occlude))
        })
        .collect()
}

/// Noise-free sequences without occlusion.
pub fn clean_suite(seed: u64) -> Vec<(String, SynthSpec)> {
    suite(seed, false, "clean")
}

/// Noise-free sequences where each target drops out for 1 to 5 frames at a time.
pub fn occlusion_suite(seed: u64) -> Vec<(String, SynthSpec)> {
    suite(seed, true, "occl")
}
