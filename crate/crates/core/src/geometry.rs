//! Axis-aligned boxes and per-frame box motion.
//!
//! Boxes are 0-based, continuous `(left, top, width, height)` in pixels. The
//! 1-based MOTChallenge convention is only applied by the `io` module.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("box field `{0}` is not finite")]
    NonFinite(&'static str),
    #[error("box has negative extent (w = {w}, h = {h})")]
    NegativeExtent { w: f64, h: f64 },
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self, GeometryError> {
        for (name, v) in [("x", x), ("y", y), ("w", w), ("h", h)] {
            if !v.is_finite() {
                return Err(GeometryError::NonFinite(name));
            }
        }
        if w < 0.0 || h < 0.0 {
            return Err(GeometryError::NegativeExtent { w, h });
        }
        Ok(Self { x, y, w, h })
    }

    /// Builds a box from corner coordinates; inverted extents collapse to zero.
    pub fn from_corners(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self {
            x: x1,
            y: y1,
            w: (x2 - x1).max(0.0),
            h: (y2 - y1).max(0.0),
        }
    }

    /// Box of size `w`×`h` centered on `(cx, cy)`.
    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Self {
            x: cx - w / 2.0,
            y: cy - h / 2.0,
            w: w.max(0.0),
            h: h.max(0.0),
        }
    }

    #[inline]
    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    #[inline]
    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    #[inline]
    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn is_degenerate(&self) -> bool {
        self.w <= 0.0 || self.h <= 0.0
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self {
            x: self.x + dx,
            y: self.y + dy,
            ..*self
        }
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let iw = self.right().min(other.right()) - self.x.max(other.x);
        let ih = self.bottom().min(other.bottom()) - self.y.max(other.y);
        if iw <= 0.0 || ih <= 0.0 {
            0.0
        } else {
            iw * ih
        }
    }
}

/// Per-target displacement over one frame pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Motion {
    pub dx: f64,
    pub dy: f64,
    pub dw: f64,
    pub dh: f64,
}

impl Motion {
    pub const ZERO: Motion = Motion {
        dx: 0.0,
        dy: 0.0,
        dw: 0.0,
        dh: 0.0,
    };

    pub fn new(dx: f64, dy: f64, dw: f64, dh: f64) -> Self {
        Self { dx, dy, dw, dh }
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        Self::new(dx, dy, 0.0, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.dx.is_finite() && self.dy.is_finite() && self.dw.is_finite() && self.dh.is_finite()
    }

    /// Motion that takes `from` onto `to`.
    pub fn between(from: &BBox, to: &BBox) -> Self {
        Self::new(to.x - from.x, to.y - from.y, to.w - from.w, to.h - from.h)
    }
}

impl std::ops::Neg for Motion {
    type Output = Motion;

    fn neg(self) -> Motion {
        Motion::new(-self.dx, -self.dy, -self.dw, -self.dh)
    }
}

/// Intersection over union; 0 when the union is empty.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).min(1.0)
    }
}

/// Component-wise `b + m`, with width and height clamped at zero.
pub fn apply_motion(b: &BBox, m: &Motion) -> BBox {
    BBox {
        x: b.x + m.dx,
        y: b.y + m.dy,
        w: (b.w + m.dw).max(0.0),
        h: (b.h + m.dh).max(0.0),
    }
}

/// Intersection of `b` with `[0, width] × [0, height]`. Boxes fully outside
/// collapse to a zero-area box on the nearest frame edge.
pub fn clip_to_frame(b: &BBox, width: f64, height: f64) -> BBox {
    let x1 = b.x.clamp(0.0, width);
    let y1 = b.y.clamp(0.0, height);
    let x2 = b.right().clamp(0.0, width);
    let y2 = b.bottom().clamp(0.0, height);
    BBox::from_corners(x1, y1, x2, y2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bb(x: f64, y: f64, w: f64, h: f64) -> BBox {
        BBox::new(x, y, w, h).unwrap()
    }

    #[test]
    fn iou_examples() {
        assert_eq!(iou(&bb(0., 0., 10., 10.), &bb(0., 0., 10., 10.)), 1.0);
        assert_eq!(iou(&bb(0., 0., 10., 10.), &bb(20., 20., 5., 5.)), 0.0);
        let third = iou(&bb(0., 0., 10., 10.), &bb(5., 0., 10., 10.));
        assert!((third - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn iou_of_degenerate_boxes_is_zero() {
        let z = bb(3., 3., 0., 0.);
        assert_eq!(iou(&z, &z), 0.0);
        assert_eq!(iou(&z, &bb(0., 0., 10., 10.)), 0.0);
    }

    #[test]
    fn construction_rejects_bad_fields() {
        assert!(matches!(
            BBox::new(0., 0., -1., 2.),
            Err(GeometryError::NegativeExtent { .. })
        ));
        assert!(matches!(
            BBox::new(f64::NAN, 0., 1., 2.),
            Err(GeometryError::NonFinite("x"))
        ));
        assert!(BBox::new(0., 0., 0., 0.).is_ok());
    }

    #[test]
    fn apply_motion_examples() {
        assert_eq!(
            apply_motion(&bb(10., 10., 20., 20.), &Motion::translation(3., -2.)),
            bb(13., 8., 20., 20.)
        );
        let b = bb(1.5, -2., 7., 9.);
        assert_eq!(apply_motion(&b, &Motion::ZERO), b);
        assert_eq!(
            apply_motion(&bb(0., 0., 4., 4.), &Motion::new(0., 0., -6., 0.)),
            bb(0., 0., 0., 4.)
        );
    }

    #[test]
    fn clip_examples() {
        assert_eq!(
            clip_to_frame(&bb(-5., -5., 10., 10.), 100., 100.),
            bb(0., 0., 5., 5.)
        );
        assert_eq!(
            clip_to_frame(&bb(10., 10., 5., 5.), 100., 100.),
            bb(10., 10., 5., 5.)
        );
        let out = clip_to_frame(&bb(200., 200., 10., 10.), 100., 100.);
        assert!(out.is_degenerate());
        assert_eq!(out.area(), 0.0);
    }

    fn int_box() -> impl Strategy<Value = BBox> {
        (-50i32..50, -50i32..50, 0i32..40, 0i32..40)
            .prop_map(|(x, y, w, h)| bb(x as f64, y as f64, w as f64, h as f64))
    }

    proptest! {
        #[test]
        fn iou_is_symmetric_and_bounded(a in int_box(), b in int_box()) {
            let ab = iou(&a, &b);
            prop_assert_eq!(ab, iou(&b, &a));
            prop_assert!((0.0..=1.0).contains(&ab));
        }

        #[test]
        fn iou_self_is_one(a in int_box()) {
            prop_assume!(a.area() > 0.0);
            prop_assert_eq!(iou(&a, &a), 1.0);
        }

        #[test]
        fn iou_translation_invariant(a in int_box(), b in int_box(), sx in -100i32..100, sy in -100i32..100) {
            let (sx, sy) = (sx as f64, sy as f64);
            prop_assert_eq!(iou(&a, &b), iou(&a.translate(sx, sy), &b.translate(sx, sy)));
        }

        #[test]
        fn motion_then_inverse_roundtrips(a in int_box(), dx in -20i32..20, dy in -20i32..20, dw in -20i32..20, dh in -20i32..20) {
            let m = Motion::new(dx as f64, dy as f64, dw as f64, dh as f64);
            prop_assume!(a.w + m.dw >= 0.0 && a.h + m.dh >= 0.0);
            prop_assert_eq!(apply_motion(&apply_motion(&a, &m), &-m), a);
        }
    }
}
