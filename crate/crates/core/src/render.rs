//! Binary PPM overlays with one color per trajectory id.

use crate::geometry::BBox;
use crate::track::{Target, TrackId};

pub const PALETTE_SIZE: usize = 64;

const BACKGROUND: [u8; 3] = [0, 0, 0];

fn hsv(h: f64, s: f64, v: f64) -> [u8; 3] {
    let i = (h * 6.0).floor();
    let f = h * 6.0 - i;
    let (p, q, t) = (v * (1.0 - s), v * (1.0 - f * s), v * (1.0 - (1.0 - f) * s));
    let (r, g, b) = match i as i64 % 6 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [r, g, b].map(|c| (c * 255.0).round() as u8)
}

/// 64 colors: hues stepped by the golden ratio, over four saturation/value bands.
pub fn palette() -> [[u8; 3]; PALETTE_SIZE] {
    const BANDS: [(f64, f64); 4] = [(0.95, 1.0), (0.6, 0.9), (0.95, 0.7), (0.45, 1.0)];
    let mut out = [[0u8; 3]; PALETTE_SIZE];
    for (i, c) in out.iter_mut().enumerate() {
        let h = (i as f64 * 0.618_033_988_749_895).fract();
        let (s, v) = BANDS[i % 4];
        *c = hsv(h, s, v);
    }
    out
}

/// Ids cycle through the palette: `palette[(id - 1) % 64]`.
pub fn color_for(id: TrackId) -> [u8; 3] {
    palette()[((id.get() - 1) % PALETTE_SIZE as u64) as usize]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canvas {
    width: usize,
    height: usize,
    rgb: Vec<u8>,
}

impl Canvas {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            rgb: BACKGROUND.repeat(width * height),
        }
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let k = 3 * (y * self.width + x);
        [self.rgb[k], self.rgb[k + 1], self.rgb[k + 2]]
    }

    fn put(&mut self, x: i64, y: i64, c: [u8; 3]) {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return;
        }
        let k = 3 * (y as usize * self.width + x as usize);
        self.rgb[k..k + 3].copy_from_slice(&c);
    }

    /// Draws the outline of `b` covering the pixels it touches; parts off the
    /// canvas are dropped.
    pub fn outline(&mut self, b: &BBox, c: [u8; 3], thickness: usize) {
        if self.width == 0 || self.height == 0 {
            return;
        }
        let x0 = b.x.floor() as i64;
        let y0 = b.y.floor() as i64;
        let x1 = (b.right().ceil() as i64 - 1).max(x0);
        let y1 = (b.bottom().ceil() as i64 - 1).max(y0);
        let t = thickness.max(1) as i64;
        // limit the scan to the canvas so huge boxes stay cheap
        let (cx0, cx1) = (x0.max(0), x1.min(self.width as i64 - 1));
        let (cy0, cy1) = (y0.max(0), y1.min(self.height as i64 - 1));
        for k in 0..t {
            for x in cx0..=cx1 {
                self.put(x, y0 + k, c);
                self.put(x, y1 - k, c);
            }
            for y in cy0..=cy1 {
                self.put(x0 + k, y, c);
                self.put(x1 - k, y, c);
            }
        }
    }

    /// Binary `P6` encoding.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }
}

/// One frame with each target's box outlined in its id color.
pub fn render_frame(width: usize, height: usize, targets: &[Target]) -> Canvas {
    let mut c = Canvas::new(width, height);
    for t in targets {
        c.outline(&t.bbox, color_for(t.id), 2);
    }
    c
}
