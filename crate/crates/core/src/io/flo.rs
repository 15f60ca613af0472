//! Middlebury `.flo` container.
//!
//! Layout, all little-endian: `f32` magic `202021.25`, `i32` width, `i32`
//! height, then `width * height` interleaved `(u, v)` `f32` pairs, row-major.

use thiserror::Error;

use crate::flow::FlowField;

pub const FLO_MAGIC: f32 = 202021.25;

const HEADER: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowFileError {
    #[error("bad magic number {0:?}")]
    BadMagic(f32),
    #[error("file has {got} bytes, expected {expected}")]
    TruncatedFile { expected: usize, got: usize },
    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: i64, height: i64 },
    #[error("non-finite flow value at pixel {0}")]
    NonFiniteValue(usize),
    #[error("{0} unexpected bytes after the flow data")]
    TrailingData(usize),
}

fn word(bytes: &[u8], at: usize) -> [u8; 4] {
    bytes[at..at + 4].try_into().expect("4-byte slice")
}

pub fn read_flow(bytes: &[u8]) -> Result<FlowField, FlowFileError> {
    if bytes.len() < 4 {
        return Err(FlowFileError::TruncatedFile {
            expected: HEADER,
            got: bytes.len(),
        });
    }
    let magic = f32::from_le_bytes(word(bytes, 0));
    if magic.to_bits() != FLO_MAGIC.to_bits() {
        return Err(FlowFileError::BadMagic(magic));
    }
    if bytes.len() < HEADER {
        return Err(FlowFileError::TruncatedFile {
            expected: HEADER,
            got: bytes.len(),
        });
    }
    let width = i32::from_le_bytes(word(bytes, 4)) as i64;
    let height = i32::from_le_bytes(word(bytes, 8)) as i64;
    let invalid = FlowFileError::InvalidDimensions { width, height };
    if width <= 0 || height <= 0 {
        return Err(invalid);
    }
    let cells = (width as usize)
        .checked_mul(height as usize)
        .ok_or(invalid.clone())?;
    let expected = cells
        .checked_mul(8)
        .and_then(|n| n.checked_add(HEADER))
        .ok_or(invalid)?;
    if bytes.len() < expected {
        return Err(FlowFileError::TruncatedFile {
            expected,
            got: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(FlowFileError::TrailingData(bytes.len() - expected));
    }

    let mut u = Vec::with_capacity(cells);
    let mut v = Vec::with_capacity(cells);
    for k in 0..cells {
        let at = HEADER + 8 * k;
        let a = f32::from_le_bytes(word(bytes, at));
        let b = f32::from_le_bytes(word(bytes, at + 4));
        if !a.is_finite() || !b.is_finite() {
            return Err(FlowFileError::NonFiniteValue(k));
        }
        u.push(a);
        v.push(b);
    }
    Ok(FlowField::new(width as usize, height as usize, u, v).expect("sizes and values checked"))
}

/// Serializes a field. Panics if a dimension exceeds `i32::MAX`.
pub fn write_flow(flow: &FlowField) -> Vec<u8> {
    let w = i32::try_from(flow.width()).expect("width fits in i32");
    let h = i32::try_from(flow.height()).expect("height fits in i32");
    let mut out = Vec::with_capacity(HEADER + 8 * flow.u().len());
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&w.to_le_bytes());
    out.extend_from_slice(&h.to_le_bytes());
    for (a, b) in flow.u().iter().zip(flow.v()) {
        out.extend_from_slice(&a.to_le_bytes());
        out.extend_from_slice(&b.to_le_bytes());
    }
    out
}
