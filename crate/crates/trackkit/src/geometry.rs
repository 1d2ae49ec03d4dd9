//! Box arithmetic and the quantized coordinate text codec.
//!
//! All boxes live in normalized image coordinates: corners in `[0, 1]` with
//! `x1 <= x2` and `y1 <= y2`. The codec maps a box to four integer bins in
//! `[0, 100)` and renders them as `[a,b,c,d]` — the exact textual form the
//! tracking protocol and dataset records use for coordinates.

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

/// Errors reported by box construction and the coordinate codec.
#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    /// Corners are out of range, unordered, or not finite.
    #[error("invalid box [{x1}, {y1}, {x2}, {y2}]: corners must be finite, in [0, 1], with x1 <= x2 and y1 <= y2")]
    InvalidBox { x1: f64, y1: f64, x2: f64, y2: f64 },
    /// An operation needed a positive-area box but got a zero-width or
    /// zero-height one.
    #[error("degenerate box: width and height must be positive")]
    DegenerateBox,
    /// Frame dimensions must be finite and positive.
    #[error("invalid frame dimensions {width}x{height}")]
    InvalidFrameDims { width: f64, height: f64 },
    /// A quantized coordinate fell outside `[0, 100)`.
    #[error("quantized value {0} outside [0, 100)")]
    InvalidQuant(i64),
}

/// An axis-aligned box in normalized image coordinates.
///
/// Construction validates the corner invariants, so every `BoundingBox` in
/// the program is finite, in `[0, 1]`, and properly ordered. Zero-width or
/// zero-height boxes are representable; operations that need positive area
/// (aspect ratios, normalized center errors) reject them individually.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
}

impl BoundingBox {
    /// Builds a box from corners, rejecting out-of-range, unordered, or
    /// non-finite values.
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self, GeometryError> {
        let ordered = x1 <= x2 && y1 <= y2;
        let in_range = [x1, y1, x2, y2]
            .iter()
            .all(|v| v.is_finite() && (0.0..=1.0).contains(v));
        if !ordered || !in_range {
            return Err(GeometryError::InvalidBox { x1, y1, x2, y2 });
        }
        Ok(Self { x1, y1, x2, y2 })
    }

    /// Builds a box from a `[x1, y1, x2, y2]` array.
    pub fn from_array(c: [f64; 4]) -> Result<Self, GeometryError> {
        Self::new(c[0], c[1], c[2], c[3])
    }

    /// The full normalized frame, `[0, 1] x [0, 1]`.
    pub fn full_frame() -> Self {
        Self { x1: 0.0, y1: 0.0, x2: 1.0, y2: 1.0 }
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn y1(&self) -> f64 {
        self.y1
    }

    pub fn x2(&self) -> f64 {
        self.x2
    }

    pub fn y2(&self) -> f64 {
        self.y2
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Center point `(cx, cy)`.
    pub fn center(&self) -> (f64, f64) {
        ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)
    }

    /// Corners as `[x1, y1, x2, y2]`.
    pub fn to_array(&self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    /// Quantizes each coordinate to its bin index `floor(v * 100)`, clamped
    /// to `[0, 99]` so the closed upper edge `v = 1.0` lands in the last bin.
    pub fn quantize(&self) -> QuantBox {
        let q = |v: f64| (v * 100.0).floor().clamp(0.0, 99.0) as u8;
        QuantBox {
            a: q(self.x1),
            b: q(self.y1),
            c: q(self.x2),
            d: q(self.y2),
        }
    }
}

/// A box quantized to integer coordinate bins in `[0, 100)`.
///
/// Rendered via `Display` as `[a,b,c,d]` with no spaces — the canonical
/// coordinate text format. Values are range-checked on construction, but
/// corner ordering is not: parsed text may encode an unordered tuple, which
/// [`QuantBox::dequantize`] rejects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuantBox {
    a: u8,
    b: u8,
    c: u8,
    d: u8,
}

impl QuantBox {
    /// Builds a quantized box, rejecting values outside `[0, 100)`.
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self, GeometryError> {
        for v in [a, b, c, d] {
            if !(0..100).contains(&v) {
                return Err(GeometryError::InvalidQuant(v));
            }
        }
        Ok(Self { a: a as u8, b: b as u8, c: c as u8, d: d as u8 })
    }

    /// Coordinates as `[a, b, c, d]`.
    pub fn to_array(&self) -> [u8; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Maps each bin back to its center, `(q + 0.5) / 100`.
    ///
    /// Bin centers sit half a bin away from every quantization boundary, so
    /// `dequantize` then [`BoundingBox::quantize`] is the identity. Fails
    /// with [`GeometryError::InvalidBox`] if the tuple is unordered.
    pub fn dequantize(&self) -> Result<BoundingBox, GeometryError> {
        let d = |q: u8| (q as f64 + 0.5) / 100.0;
        BoundingBox::new(d(self.a), d(self.b), d(self.c), d(self.d))
    }
}

impl fmt::Display for QuantBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{},{}]", self.a, self.b, self.c, self.d)
    }
}

/// Intersection-over-union of two boxes.
///
/// Symmetric and always in `[0, 1]`. If the union has zero area (both boxes
/// degenerate) the overlap is defined as 0.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let ih = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Euclidean distance between box centers in pixels, after scaling normalized
/// coordinates by the frame dimensions.
pub fn center_error(
    gt: &BoundingBox,
    pred: &BoundingBox,
    frame_w: f64,
    frame_h: f64,
) -> Result<f64, GeometryError> {
    if !(frame_w.is_finite() && frame_h.is_finite() && frame_w > 0.0 && frame_h > 0.0) {
        return Err(GeometryError::InvalidFrameDims { width: frame_w, height: frame_h });
    }
    let (gx, gy) = gt.center();
    let (px, py) = pred.center();
    Ok(f64::hypot((gx - px) * frame_w, (gy - py) * frame_h))
}

/// Center distance normalized by the ground-truth box size: the x offset is
/// divided by the ground-truth width and the y offset by its height before
/// taking the Euclidean norm. Requires a positive-area ground-truth box.
pub fn norm_center_error(gt: &BoundingBox, pred: &BoundingBox) -> Result<f64, GeometryError> {
    if gt.width() <= 0.0 || gt.height() <= 0.0 {
        return Err(GeometryError::DegenerateBox);
    }
    let (gx, gy) = gt.center();
    let (px, py) = pred.center();
    Ok(f64::hypot((gx - px) / gt.width(), (gy - py) / gt.height()))
}

/// Scans free-form text for well-formed quantized coordinate tuples.
///
/// A tuple is a bracketed list of exactly four integers in `[0, 100)`,
/// tolerating whitespace around the numbers. Malformed fragments — wrong
/// arity, out-of-range values, stray words — are skipped, and matches are
/// returned left to right. Never fails: text with no tuples yields an empty
/// vector.
pub fn parse_coords(text: &str) -> Vec<QuantBox> {
    static TUPLE: OnceLock<Regex> = OnceLock::new();
    let re = TUPLE.get_or_init(|| {
        Regex::new(r"\[\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\]").expect("valid regex")
    });
    re.captures_iter(text)
        .filter_map(|cap| {
            let mut vals = [0i64; 4];
            for (slot, group) in vals.iter_mut().zip(1..=4) {
                *slot = cap[group].parse().ok()?;
            }
            QuantBox::new(vals[0], vals[1], vals[2], vals[3]).ok()
        })
        .collect()
}
