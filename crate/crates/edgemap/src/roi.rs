use crate::error::{EdgeError, Result};

/// Axis-aligned pixel box; `x`, `y` may be negative before clipping.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundingBox {
    pub x: i64,
    pub y: i64,
    pub w: usize,
    pub h: usize,
}

impl BoundingBox {
    pub fn new(x: i64, y: i64, w: usize, h: usize) -> Result<Self> {
        if w == 0 || h == 0 {
            return Err(EdgeError::InvalidArgument(format!("box extent {w}x{h} must be positive")));
        }
        Ok(Self { x, y, w, h })
    }

    pub fn right(&self) -> i64 {
        self.x + self.w as i64
    }

    pub fn bottom(&self) -> i64 {
        self.y + self.h as i64
    }

    pub fn intersect(&self, other: &BoundingBox) -> Option<BoundingBox> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        (x1 > x0 && y1 > y0).then(|| BoundingBox {
            x: x0,
            y: y0,
            w: (x1 - x0) as usize,
            h: (y1 - y0) as usize,
        })
    }

    pub fn contains(&self, other: &BoundingBox) -> bool {
        other.x >= self.x && other.y >= self.y && other.right() <= self.right() && other.bottom() <= self.bottom()
    }
}

/// Scale the side lengths of `face` by `factor` about its center, round
/// outwards to whole pixels and clip to `bounds`.
pub fn expand_roi(face: &BoundingBox, factor: f64, bounds: &BoundingBox) -> Result<BoundingBox> {
    if !(factor >= 1.0) || !factor.is_finite() {
        return Err(EdgeError::InvalidArgument(format!("ROI factor {factor} must be >= 1")));
    }
    face.intersect(bounds).ok_or(EdgeError::EmptyRoi)?;
    let grown = unclipped(face, factor);
    grown.intersect(bounds).ok_or(EdgeError::EmptyRoi)
}

/// The expanded box before clipping.
pub fn unclipped(face: &BoundingBox, factor: f64) -> BoundingBox {
    // Snap away float noise so that e.g. 40 * 1.5 stays exactly 60.
    const SNAP: f64 = 1e-9;
    let cx = face.x as f64 + face.w as f64 / 2.0;
    let cy = face.y as f64 + face.h as f64 / 2.0;
    let hw = face.w as f64 * factor / 2.0;
    let hh = face.h as f64 * factor / 2.0;
    let x0 = (cx - hw + SNAP).floor() as i64;
    let y0 = (cy - hh + SNAP).floor() as i64;
    let x1 = (cx + hw - SNAP).ceil() as i64;
    let y1 = (cy + hh - SNAP).ceil() as i64;
    BoundingBox {
        x: x0,
        y: y0,
        w: (x1 - x0) as usize,
        h: (y1 - y0) as usize,
    }
}
