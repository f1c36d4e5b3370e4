use std::fs;
use std::path::Path;

use crate::error::{EdgeError, Result};
use crate::roi::BoundingBox;

pub const LANDMARK_COUNT: usize = 68;

/// One connected stroke of the 68-point layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LandmarkGroup {
    pub name: &'static str,
    pub first: usize,
    pub last: usize,
    pub closed: bool,
}

/// Canonical 68-point topology: open jaw, brows and nose bridge; closed
/// nose base, eyes and lips.
pub const GROUPS: [LandmarkGroup; 9] = [
    LandmarkGroup { name: "jaw", first: 0, last: 16, closed: false },
    LandmarkGroup { name: "right_brow", first: 17, last: 21, closed: false },
    LandmarkGroup { name: "left_brow", first: 22, last: 26, closed: false },
    LandmarkGroup { name: "nose_bridge", first: 27, last: 30, closed: false },
    LandmarkGroup { name: "nose_base", first: 31, last: 35, closed: true },
    LandmarkGroup { name: "right_eye", first: 36, last: 41, closed: true },
    LandmarkGroup { name: "left_eye", first: 42, last: 47, closed: true },
    LandmarkGroup { name: "outer_mouth", first: 48, last: 59, closed: true },
    LandmarkGroup { name: "inner_mouth", first: 60, last: 67, closed: true },
];

#[derive(Clone, Debug, PartialEq)]
pub struct LandmarkSet {
    points: Vec<(f64, f64)>,
}

impl LandmarkSet {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() != LANDMARK_COUNT {
            return Err(EdgeError::LandmarkCount { found: points.len() });
        }
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(EdgeError::InvalidArgument("landmark coordinates must be finite".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn point(&self, i: usize) -> (f64, f64) {
        self.points[i]
    }

    /// Parse `x y` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut points = Vec::with_capacity(LANDMARK_COUNT);
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |reason: String| EdgeError::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                reason,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [xs, ys] = fields[..] else {
                return Err(parse_err(format!("expected two numbers, got {line:?}")));
            };
            let x: f64 = xs.parse().map_err(|_| parse_err(format!("bad x {xs:?}")))?;
            let y: f64 = ys.parse().map_err(|_| parse_err(format!("bad y {ys:?}")))?;
            points.push((x, y));
        }
        Self::new(points)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| EdgeError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(LANDMARK_COUNT * 16);
        for (x, y) in &self.points {
            s.push_str(&format!("{x} {y}\n"));
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|source| EdgeError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn map(&self, f: impl Fn((f64, f64)) -> (f64, f64)) -> LandmarkSet {
        LandmarkSet {
            points: self.points.iter().map(|&p| f(p)).collect(),
        }
    }

    /// Clamp every point into `[0, width-1] × [0, height-1]`; returns how
    /// many points moved.
    pub fn clamp_to(&mut self, width: usize, height: usize) -> usize {
        let (mx, my) = ((width - 1) as f64, (height - 1) as f64);
        let mut moved = 0;
        for p in &mut self.points {
            let q = (p.0.clamp(0.0, mx), p.1.clamp(0.0, my));
            if q != *p {
                moved += 1;
                *p = q;
            }
        }
        if moved > 0 {
            log::warn!("clamped {moved} landmark(s) into {width}x{height}");
        }
        moved
    }

    pub fn all_within(&self, bounds: &BoundingBox) -> bool {
        self.points.iter().all(|&(x, y)| {
            x >= bounds.x as f64 && y >= bounds.y as f64 && x <= (bounds.right() - 1) as f64 && y <= (bounds.bottom() - 1) as f64
        })
    }

    /// Face region: jaw 0–16 followed by the brows walked back from 26 to 17.
    pub fn face_polygon(&self) -> Vec<(f64, f64)> {
        let mut poly: Vec<(f64, f64)> = self.points[0..=16].to_vec();
        poly.extend(self.points[17..=26].iter().rev());
        poly
    }
}
