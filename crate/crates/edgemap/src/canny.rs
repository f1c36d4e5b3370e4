//! Canny edge detection.
//!
//! Stages: offset removal, separable Gaussian blur (radius `ceil(3σ)`, replicated border),
//! 3×3 Sobel gradients, non-maximum suppression over four direction bins,
//! double threshold, and 8-connected hysteresis.

use crate::error::{EdgeError, Result};
use crate::image::Image;
use crate::mask::Mask;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CannyParams {
    pub sigma: f64,
    pub low: f64,
    pub high: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            low: 50.0,
            high: 150.0,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !(self.low >= 0.0) || !(self.high >= self.low) {
            return Err(EdgeError::InvalidArgument(format!(
                "canny needs sigma > 0 and high >= low >= 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    #[inline]
    fn clamped(&self, x: i64, y: i64) -> f64 {
        let x = x.clamp(0, self.width as i64 - 1) as usize;
        let y = y.clamp(0, self.height as i64 - 1) as usize;
        self.data[y * self.width + x]
    }
}

fn blur(image: &Image, sigma: f64) -> Plane {
    let (w, h) = (image.width(), image.height());
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as i64;
    // Removing the minimum makes the result exactly independent of a
    // constant intensity offset.
    let floor = image.pixels().iter().copied().min().unwrap_or(0);
    let src = Plane {
        width: w,
        height: h,
        data: image.pixels().iter().map(|&v| (v - floor) as f64).collect(),
    };
    let mut horizontal = Plane {
        width: w,
        height: h,
        data: vec![0.0; w * h],
    };
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &wt) in kernel.iter().enumerate() {
                acc += wt * src.clamped(x as i64 + k as i64 - radius, y as i64);
            }
            horizontal.data[y * w + x] = acc;
        }
    }
    let mut out = Plane {
        width: w,
        height: h,
        data: vec![0.0; w * h],
    };
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &wt) in kernel.iter().enumerate() {
                acc += wt * horizontal.clamped(x as i64, y as i64 + k as i64 - radius);
            }
            out.data[y * w + x] = acc;
        }
    }
    out
}

/// Offsets of the two neighbours along the quantized gradient direction,
/// as `(behind, ahead)`.
fn direction_neighbours(gx: f64, gy: f64) -> ((i64, i64), (i64, i64)) {
    let mut angle = gy.atan2(gx).to_degrees();
    if angle < 0.0 {
        angle += 180.0;
    }
    if !(22.5..157.5).contains(&angle) {
        ((-1, 0), (1, 0))
    } else if angle < 67.5 {
        ((-1, -1), (1, 1))
    } else if angle < 112.5 {
        ((0, -1), (0, 1))
    } else {
        ((1, -1), (-1, 1))
    }
}

/// Run canny on a grayscale image; returns the edge mask.
pub fn canny(image: &Image, params: &CannyParams) -> Result<Mask> {
    params.validate()?;
    if image.channels() != 1 {
        return Err(EdgeError::InvalidImage("canny expects a grayscale image".into()));
    }
    let (w, h) = (image.width(), image.height());
    let smooth = blur(image, params.sigma);

    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    let mut mag = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let p = |dx: i64, dy: i64| smooth.clamped(x + dx, y + dy);
            let sx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let sy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            let i = y as usize * w + x as usize;
            gx[i] = sx;
            gy[i] = sy;
            mag[i] = sx.hypot(sy);
        }
    }

    let at = |x: i64, y: i64| -> f64 {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };

    // 0 = none, 1 = weak, 2 = strong
    let mut class = vec![0u8; w * h];
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m <= 0.0 || m < params.low {
                continue;
            }
            let ((bx, by), (ax, ay)) = direction_neighbours(gx[i], gy[i]);
            let behind = at(x as i64 + bx, y as i64 + by);
            let ahead = at(x as i64 + ax, y as i64 + ay);
            if !(m > behind && m >= ahead) {
                continue;
            }
            if m >= params.high {
                class[i] = 2;
                stack.push(i);
            } else {
                class[i] = 1;
            }
        }
    }

    let mut edges = vec![false; w * h];
    for &i in &stack {
        edges[i] = true;
    }
    while let Some(i) = stack.pop() {
        let (x, y) = ((i % w) as i64, (i / w) as i64);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if class[j] == 1 && !edges[j] {
                    edges[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    Mask::from_bits(w, h, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_radius_and_normalization() {
        let k = gaussian_kernel(1.0);
        assert_eq!(k.len(), 7);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(gaussian_kernel(1.2).len(), 9);
    }

    #[test]
    fn constant_image_has_no_edges() {
        let img = Image::filled(12, 9, 1, 137).unwrap();
        let m = canny(&img, &CannyParams { sigma: 1.0, low: 0.0, high: 0.0 }).unwrap();
        assert_eq!(m.count(), 0);
    }

    #[test]
    fn rejects_inverted_thresholds() {
        let img = Image::filled(4, 4, 1, 0).unwrap();
        assert!(canny(&img, &CannyParams { sigma: 1.0, low: 10.0, high: 5.0 }).is_err());
        assert!(canny(&img.to_rgb(), &CannyParams::default()).is_err());
    }
}
