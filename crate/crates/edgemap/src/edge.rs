//! Colored edge maps.
//!
//! An edge map is black with 1-px strokes. Each stroke pixel carries a class:
//! landmark contour, canny inside the face polygon, or canny outside it.
//! Interior canny strokes may be tinted RED (young) or GREEN (old); every
//! other stroke is WHITE.

use crate::error::{EdgeError, Result};
use crate::image::Image;
use crate::mask::Mask;

pub const BLACK: [u8; 3] = [0, 0, 0];
pub const WHITE: [u8; 3] = [255, 255, 255];
pub const RED: [u8; 3] = [255, 0, 0];
pub const GREEN: [u8; 3] = [0, 255, 0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum StrokeClass {
    Background = 0,
    Contour = 1,
    InteriorCanny = 2,
    ExteriorCanny = 3,
}

impl StrokeClass {
    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => Self::Background,
            1 => Self::Contour,
            2 => Self::InteriorCanny,
            3 => Self::ExteriorCanny,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrokeColor {
    Red,
    Green,
}

impl StrokeColor {
    pub fn rgb(self) -> [u8; 3] {
        match self {
            StrokeColor::Red => RED,
            StrokeColor::Green => GREEN,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeMap {
    image: Image,
    classes: Vec<StrokeClass>,
    polygon: Vec<(f64, f64)>,
}

/// Even-odd test of the point `(x, y)` against a closed polygon.
pub fn point_in_polygon(x: f64, y: f64, polygon: &[(f64, f64)]) -> bool {
    let mut inside = false;
    let n = polygon.len();
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (xi, yi) = polygon[i];
        let (xj, yj) = polygon[j];
        if (yi > y) != (yj > y) {
            let cross = xj + (y - yj) * (xi - xj) / (yi - yj);
            if x < cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Combine canny and landmark-contour masks into a WHITE edge map. Contour
/// wins where both are set; remaining canny pixels are split by whether their
/// center lies inside `face_polygon`.
pub fn compose_edge_map(canny: &Mask, contour: &Mask, face_polygon: &[(f64, f64)]) -> Result<EdgeMap> {
    if (canny.width(), canny.height()) != (contour.width(), contour.height()) {
        return Err(EdgeError::SizeMismatch(format!(
            "canny {}x{} vs contour {}x{}",
            canny.width(),
            canny.height(),
            contour.width(),
            contour.height()
        )));
    }
    let (w, h) = (canny.width(), canny.height());
    let mut classes = vec![StrokeClass::Background; w * h];
    for y in 0..h {
        for x in 0..w {
            classes[y * w + x] = if contour.get(x, y) {
                StrokeClass::Contour
            } else if canny.get(x, y) {
                if point_in_polygon(x as f64, y as f64, face_polygon) {
                    StrokeClass::InteriorCanny
                } else {
                    StrokeClass::ExteriorCanny
                }
            } else {
                StrokeClass::Background
            };
        }
    }
    EdgeMap::from_classes(w, h, classes, face_polygon.to_vec())
}

impl EdgeMap {
    /// All-WHITE edge map drawn from a class mask.
    pub fn from_classes(
        width: usize,
        height: usize,
        classes: Vec<StrokeClass>,
        polygon: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if classes.len() != width * height {
            return Err(EdgeError::SizeMismatch(format!(
                "{width}x{height} edge map from {} classes",
                classes.len()
            )));
        }
        let mut pixels = Vec::with_capacity(width * height * 3);
        for c in &classes {
            pixels.extend_from_slice(if *c == StrokeClass::Background { &BLACK } else { &WHITE });
        }
        Ok(Self {
            image: Image::new(width, height, 3, pixels)?,
            classes,
            polygon,
        })
    }

    /// Rebuild from a stored image and class mask, checking invariants.
    pub fn from_parts(image: Image, classes: Vec<StrokeClass>, polygon: Vec<(f64, f64)>) -> Result<Self> {
        if image.channels() != 3 || classes.len() != image.width() * image.height() {
            return Err(EdgeError::SizeMismatch("edge image and class mask disagree".into()));
        }
        let map = Self {
            image,
            classes,
            polygon,
        };
        map.validate()?;
        Ok(map)
    }

    /// Edge map from binary strokes, e.g. a thresholded generator output.
    /// Strokes on `reference`'s contour stay contour; the rest are split by
    /// the face polygon of `reference`.
    pub fn from_strokes(strokes: &Mask, reference: &EdgeMap) -> Result<Self> {
        if (strokes.width(), strokes.height()) != (reference.width(), reference.height()) {
            return Err(EdgeError::SizeMismatch("stroke mask vs reference edge map".into()));
        }
        let w = strokes.width();
        let classes = strokes
            .bits()
            .iter()
            .enumerate()
            .map(|(i, &on)| {
                if !on {
                    StrokeClass::Background
                } else if reference.classes[i] == StrokeClass::Contour {
                    StrokeClass::Contour
                } else if point_in_polygon((i % w) as f64, (i / w) as f64, &reference.polygon) {
                    StrokeClass::InteriorCanny
                } else {
                    StrokeClass::ExteriorCanny
                }
            })
            .collect();
        Self::from_classes(w, strokes.height(), classes, reference.polygon.clone())
    }

    pub fn width(&self) -> usize {
        self.image.width()
    }

    pub fn height(&self) -> usize {
        self.image.height()
    }

    pub fn image(&self) -> &Image {
        &self.image
    }

    pub fn classes(&self) -> &[StrokeClass] {
        &self.classes
    }

    pub fn polygon(&self) -> &[(f64, f64)] {
        &self.polygon
    }

    pub fn class_at(&self, x: usize, y: usize) -> StrokeClass {
        self.classes[y * self.width() + x]
    }

    pub fn count(&self, class: StrokeClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    pub fn interior_count(&self) -> usize {
        self.count(StrokeClass::InteriorCanny)
    }

    pub fn class_mask(&self, class: StrokeClass) -> Mask {
        Mask::from_bits(
            self.width(),
            self.height(),
            self.classes.iter().map(|&c| c == class).collect(),
        )
        .expect("same extent")
    }

    /// Mask of all non-black pixels.
    pub fn stroke_mask(&self) -> Mask {
        Mask::from_bits(
            self.width(),
            self.height(),
            self.image.pixels().chunks_exact(3).map(|p| p != BLACK).collect(),
        )
        .expect("same extent")
    }

    /// Class codes as a gray image (0–3).
    pub fn class_image(&self) -> Image {
        Image::new(
            self.width(),
            self.height(),
            1,
            self.classes.iter().map(|&c| c as u8).collect(),
        )
        .expect("same extent")
    }

    pub fn is_whitened(&self) -> bool {
        self.image
            .pixels()
            .chunks_exact(3)
            .all(|p| p == BLACK || p == WHITE)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, (px, class)) in self.image.pixels().chunks_exact(3).zip(&self.classes).enumerate() {
            let (x, y) = (i % self.width(), i / self.width());
            let ok = match class {
                StrokeClass::Background => px == BLACK,
                StrokeClass::Contour | StrokeClass::ExteriorCanny => px == WHITE,
                StrokeClass::InteriorCanny => px == WHITE || px == RED || px == GREEN,
            };
            if !ok {
                return Err(EdgeError::Invariant(format!(
                    "pixel ({x}, {y}) of class {class:?} has color {px:?}"
                )));
            }
        }
        Ok(())
    }
}

/// Tint interior canny strokes; all other strokes become WHITE.
pub fn colorize_interior_canny(edge: &EdgeMap, color: StrokeColor) -> EdgeMap {
    let mut out = edge.clone();
    let w = edge.width();
    for (i, class) in edge.classes.iter().enumerate() {
        let rgb = match class {
            StrokeClass::Background => continue,
            StrokeClass::InteriorCanny => color.rgb(),
            _ => WHITE,
        };
        out.image.set_rgb(i % w, i / w, rgb);
    }
    out
}

/// Every non-black pixel becomes WHITE.
pub fn decolorize(edge: &EdgeMap) -> EdgeMap {
    let mut out = edge.clone();
    for px in out.image.pixels_mut().chunks_exact_mut(3) {
        if *px != BLACK {
            px.copy_from_slice(&WHITE);
        }
    }
    out
}

/// Interior canny strokes are erased to BLACK.
pub fn filter_interior_canny(edge: &EdgeMap) -> EdgeMap {
    let mut out = edge.clone();
    let w = edge.width();
    for (i, class) in out.classes.iter_mut().enumerate() {
        if *class == StrokeClass::InteriorCanny {
            *class = StrokeClass::Background;
            out.image.set_rgb(i % w, i / w, BLACK);
        }
    }
    out
}

/// Threshold a soft 3-channel map (`C × H × W`, values in `[-1, 1]`) into
/// strokes: a pixel is on when its brightest channel, rescaled to `[0, 1]`,
/// exceeds 0.5.
pub fn binarize_soft(channels: &[f32], width: usize, height: usize) -> Result<Mask> {
    let plane = width * height;
    if channels.len() != 3 * plane {
        return Err(EdgeError::SizeMismatch(format!(
            "expected 3x{height}x{width} values, got {}",
            channels.len()
        )));
    }
    let bits = (0..plane)
        .map(|i| {
            let brightest = channels[i].max(channels[plane + i]).max(channels[2 * plane + i]);
            (brightest + 1.0) / 2.0 > 0.5
        })
        .collect();
    Mask::from_bits(width, height, bits)
}

/// Edge map pixels as `C × H × W` floats in `[-1, 1]`.
pub fn edge_to_planes(edge: &EdgeMap) -> Vec<f32> {
    image_to_planes(edge.image())
}

/// Any image as `C × H × W` floats in `[-1, 1]`.
pub fn image_to_planes(image: &Image) -> Vec<f32> {
    let (w, h, c) = (image.width(), image.height(), image.channels());
    let mut out = vec![0.0; c * w * h];
    for (i, px) in image.pixels().chunks_exact(c).enumerate() {
        for (ch, &v) in px.iter().enumerate() {
            out[ch * w * h + i] = v as f32 / 127.5 - 1.0;
        }
    }
    out
}

/// `C × H × W` floats in `[-1, 1]` back to an 8-bit interleaved image.
pub fn planes_to_image(planes: &[f32], channels: usize, width: usize, height: usize) -> Result<Image> {
    let plane = width * height;
    if planes.len() != channels * plane {
        return Err(EdgeError::SizeMismatch(format!(
            "expected {channels}x{height}x{width} values, got {}",
            planes.len()
        )));
    }
    let mut pixels = vec![0u8; channels * plane];
    for i in 0..plane {
        for c in 0..channels {
            let v = ((planes[c * plane + i].clamp(-1.0, 1.0) + 1.0) * 127.5).round();
            pixels[i * channels + c] = v as u8;
        }
    }
    Image::new(width, height, channels, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<(f64, f64)> {
        vec![(1.5, 1.5), (6.5, 1.5), (6.5, 6.5), (1.5, 6.5)]
    }

    fn sample() -> EdgeMap {
        let mut canny = Mask::new(8, 8);
        canny.set(3, 3, true);
        canny.set(0, 0, true);
        canny.set(4, 4, true);
        let mut contour = Mask::new(8, 8);
        contour.set(4, 4, true);
        contour.set(7, 7, true);
        compose_edge_map(&canny, &contour, &square()).unwrap()
    }

    #[test]
    fn composition_classes() {
        let e = sample();
        assert_eq!(e.class_at(3, 3), StrokeClass::InteriorCanny);
        assert_eq!(e.class_at(0, 0), StrokeClass::ExteriorCanny);
        assert_eq!(e.class_at(4, 4), StrokeClass::Contour);
        assert_eq!(e.class_at(7, 7), StrokeClass::Contour);
        assert!(e.is_whitened());
        e.validate().unwrap();
    }

    #[test]
    fn colorize_then_decolorize_restores_white() {
        let e = sample();
        let red = colorize_interior_canny(&e, StrokeColor::Red);
        assert_eq!(red.image().rgb(3, 3), RED);
        assert_eq!(red.image().rgb(0, 0), WHITE);
        red.validate().unwrap();
        assert_eq!(decolorize(&red), e);
    }

    #[test]
    fn filter_removes_only_interior() {
        let f = filter_interior_canny(&sample());
        assert_eq!(f.image().rgb(3, 3), BLACK);
        assert_eq!(f.interior_count(), 0);
        assert_eq!(f.count(StrokeClass::Contour), 2);
        assert_eq!(f.count(StrokeClass::ExteriorCanny), 1);
    }

    #[test]
    fn validation_catches_bad_colors() {
        let e = sample();
        let mut img = e.image().clone();
        img.set_rgb(4, 4, RED);
        assert!(EdgeMap::from_parts(img, e.classes().to_vec(), square()).is_err());
    }

    #[test]
    fn soft_binarization() {
        // one pixel bright in green only, one dim everywhere
        let planes = vec![-1.0, -0.2, 0.2, -1.0, -1.0, -0.1];
        let m = binarize_soft(&planes, 2, 1).unwrap();
        assert_eq!(m.bits(), &[true, false]);
    }

    #[test]
    fn planes_round_trip() {
        let e = colorize_interior_canny(&sample(), StrokeColor::Green);
        let planes = edge_to_planes(&e);
        assert_eq!(&planes_to_image(&planes, 3, 8, 8).unwrap(), e.image());
    }
}
