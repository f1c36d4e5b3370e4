use crate::error::{EdgeError, Result};
use crate::image::Image;

/// Binary per-pixel mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(EdgeError::SizeMismatch(format!(
                "{width}x{height} mask from {} bits",
                bits.len()
            )));
        }
        Ok(Self { width, height, bits })
    }

    /// Non-zero pixels of a gray image are set.
    pub fn from_image(image: &Image) -> Result<Self> {
        if image.channels() != 1 {
            return Err(EdgeError::InvalidImage("mask images are single-channel".into()));
        }
        Self::from_bits(
            image.width(),
            image.height(),
            image.pixels().iter().map(|&v| v != 0).collect(),
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, on: bool) {
        self.bits[y * self.width + x] = on;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Coordinates of set pixels, row-major.
    pub fn points(&self) -> Vec<(usize, usize)> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i % self.width, i / self.width))
            .collect()
    }

    /// `{0, 255}` gray image.
    pub fn to_image(&self) -> Image {
        Image::new(
            self.width,
            self.height,
            1,
            self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        )
        .expect("mask has positive extent")
    }
}
