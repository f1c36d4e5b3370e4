use crate::error::{EdgeError, Result};
use crate::roi::BoundingBox;

/// 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(EdgeError::InvalidImage(format!("{width}x{height} has no pixels")));
        }
        if channels != 1 && channels != 3 {
            return Err(EdgeError::InvalidImage(format!("{channels} channels unsupported")));
        }
        if pixels.len() != width * height * channels {
            return Err(EdgeError::InvalidImage(format!(
                "{width}x{height}x{channels} needs {} bytes, got {}",
                width * height * channels,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn bounds(&self) -> BoundingBox {
        BoundingBox::new(0, 0, self.width, self.height).expect("non-empty image")
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.pixels[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: u8) {
        self.pixels[(y * self.width + x) * self.channels + c] = v;
    }

    pub fn rgb(&self, x: usize, y: usize) -> [u8; 3] {
        if self.channels == 1 {
            let v = self.get(x, y, 0);
            [v, v, v]
        } else {
            let i = (y * self.width + x) * 3;
            [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
        }
    }

    pub fn set_rgb(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * self.channels;
        self.pixels[i..i + self.channels].copy_from_slice(&rgb[..self.channels]);
    }

    /// ITU-R 601 luma, rounded.
    pub fn to_gray(&self) -> Image {
        if self.channels == 1 {
            return self.clone();
        }
        let pixels = self
            .pixels
            .chunks_exact(3)
            .map(|p| {
                let y = 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64;
                y.round().clamp(0.0, 255.0) as u8
            })
            .collect();
        Image::new(self.width, self.height, 1, pixels).expect("same extent")
    }

    pub fn to_rgb(&self) -> Image {
        if self.channels == 3 {
            return self.clone();
        }
        let pixels = self.pixels.iter().flat_map(|&v| [v, v, v]).collect();
        Image::new(self.width, self.height, 3, pixels).expect("same extent")
    }

    pub fn crop(&self, roi: &BoundingBox) -> Result<Image> {
        let clipped = roi.intersect(&self.bounds()).ok_or(EdgeError::EmptyRoi)?;
        if clipped != *roi {
            return Err(EdgeError::InvalidArgument(format!(
                "crop {roi:?} extends outside {}x{} image",
                self.width, self.height
            )));
        }
        let (x0, y0) = (roi.x as usize, roi.y as usize);
        let mut pixels = Vec::with_capacity(roi.w * roi.h * self.channels);
        for y in y0..y0 + roi.h {
            let start = (y * self.width + x0) * self.channels;
            pixels.extend_from_slice(&self.pixels[start..start + roi.w * self.channels]);
        }
        Image::new(roi.w, roi.h, self.channels, pixels)
    }

    /// Bilinear resize with pixel-center alignment.
    pub fn resize(&self, width: usize, height: usize) -> Result<Image> {
        if width == 0 || height == 0 {
            return Err(EdgeError::InvalidArgument("resize to an empty image".into()));
        }
        if width == self.width && height == self.height {
            return Ok(self.clone());
        }
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let sample = |pos: f64, limit: usize| -> (usize, usize, f64) {
            let p = pos.clamp(0.0, (limit - 1) as f64);
            let i0 = p.floor() as usize;
            let i1 = (i0 + 1).min(limit - 1);
            (i0, i1, p - i0 as f64)
        };
        let mut pixels = vec![0u8; width * height * self.channels];
        for y in 0..height {
            let (y0, y1, fy) = sample((y as f64 + 0.5) * sy - 0.5, self.height);
            for x in 0..width {
                let (x0, x1, fx) = sample((x as f64 + 0.5) * sx - 0.5, self.width);
                for c in 0..self.channels {
                    let top = self.get(x0, y0, c) as f64 * (1.0 - fx) + self.get(x1, y0, c) as f64 * fx;
                    let bot = self.get(x0, y1, c) as f64 * (1.0 - fx) + self.get(x1, y1, c) as f64 * fx;
                    let v = top * (1.0 - fy) + bot * fy;
                    pixels[(y * width + x) * self.channels + c] = v.round().clamp(0.0, 255.0) as u8;
                }
            }
        }
        Image::new(width, height, self.channels, pixels)
    }

    /// Mean absolute per-sample difference, on a 0–255 scale.
    pub fn mean_abs_diff(&self, other: &Image) -> Result<f64> {
        if (self.width, self.height, self.channels) != (other.width, other.height, other.channels) {
            return Err(EdgeError::SizeMismatch(format!(
                "{}x{}x{} vs {}x{}x{}",
                self.width, self.height, self.channels, other.width, other.height, other.channels
            )));
        }
        let total: u64 = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(&a, &b)| (a as i32 - b as i32).unsigned_abs() as u64)
            .sum();
        Ok(total as f64 / self.pixels.len() as f64)
    }
}

/// Map a point from source-image coordinates into a crop of `roi` that has
/// been resized to `width × height`, consistent with [`Image::resize`].
pub fn map_point_into_crop(p: (f64, f64), roi: &BoundingBox, width: usize, height: usize) -> (f64, f64) {
    let sx = width as f64 / roi.w as f64;
    let sy = height as f64 / roi.h as f64;
    (
        (p.0 - roi.x as f64 + 0.5) * sx - 0.5,
        (p.1 - roi.y as f64 + 0.5) * sy - 0.5,
    )
}
