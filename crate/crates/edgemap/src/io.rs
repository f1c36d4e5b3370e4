//! PNG and ASCII PNM (`P2`/`P3`) reading and writing.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{EdgeError, Result};
use crate::image::Image;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EdgeError + '_ {
    move |source| EdgeError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Load by extension: `.png`, or `.pgm`/`.ppm`/`.pnm` (ASCII).
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    match extension(path).as_deref() {
        Some("png") => load_png(path),
        Some("pgm" | "ppm" | "pnm") => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            parse_pnm(&text, path)
        }
        _ => Err(EdgeError::InvalidImage(format!(
            "{}: unsupported image extension",
            path.display()
        ))),
    }
}

pub fn save_image(path: impl AsRef<Path>, image: &Image) -> Result<()> {
    let path = path.as_ref();
    match extension(path).as_deref() {
        Some("png") => save_png(path, image),
        Some("pgm" | "ppm" | "pnm") => fs::write(path, to_pnm(image)).map_err(io_err(path)),
        _ => Err(EdgeError::InvalidImage(format!(
            "{}: unsupported image extension",
            path.display()
        ))),
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase())
}

pub fn load_png(path: &Path) -> Result<Image> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut decoder = png::Decoder::new(std::io::BufReader::new(file));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(|e| EdgeError::Png(format!("{}: {e}", path.display())))?;
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| EdgeError::Png(format!("{}: {e}", path.display())))?;
    buf.truncate(info.buffer_size());
    let (w, h) = (info.width as usize, info.height as usize);
    let pixels = match info.color_type {
        png::ColorType::Grayscale => return Image::new(w, h, 1, buf),
        png::ColorType::Rgb => return Image::new(w, h, 3, buf),
        png::ColorType::GrayscaleAlpha => buf.chunks_exact(2).map(|p| p[0]).collect(),
        png::ColorType::Rgba => buf.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect(),
        png::ColorType::Indexed => {
            return Err(EdgeError::Png(format!("{}: palette not expanded", path.display())))
        }
    };
    let channels = if info.color_type == png::ColorType::GrayscaleAlpha { 1 } else { 3 };
    Image::new(w, h, channels, pixels)
}

pub fn save_png(path: &Path, image: &Image) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), image.width() as u32, image.height() as u32);
    encoder.set_color(if image.channels() == 1 {
        png::ColorType::Grayscale
    } else {
        png::ColorType::Rgb
    });
    encoder.set_depth(png::BitDepth::Eight);
    let png_err = |e: png::EncodingError| EdgeError::Png(format!("{}: {e}", path.display()));
    let mut writer = encoder.write_header().map_err(png_err)?;
    writer.write_image_data(image.pixels()).map_err(png_err)?;
    writer.finish().map_err(png_err)?;
    Ok(())
}

pub fn to_pnm(image: &Image) -> String {
    let magic = if image.channels() == 1 { "P2" } else { "P3" };
    let mut out = format!("{magic}\n{} {}\n255\n", image.width(), image.height());
    let row_len = image.width() * image.channels();
    for row in image.pixels().chunks(row_len) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_pnm(text: &str, path: &Path) -> Result<Image> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    let bad = |reason: &str| EdgeError::InvalidImage(format!("{}: {reason}", path.display()));
    let channels = match tokens.next() {
        Some("P2") => 1,
        Some("P3") => 3,
        _ => return Err(bad("expected ASCII P2 or P3 header")),
    };
    let mut header = [0usize; 3];
    for slot in &mut header {
        *slot = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("malformed header"))?;
    }
    let [w, h, maxval] = header;
    if maxval == 0 || maxval > 255 {
        return Err(bad("only 8-bit maxval is supported"));
    }
    let mut pixels = Vec::with_capacity(w * h * channels);
    for t in tokens {
        let v: usize = t.parse().map_err(|_| bad("non-numeric sample"))?;
        if v > maxval {
            return Err(bad("sample exceeds maxval"));
        }
        pixels.push((v * 255 / maxval) as u8);
    }
    Image::new(w, h, channels, pixels)
}

/// Write bytes, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut f = File::create(path).map_err(io_err(path))?;
    f.write_all(bytes).map_err(io_err(path))
}
