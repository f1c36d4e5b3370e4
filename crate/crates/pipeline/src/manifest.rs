//! CSV manifest ingestion and age grouping.
//!
//! Header: `image,landmarks,x,y,w,h,age[,embedding]`. Relative paths are
//! resolved against the manifest's directory.

use std::fmt;
use std::path::{Path, PathBuf};

use agegan_edgemap::{load_image, BoundingBox, EdgeError, Image, LandmarkSet};

use crate::error::{PipelineError, Result};

pub const YOUNG_MAX_AGE: u32 = 28;
pub const OLD_MIN_AGE: u32 = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AgeGroup {
    Young,
    Old,
}

impl AgeGroup {
    /// `Young` up to 28, `Old` from 60, `None` in between.
    pub fn of(age: u32) -> Option<AgeGroup> {
        if age <= YOUNG_MAX_AGE {
            Some(AgeGroup::Young)
        } else if age >= OLD_MIN_AGE {
            Some(AgeGroup::Old)
        } else {
            None
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AgeGroup::Young => "young",
            AgeGroup::Old => "old",
        }
    }
}

impl fmt::Display for AgeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub landmarks: PathBuf,
    pub face: BoundingBox,
    pub age: u32,
    pub embedding: Option<PathBuf>,
}

/// An entry whose files loaded and passed validation.
#[derive(Clone, Debug)]
pub struct Sample {
    /// 1-based manifest line.
    pub line: usize,
    pub entry: ManifestEntry,
    pub image: Image,
    pub landmarks: LandmarkSet,
}

impl Sample {
    /// File stem of the image, used to name derived artifacts.
    pub fn name(&self) -> String {
        self.entry
            .image
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| format!("line{}", self.line))
    }

    pub fn group(&self) -> Option<AgeGroup> {
        AgeGroup::of(self.entry.age)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skipped {
    pub line: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub skipped: Vec<Skipped>,
}

impl Dataset {
    pub fn report(&self) -> String {
        let mut s = format!("{} entries, {} skipped", self.samples.len(), self.skipped.len());
        for k in &self.skipped {
            s.push_str(&format!("\n  line {}: {}", k.line, k.reason));
        }
        s
    }
}

const HEADER: [&str; 7] = ["image", "landmarks", "x", "y", "w", "h", "age"];

fn parse_row(record: &csv::StringRecord, base: &Path, line: usize, path: &Path) -> Result<ManifestEntry> {
    let bad = |what: String| PipelineError::Data(format!("{}: line {line}: {what}", path.display()));
    if record.len() != 7 && record.len() != 8 {
        return Err(bad(format!("expected 7 or 8 fields, found {}", record.len())));
    }
    let field = |i: usize| record[i].trim();
    let int = |i: usize| -> Result<i64> {
        field(i)
            .parse::<i64>()
            .map_err(|_| bad(format!("{} is not an integer: {:?}", HEADER[i], field(i))))
    };
    let (x, y, w, h) = (int(2)?, int(3)?, int(4)?, int(5)?);
    if w <= 0 || h <= 0 {
        return Err(bad(format!("face box must have positive size, got {w}x{h}")));
    }
    let age = field(6)
        .parse::<u32>()
        .map_err(|_| bad(format!("age must be a non-negative integer, got {:?}", field(6))))?;
    let resolve = |p: &str| {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    let embedding = if record.len() == 8 && !field(7).is_empty() {
        Some(resolve(field(7)))
    } else {
        None
    };
    if field(0).is_empty() || field(1).is_empty() {
        return Err(bad("image and landmarks paths are required".into()));
    }
    Ok(ManifestEntry {
        image: resolve(field(0)),
        landmarks: resolve(field(1)),
        face: BoundingBox::new(x, y, w as usize, h as usize)?,
        age,
        embedding,
    })
}

fn load_sample(entry: ManifestEntry, line: usize) -> std::result::Result<Sample, String> {
    for p in [Some(&entry.image), Some(&entry.landmarks), entry.embedding.as_ref()].into_iter().flatten() {
        if !p.is_file() {
            return Err(format!("missing file {}", p.display()));
        }
    }
    let image = load_image(&entry.image).map_err(|e| format!("unreadable image: {e}"))?;
    let landmarks = match LandmarkSet::load(&entry.landmarks) {
        Ok(l) => l,
        Err(EdgeError::LandmarkCount { found }) => {
            return Err(format!("landmark count: expected 68 points, found {found}"))
        }
        Err(e) => return Err(format!("unreadable landmarks: {e}")),
    };
    if !image.bounds().contains(&entry.face) {
        return Err(format!(
            "face box {:?} is not within the {}x{} image",
            entry.face,
            image.width(),
            image.height()
        ));
    }
    Ok(Sample {
        line,
        entry,
        image,
        landmarks,
    })
}

/// Parse and validate a manifest. Malformed rows are errors; entries whose
/// files are missing or invalid are skipped and listed in the report.
pub fn ingest(path: &Path) -> Result<Dataset> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    let header_ok = (names.len() == 7 || names.len() == 8)
        && names[..7] == HEADER
        && (names.len() == 7 || names[7] == "embedding");
    if !names.is_empty() && !header_ok {
        return Err(PipelineError::Data(format!(
            "{}: line 1: header must be image,landmarks,x,y,w,h,age[,embedding], found {}",
            path.display(),
            names.join(",")
        )));
    }
    let mut ds = Dataset::default();
    for record in reader.records() {
        let record = record.map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let entry = parse_row(&record, &base, line, path)?;
        match load_sample(entry, line) {
            Ok(s) => ds.samples.push(s),
            Err(reason) => {
                log::warn!("skipping line {line}: {reason}");
                ds.skipped.push(Skipped { line, reason });
            }
        }
    }
    log::info!("{}", ds.report().lines().next().unwrap_or_default());
    Ok(ds)
}

/// Partition into (young, old, excluded).
pub fn split_by_age(samples: &[Sample]) -> (Vec<&Sample>, Vec<&Sample>, Vec<&Sample>) {
    let (mut young, mut old, mut excluded) = (Vec::new(), Vec::new(), Vec::new());
    for s in samples {
        match s.group() {
            Some(AgeGroup::Young) => young.push(s),
            Some(AgeGroup::Old) => old.push(s),
            None => excluded.push(s),
        }
    }
    log::info!("{} young, {} old, {} excluded", young.len(), old.len(), excluded.len());
    (young, old, excluded)
}
