//! Face ROI workflow: expand the face box, crop, resize, then build the
//! edge map from canny and the landmark contour.

use std::fs;
use std::path::{Path, PathBuf};

use agegan_edgemap::image::map_point_into_crop;
use agegan_edgemap::{
    colorize_interior_canny, edge_map_for_crop, expand_roi, filter_interior_canny, load_image, save_image,
    CannyParams, EdgeMap, Image, LandmarkSet, StrokeClass, StrokeColor,
};

use crate::error::{PipelineError, Result};
use crate::manifest::{AgeGroup, Dataset, Sample};

#[derive(Clone, Debug, PartialEq)]
pub struct PreprocessConfig {
    pub image_size: usize,
    pub canny: CannyParams,
    pub roi_factor: f64,
    /// Erase interior canny strokes from every stored map.
    pub filter_interior: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            image_size: 64,
            canny: CannyParams::default(),
            roi_factor: agegan_edgemap::ROI_FACTOR,
            filter_interior: false,
        }
    }
}

/// One preprocessed face.
#[derive(Clone, Debug, PartialEq)]
pub struct Prepared {
    pub name: String,
    pub age: u32,
    /// WHITE edge map.
    pub edge: EdgeMap,
    /// RGB face crop at the configured size.
    pub face: Image,
    /// Landmarks in crop coordinates.
    pub landmarks: LandmarkSet,
    pub embedding: Option<PathBuf>,
}

impl Prepared {
    pub fn group(&self) -> Option<AgeGroup> {
        AgeGroup::of(self.age)
    }

    /// The map colored for edge-to-edge training: RED for young, GREEN for
    /// old, WHITE otherwise.
    pub fn e2e_edge(&self) -> EdgeMap {
        match self.group() {
            Some(AgeGroup::Young) => colorize_interior_canny(&self.edge, StrokeColor::Red),
            Some(AgeGroup::Old) => colorize_interior_canny(&self.edge, StrokeColor::Green),
            None => self.edge.clone(),
        }
    }
}

/// Crop and resize a face, returning the crop and the landmarks mapped
/// into it.
pub fn face_crop(image: &Image, landmarks: &LandmarkSet, face: &agegan_edgemap::BoundingBox, cfg: &PreprocessConfig) -> Result<(Image, LandmarkSet)> {
    let roi = expand_roi(face, cfg.roi_factor, &image.bounds())?;
    let s = cfg.image_size;
    let crop = image.crop(&roi)?.resize(s, s)?.to_rgb();
    let mut mapped = landmarks.map(|p| map_point_into_crop(p, &roi, s, s));
    mapped.clamp_to(s, s);
    Ok((crop, mapped))
}

/// Edge map of an RGB crop with landmarks already in crop coordinates.
pub fn crop_edge_map(crop: &Image, landmarks: &LandmarkSet, cfg: &PreprocessConfig) -> Result<EdgeMap> {
    let edge = edge_map_for_crop(&crop.to_gray(), landmarks, &cfg.canny)?;
    Ok(if cfg.filter_interior {
        filter_interior_canny(&edge)
    } else {
        edge
    })
}

pub fn prepare_sample(sample: &Sample, cfg: &PreprocessConfig) -> Result<Prepared> {
    let (face, landmarks) = face_crop(&sample.image, &sample.landmarks, &sample.entry.face, cfg)?;
    let edge = crop_edge_map(&face, &landmarks, cfg)?;
    Ok(Prepared {
        name: sample.name(),
        age: sample.entry.age,
        edge,
        face,
        landmarks,
        embedding: sample.entry.embedding.clone(),
    })
}

/// Preprocessed faces in manifest order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EdgeStore {
    pub entries: Vec<Prepared>,
}

/// Preprocess every sample. Failures are logged and skipped; the call fails
/// only when nothing succeeds.
pub fn preprocess(dataset: &Dataset, cfg: &PreprocessConfig) -> Result<EdgeStore> {
    let mut entries = Vec::with_capacity(dataset.samples.len());
    let mut failures = 0;
    for s in &dataset.samples {
        match prepare_sample(s, cfg) {
            Ok(p) => entries.push(p),
            Err(e) => {
                failures += 1;
                log::warn!("preprocessing line {} failed: {e}", s.line);
            }
        }
    }
    if entries.is_empty() && !dataset.samples.is_empty() {
        return Err(PipelineError::Data(format!("preprocessing failed for all {failures} entries")));
    }
    Ok(EdgeStore { entries })
}

const INDEX: &str = "index.csv";

impl EdgeStore {
    pub fn by_group(&self, group: AgeGroup) -> Vec<&Prepared> {
        self.entries.iter().filter(|p| p.group() == Some(group)).collect()
    }

    pub fn find(&self, name: &str) -> Option<&Prepared> {
        self.entries.iter().find(|p| p.name == name)
    }

    /// Layout under `dir`:
    /// `index.csv`, `edges/` (WHITE maps), `e2e/` (colored maps),
    /// `classes/` (stroke class codes 0–3 as gray PNG), `faces/`, `landmarks/`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        for sub in ["edges", "e2e", "classes", "faces", "landmarks"] {
            let d = dir.join(sub);
            fs::create_dir_all(&d).map_err(PipelineError::io(&d))?;
        }
        let index = dir.join(INDEX);
        let csv_err = |e: csv::Error| PipelineError::Data(format!("{}: {e}", index.display()));
        let mut w = csv::Writer::from_path(&index).map_err(csv_err)?;
        w.write_record(["name", "age", "embedding"]).map_err(csv_err)?;
        for p in &self.entries {
            save_image(dir.join("edges").join(format!("{}.png", p.name)), p.edge.image())?;
            save_image(dir.join("e2e").join(format!("{}.png", p.name)), p.e2e_edge().image())?;
            save_image(dir.join("classes").join(format!("{}.png", p.name)), &p.edge.class_image())?;
            save_image(dir.join("faces").join(format!("{}.png", p.name)), &p.face)?;
            p.landmarks.save(dir.join("landmarks").join(format!("{}.txt", p.name)))?;
            let emb = p.embedding.as_ref().map(|e| e.display().to_string()).unwrap_or_default();
            w.write_record([p.name.clone(), p.age.to_string(), emb]).map_err(csv_err)?;
        }
        w.flush().map_err(PipelineError::io(&index))?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<EdgeStore> {
        let index = dir.join(INDEX);
        let csv_err = |e: csv::Error| PipelineError::Data(format!("{}: {e}", index.display()));
        let mut r = csv::Reader::from_path(&index).map_err(csv_err)?;
        let mut entries = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != 3 {
                return Err(PipelineError::Data(format!("{}: malformed row {rec:?}", index.display())));
            }
            let name = rec[0].to_string();
            let age: u32 = rec[1]
                .parse()
                .map_err(|_| PipelineError::Data(format!("{}: bad age {:?}", index.display(), &rec[1])))?;
            let landmarks = LandmarkSet::load(dir.join("landmarks").join(format!("{name}.txt")))?;
            let image = load_image(dir.join("edges").join(format!("{name}.png")))?;
            let class_img = load_image(dir.join("classes").join(format!("{name}.png")))?;
            let classes = class_img
                .pixels()
                .iter()
                .map(|&c| {
                    StrokeClass::from_code(c)
                        .ok_or_else(|| PipelineError::Data(format!("{name}: invalid stroke class code {c}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let edge = EdgeMap::from_parts(image, classes, landmarks.face_polygon())?;
            let face = load_image(dir.join("faces").join(format!("{name}.png")))?;
            let embedding = (!rec[2].is_empty()).then(|| PathBuf::from(&rec[2]));
            entries.push(Prepared {
                name,
                age,
                edge,
                face,
                landmarks,
                embedding,
            });
        }
        Ok(EdgeStore { entries })
    }
}
