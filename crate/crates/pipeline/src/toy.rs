//! Procedural two-domain face corpus.
//!
//! Faces are a skin ellipse with eyes, brows, nose and mouth placed at the
//! 68 landmark positions. Old faces additionally carry wrinkle strokes
//! inside the face region; young faces are smooth.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::{Path, PathBuf};

use agegan_edgemap::raster::draw_polyline;
use agegan_edgemap::{point_in_polygon, save_image, BoundingBox, Image, LandmarkSet, Mask};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{PipelineError, Result};
use crate::manifest::AgeGroup;

pub const TOY_CANVAS: usize = 96;

const BACKGROUND: [u8; 3] = [70, 80, 95];
const SKIN: [u8; 3] = [215, 185, 160];
const FEATURE: [u8; 3] = [45, 30, 28];
const LIPS: [u8; 3] = [150, 60, 60];
const NOSE_SHADE: [u8; 3] = [150, 120, 100];
const WRINKLE: [u8; 3] = [75, 48, 40];

/// One generated face.
#[derive(Clone, Debug)]
pub struct ToyFace {
    pub name: String,
    pub group: AgeGroup,
    pub age: u32,
    pub image: Image,
    pub landmarks: LandmarkSet,
    pub face_box: BoundingBox,
}

#[derive(Clone, Copy, Debug)]
struct Geometry {
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
    eye_dx: f64,
    eye_w: f64,
    eye_h: f64,
    brow_lift: f64,
    mouth_w: f64,
    mouth_h: f64,
    nose_w: f64,
}

impl Geometry {
    fn sample(rng: &mut impl Rng) -> Self {
        let c = TOY_CANVAS as f64 / 2.0;
        Self {
            cx: c + rng.random_range(-3.0..3.0),
            cy: c + 2.0 + rng.random_range(-3.0..3.0),
            rx: rng.random_range(19.0..24.0),
            ry: rng.random_range(24.0..29.0),
            eye_dx: rng.random_range(0.36..0.46),
            eye_w: rng.random_range(0.16..0.22),
            eye_h: rng.random_range(0.06..0.1),
            brow_lift: rng.random_range(0.38..0.5),
            mouth_w: rng.random_range(0.28..0.42),
            mouth_h: rng.random_range(0.07..0.12),
            nose_w: rng.random_range(0.14..0.22),
        }
    }

    fn landmarks(&self) -> Vec<(f64, f64)> {
        let g = self;
        let mut pts = Vec::with_capacity(68);
        for i in 0..17 {
            let t = PI * (1.0 - i as f64 / 16.0);
            pts.push((g.cx + g.rx * t.cos(), g.cy + g.ry * t.sin()));
        }
        let brow_y = g.cy - g.brow_lift * g.ry;
        for side in [-1.0, 1.0] {
            for k in 0..5 {
                let u = k as f64 / 4.0;
                let along = if side < 0.0 { 0.8 - 0.65 * u } else { 0.15 + 0.65 * u };
                let arch = 0.06 * g.ry * (PI * u).sin();
                pts.push((g.cx + side * along * g.rx, brow_y - arch));
            }
        }
        let nose_top = brow_y + 0.12 * g.ry;
        let nose_tip = g.cy + 0.18 * g.ry;
        for k in 0..4 {
            pts.push((g.cx, nose_top + (nose_tip - nose_top) * k as f64 / 3.0));
        }
        let base_y = nose_tip + 0.05 * g.ry;
        for k in 0..5 {
            let u = k as f64 / 2.0 - 1.0;
            pts.push((g.cx + u * g.nose_w * g.rx, base_y + 0.05 * g.ry * (1.0 - u * u)));
        }
        let eye_y = g.cy - 0.18 * g.ry;
        for side in [-1.0, 1.0] {
            let ex = g.cx + side * g.eye_dx * g.rx;
            for k in 0..6 {
                let t = PI - TAU * k as f64 / 6.0;
                pts.push((ex + g.eye_w * g.rx * t.cos(), eye_y - g.eye_h * g.ry * t.sin().signum() * t.sin().abs().sqrt()));
            }
        }
        let mouth_y = g.cy + 0.5 * g.ry;
        for (n, wf, hf) in [(12usize, 1.0, 1.0), (8, 0.7, 0.35)] {
            for k in 0..n {
                let t = PI - TAU * k as f64 / n as f64;
                pts.push((
                    g.cx + wf * g.mouth_w * g.rx * t.cos(),
                    mouth_y - hf * g.mouth_h * g.ry * t.sin(),
                ));
            }
        }
        pts
    }
}

struct Canvas {
    image: Image,
}

impl Canvas {
    fn new() -> Self {
        let mut image = Image::filled(TOY_CANVAS, TOY_CANVAS, 3, 0).expect("canvas size");
        for y in 0..TOY_CANVAS {
            for x in 0..TOY_CANVAS {
                image.set_rgb(x, y, BACKGROUND);
            }
        }
        Self { image }
    }

    fn fill_polygon(&mut self, poly: &[(f64, f64)], color: [u8; 3]) {
        for y in 0..TOY_CANVAS {
            for x in 0..TOY_CANVAS {
                if point_in_polygon(x as f64, y as f64, poly) {
                    self.image.set_rgb(x, y, color);
                }
            }
        }
    }

    fn stroke(&mut self, pts: &[(f64, f64)], closed: bool, color: [u8; 3]) {
        let mut m = Mask::new(TOY_CANVAS, TOY_CANVAS);
        draw_polyline(&mut m, pts, closed);
        for (x, y) in m.points() {
            self.image.set_rgb(x, y, color);
        }
    }

    fn thick_stroke(&mut self, pts: &[(f64, f64)], color: [u8; 3]) {
        self.stroke(pts, false, color);
        let shifted: Vec<_> = pts.iter().map(|&(x, y)| (x, y - 1.0)).collect();
        self.stroke(&shifted, false, color);
    }
}

fn head_outline(g: &Geometry) -> Vec<(f64, f64)> {
    (0..96)
        .map(|k| {
            let t = TAU * k as f64 / 96.0;
            (g.cx + g.rx * t.cos(), g.cy + g.ry * t.sin())
        })
        .collect()
}

fn arc(center: (f64, f64), radius: f64, from: f64, to: f64, n: usize) -> Vec<(f64, f64)> {
    (0..=n)
        .map(|k| {
            let t = from + (to - from) * k as f64 / n as f64;
            (center.0 + radius * t.cos(), center.1 + radius * t.sin())
        })
        .collect()
}

/// Wrinkles that stay inside the jaw-and-brow polygon: crow's feet,
/// under-eye arcs, nasolabial folds, cheek lines and marionette lines.
fn wrinkles(g: &Geometry, pts: &[(f64, f64)], rng: &mut impl Rng) -> Vec<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let jitter = |rng: &mut ChaCha8Rng| rng.random_range(-0.8..0.8);
    let mut r = ChaCha8Rng::seed_from_u64(rng.random());
    let eye_y = g.cy - 0.18 * g.ry;
    for side in [-1.0, 1.0] {
        let outer = g.cx + side * (g.eye_dx + g.eye_w + 0.06) * g.rx;
        for k in [-1.0, 0.0, 1.0] {
            let y = eye_y + k * 0.09 * g.ry;
            out.push(vec![(outer, y + jitter(&mut r)), (outer + side * 0.16 * g.rx, y + k * 0.07 * g.ry + jitter(&mut r))]);
        }
        let ex = g.cx + side * g.eye_dx * g.rx;
        for (k, drop) in [0.14, 0.22].iter().enumerate() {
            let w = g.eye_w * g.rx * (1.0 - 0.15 * k as f64);
            out.push(arc((ex, eye_y + drop * g.ry - w), w, 0.25 * PI, 0.75 * PI, 8));
        }
        let nose_side = (g.cx + side * (g.nose_w + 0.08) * g.rx, g.cy + 0.12 * g.ry);
        let mouth_corner = (g.cx + side * (g.mouth_w + 0.12) * g.rx, g.cy + 0.55 * g.ry);
        out.push(vec![
            nose_side,
            (
                (nose_side.0 + mouth_corner.0) / 2.0 + side * 0.06 * g.rx,
                (nose_side.1 + mouth_corner.1) / 2.0,
            ),
            mouth_corner,
        ]);
        let cheek_x = g.cx + side * 0.7 * g.rx;
        out.push(vec![
            (cheek_x, g.cy + 0.05 * g.ry + jitter(&mut r)),
            (cheek_x - side * 0.08 * g.rx, g.cy + 0.35 * g.ry + jitter(&mut r)),
        ]);
        let m_corner = (g.cx + side * g.mouth_w * g.rx, g.cy + 0.5 * g.ry);
        out.push(vec![
            (m_corner.0 + side * 0.04 * g.rx, m_corner.1 + 0.08 * g.ry),
            (m_corner.0 + side * 0.08 * g.rx, m_corner.1 + 0.3 * g.ry),
        ]);
    }
    let chin = pts[8];
    out.push(arc((chin.0, chin.1 - 0.45 * g.ry), 0.16 * g.rx, 0.2 * PI, 0.8 * PI, 8));
    out
}

fn forehead_lines(g: &Geometry) -> Vec<Vec<(f64, f64)>> {
    let top = g.cy - (g.brow_lift + 0.2) * g.ry;
    (0..3)
        .map(|k| {
            let y = top - k as f64 * 0.1 * g.ry;
            vec![(g.cx - 0.45 * g.rx, y), (g.cx, y - 0.03 * g.ry), (g.cx + 0.45 * g.rx, y)]
        })
        .collect()
}

/// Draw one face of the given group.
pub fn draw_face(name: &str, group: AgeGroup, rng: &mut impl Rng) -> Result<ToyFace> {
    let g = Geometry::sample(rng);
    let pts = g.landmarks();
    let mut canvas = Canvas::new();
    canvas.fill_polygon(&head_outline(&g), SKIN);

    canvas.stroke(&pts[27..=30], false, NOSE_SHADE);
    canvas.stroke(&pts[31..=35], true, FEATURE);
    for eye in [&pts[36..=41], &pts[42..=47]] {
        canvas.fill_polygon(eye, FEATURE);
        canvas.stroke(eye, true, FEATURE);
    }
    canvas.thick_stroke(&pts[17..=21], FEATURE);
    canvas.thick_stroke(&pts[22..=26], FEATURE);
    canvas.fill_polygon(&pts[48..=59], LIPS);
    canvas.stroke(&pts[48..=59], true, LIPS);
    canvas.fill_polygon(&pts[60..=67], FEATURE);

    if group == AgeGroup::Old {
        for w in wrinkles(&g, &pts, rng).iter().chain(forehead_lines(&g).iter()) {
            canvas.stroke(w, false, WRINKLE);
        }
    }

    let landmarks = LandmarkSet::new(pts)?;
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for &(x, y) in landmarks.points() {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let side = (x1 - x0).max(y1 - y0).ceil() as usize;
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let face_box = BoundingBox::new((cx - side as f64 / 2.0).round() as i64, (cy - side as f64 / 2.0).round() as i64, side, side)?;
    let age = match group {
        AgeGroup::Young => rng.random_range(18..=28),
        AgeGroup::Old => rng.random_range(60..=85),
    };
    Ok(ToyFace {
        name: name.to_string(),
        group,
        age,
        image: canvas.image,
        landmarks,
        face_box,
    })
}

/// `n_per_group` young and `n_per_group` old faces, alternating.
pub fn generate_faces(n_per_group: usize, seed: u64) -> Result<Vec<ToyFace>> {
    if n_per_group == 0 {
        return Err(PipelineError::Config("toy corpus needs at least one face per group".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut faces = Vec::with_capacity(2 * n_per_group);
    for i in 0..n_per_group {
        for group in [AgeGroup::Young, AgeGroup::Old] {
            let name = format!("toy_{i:04}_{}", group.label());
            faces.push(draw_face(&name, group, &mut rng)?);
        }
    }
    Ok(faces)
}

pub const MANIFEST_NAME: &str = "manifest.csv";

/// Write images, landmark files and `manifest.csv` under `dir`. Returns the
/// manifest path.
pub fn synth_toy_data(n_per_group: usize, seed: u64, dir: &Path) -> Result<PathBuf> {
    let faces = generate_faces(n_per_group, seed)?;
    let images = dir.join("images");
    let marks = dir.join("landmarks");
    for d in [&images, &marks] {
        fs::create_dir_all(d).map_err(PipelineError::io(d))?;
    }
    let manifest = dir.join(MANIFEST_NAME);
    let mut w = csv::Writer::from_path(&manifest).map_err(|e| PipelineError::Data(format!("{}: {e}", manifest.display())))?;
    let csv_err = |e: csv::Error| PipelineError::Data(format!("{}: {e}", manifest.display()));
    w.write_record(["image", "landmarks", "x", "y", "w", "h", "age"]).map_err(csv_err)?;
    for f in &faces {
        let img_rel = format!("images/{}.png", f.name);
        let lm_rel = format!("landmarks/{}.txt", f.name);
        save_image(dir.join(&img_rel), &f.image)?;
        f.landmarks.save(dir.join(&lm_rel))?;
        let b = &f.face_box;
        w.write_record([
            img_rel,
            lm_rel,
            b.x.to_string(),
            b.y.to_string(),
            b.w.to_string(),
            b.h.to_string(),
            f.age.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(PipelineError::io(&manifest))?;
    Ok(manifest)
}
