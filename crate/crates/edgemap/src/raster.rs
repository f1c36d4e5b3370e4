use crate::landmarks::{LandmarkSet, GROUPS};
use crate::mask::Mask;

fn snap(p: (f64, f64), width: usize, height: usize) -> (i64, i64) {
    (
        (p.0.round() as i64).clamp(0, width as i64 - 1),
        (p.1.round() as i64).clamp(0, height as i64 - 1),
    )
}

/// Bresenham segment. Endpoints are put in a canonical order first so the
/// pixel set does not depend on drawing direction.
pub fn draw_line(mask: &mut Mask, a: (i64, i64), b: (i64, i64)) {
    let (mut x0, mut y0, x1, y1) = if a <= b { (a.0, a.1, b.0, b.1) } else { (b.0, b.1, a.0, a.1) };
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        if x0 >= 0 && y0 >= 0 && (x0 as usize) < mask.width() && (y0 as usize) < mask.height() {
            mask.set(x0 as usize, y0 as usize, true);
        }
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}

/// Draw the polyline through `points` (rounded and clamped to the mask),
/// closing it back to the first point when `closed`.
pub fn draw_polyline(mask: &mut Mask, points: &[(f64, f64)], closed: bool) {
    let (w, h) = (mask.width(), mask.height());
    let snapped: Vec<(i64, i64)> = points.iter().map(|&p| snap(p, w, h)).collect();
    if let [only] = snapped[..] {
        draw_line(mask, only, only);
        return;
    }
    for pair in snapped.windows(2) {
        draw_line(mask, pair[0], pair[1]);
    }
    if closed && snapped.len() > 2 {
        draw_line(mask, snapped[snapped.len() - 1], snapped[0]);
    }
}

/// Contour of the face drawn from its 68 landmarks.
pub fn rasterize_landmark_contour(landmarks: &LandmarkSet, width: usize, height: usize) -> Mask {
    let mut mask = Mask::new(width, height);
    for g in GROUPS {
        draw_polyline(&mut mask, &landmarks.points()[g.first..=g.last], g.closed);
    }
    mask
}
