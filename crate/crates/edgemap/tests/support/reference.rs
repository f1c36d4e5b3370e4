//! Straightforward 2-D array re-implementations of canny, contour drawing and
//! point-in-polygon, written without reference to the library code paths.

pub type Grid = Vec<Vec<f64>>;

fn at_clamped(g: &Grid, x: i64, y: i64) -> f64 {
    let h = g.len() as i64;
    let w = g[0].len() as i64;
    g[y.clamp(0, h - 1) as usize][x.clamp(0, w - 1) as usize]
}

/// Canny edge pixels as a `height × width` boolean grid.
pub fn reference_canny(pixels: &[u8], width: usize, height: usize, sigma: f64, low: f64, high: f64) -> Vec<Vec<bool>> {
    let lowest = *pixels.iter().min().unwrap();
    let img: Grid = (0..height)
        .map(|y| (0..width).map(|x| (pixels[y * width + x] - lowest) as f64).collect())
        .collect();

    // Gaussian weights, normalized.
    let r = (3.0 * sigma).ceil() as i64;
    let mut weights = Vec::new();
    for i in -r..=r {
        weights.push((-((i * i) as f64) / (2.0 * sigma * sigma)).exp());
    }
    let norm: f64 = weights.iter().sum();
    for wgt in weights.iter_mut() {
        *wgt /= norm;
    }

    // Horizontal then vertical pass with edge replication.
    let mut tmp = vec![vec![0.0; width]; height];
    for y in 0..height {
        for x in 0..width {
            let mut s = 0.0;
            for (k, wgt) in weights.iter().enumerate() {
                s += wgt * at_clamped(&img, x as i64 + k as i64 - r, y as i64);
            }
            tmp[y][x] = s;
        }
    }
    let mut smooth = vec![vec![0.0; width]; height];
    for y in 0..height {
        for x in 0..width {
            let mut s = 0.0;
            for (k, wgt) in weights.iter().enumerate() {
                s += wgt * at_clamped(&tmp, x as i64, y as i64 + k as i64 - r);
            }
            smooth[y][x] = s;
        }
    }

    // Sobel.
    let mut gx = vec![vec![0.0; width]; height];
    let mut gy = vec![vec![0.0; width]; height];
    let mut mag = vec![vec![0.0; width]; height];
    for y in 0..height as i64 {
        for x in 0..width as i64 {
            let s = |dx: i64, dy: i64| at_clamped(&smooth, x + dx, y + dy);
            let right = s(1, -1) + 2.0 * s(1, 0) + s(1, 1);
            let left = s(-1, -1) + 2.0 * s(-1, 0) + s(-1, 1);
            let down = s(-1, 1) + 2.0 * s(0, 1) + s(1, 1);
            let up = s(-1, -1) + 2.0 * s(0, -1) + s(1, -1);
            let (a, b) = (right - left, down - up);
            gx[y as usize][x as usize] = a;
            gy[y as usize][x as usize] = b;
            mag[y as usize][x as usize] = a.hypot(b);
        }
    }

    // Non-maximum suppression, zero outside the image.
    let m_at = |x: i64, y: i64| -> f64 {
        if x < 0 || y < 0 || x >= width as i64 || y >= height as i64 {
            0.0
        } else {
            mag[y as usize][x as usize]
        }
    };
    let mut strong = vec![vec![false; width]; height];
    let mut weak = vec![vec![false; width]; height];
    for y in 0..height {
        for x in 0..width {
            let m = mag[y][x];
            if m <= 0.0 || m < low {
                continue;
            }
            let mut deg = gy[y][x].atan2(gx[y][x]) * 180.0 / std::f64::consts::PI;
            if deg < 0.0 {
                deg += 180.0;
            }
            let (b, a) = if deg < 22.5 || deg >= 157.5 {
                ((-1, 0), (1, 0))
            } else if deg < 67.5 {
                ((-1, -1), (1, 1))
            } else if deg < 112.5 {
                ((0, -1), (0, 1))
            } else {
                ((1, -1), (-1, 1))
            };
            let (xi, yi) = (x as i64, y as i64);
            let keep = m > m_at(xi + b.0, yi + b.1) && m >= m_at(xi + a.0, yi + a.1);
            if !keep {
                continue;
            }
            if m >= high {
                strong[y][x] = true;
            } else {
                weak[y][x] = true;
            }
        }
    }

    // Hysteresis by repeated relaxation until nothing changes.
    let mut edge = strong.clone();
    loop {
        let mut changed = false;
        for y in 0..height {
            for x in 0..width {
                if !weak[y][x] || edge[y][x] {
                    continue;
                }
                let mut touches = false;
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                        if nx >= 0 && ny >= 0 && nx < width as i64 && ny < height as i64 && edge[ny as usize][nx as usize] {
                            touches = true;
                        }
                    }
                }
                if touches {
                    edge[y][x] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    edge
}

/// Integer midpoint line: step along the major axis and round the minor
/// coordinate to nearest, ties away from the canonical (lexicographically
/// smaller) start point.
pub fn reference_segment(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
    let (p, q) = if a <= b { (a, b) } else { (b, a) };
    let (dx, dy) = (q.0 - p.0, q.1 - p.1);
    let steps = dx.abs().max(dy.abs());
    if steps == 0 {
        return vec![p];
    }
    let mut out = Vec::new();
    for t in 0..=steps {
        if dx.abs() >= dy.abs() {
            let x = p.0 + t * dx.signum();
            out.push((x, p.1 + round_div(t * dy.abs(), dx.abs()) * dy.signum()));
        } else {
            let y = p.1 + t * dy.signum();
            out.push((p.0 + round_div(t * dx.abs(), dy.abs()) * dx.signum(), y));
        }
    }
    out
}

/// `round(n / d)` for non-negative operands, halves rounded up.
fn round_div(n: i64, d: i64) -> i64 {
    (2 * n + d) / (2 * d)
}

pub const GROUPS: [(usize, usize, bool); 9] = [
    (0, 16, false),
    (17, 21, false),
    (22, 26, false),
    (27, 30, false),
    (31, 35, true),
    (36, 41, true),
    (42, 47, true),
    (48, 59, true),
    (60, 67, true),
];

pub fn reference_contour(points: &[(f64, f64)], width: usize, height: usize) -> Vec<Vec<bool>> {
    let mut grid = vec![vec![false; width]; height];
    let snap = |p: (f64, f64)| -> (i64, i64) {
        (
            (p.0.round() as i64).max(0).min(width as i64 - 1),
            (p.1.round() as i64).max(0).min(height as i64 - 1),
        )
    };
    for (first, last, closed) in GROUPS {
        let mut segs = Vec::new();
        for i in first..last {
            segs.push((snap(points[i]), snap(points[i + 1])));
        }
        if closed {
            segs.push((snap(points[last]), snap(points[first])));
        }
        for (a, b) in segs {
            for (x, y) in reference_segment(a, b) {
                grid[y as usize][x as usize] = true;
            }
        }
    }
    grid
}

/// Winding number of the polygon around `(x, y)`; non-zero means inside.
pub fn winding_number(x: f64, y: f64, poly: &[(f64, f64)]) -> i32 {
    let mut wn = 0;
    for i in 0..poly.len() {
        let (x0, y0) = poly[i];
        let (x1, y1) = poly[(i + 1) % poly.len()];
        let side = (x1 - x0) * (y - y0) - (x - x0) * (y1 - y0);
        if y0 <= y {
            if y1 > y && side > 0.0 {
                wn += 1;
            }
        } else if y1 <= y && side < 0.0 {
            wn -= 1;
        }
    }
    wn
}

/// A simple symmetric toy face on a `size × size` canvas: jaw arc, brows,
/// nose, eyes and lips, with fractional coordinates.
pub fn toy_landmarks(size: f64, jitter: f64) -> Vec<(f64, f64)> {
    let (cx, cy) = (size * 0.5 + 0.137 * jitter, size * 0.52 + 0.071 * jitter);
    let (rx, ry) = (size * 0.33, size * 0.38);
    let mut pts = Vec::with_capacity(68);
    for i in 0..17 {
        let t = std::f64::consts::PI * (1.0 - i as f64 / 16.0);
        pts.push((cx + rx * t.cos() + 0.013, cy + ry * t.sin() - 0.1 * ry));
    }
    // brows
    for side in [-1.0, 1.0] {
        for k in 0..5 {
            let u = k as f64 / 4.0;
            let x = cx + side * (size * 0.08 + size * 0.16 * if side < 0.0 { 1.0 - u } else { u });
            pts.push((x + 0.021, cy - size * 0.2 - size * 0.03 * (u * std::f64::consts::PI).sin()));
        }
    }
    // nose bridge
    for k in 0..4 {
        pts.push((cx + 0.031, cy - size * 0.12 + size * 0.05 * k as f64));
    }
    // nose base
    for k in 0..5 {
        pts.push((cx + size * 0.05 * (k as f64 - 2.0) + 0.017, cy + size * 0.06 + size * 0.01 * (k as f64 - 2.0).abs()));
    }
    // eyes
    for side in [-1.0, 1.0] {
        let ex = cx + side * size * 0.14;
        let ey = cy - size * 0.1;
        for k in 0..6 {
            let t = std::f64::consts::TAU * k as f64 / 6.0;
            pts.push((ex + size * 0.06 * t.cos() + 0.011, ey + size * 0.025 * t.sin() + 0.019));
        }
    }
    // outer and inner lips
    for (n, sx, sy) in [(12usize, 0.12, 0.045), (8, 0.08, 0.02)] {
        for k in 0..n {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            pts.push((cx + size * sx * t.cos() + 0.023, cy + size * 0.2 + size * sy * t.sin() + 0.009));
        }
    }
    assert_eq!(pts.len(), 68);
    pts
}
