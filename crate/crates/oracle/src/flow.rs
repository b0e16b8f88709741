//! Exhaustive SSD displacement search.

use featfront::Image;

fn bilinear(img: &Image, x: f64, y: f64) -> f64 {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let pix = |xi: i64, yi: i64| img.get(xi.clamp(0, w - 1) as usize, yi.clamp(0, h - 1) as usize) as f64;
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let (xi, yi) = (x0 as i64, y0 as i64);
    (1.0 - fy) * ((1.0 - fx) * pix(xi, yi) + fx * pix(xi + 1, yi))
        + fy * ((1.0 - fx) * pix(xi, yi + 1) + fx * pix(xi + 1, yi + 1))
}

/// Sum of squared differences between the `window`-sized patch of `prev`
/// at `p` and that of `next` at `p + d`.
pub fn ssd(prev: &Image, next: &Image, p: (f64, f64), d: (f64, f64), window: usize) -> f64 {
    let r = (window / 2) as i64;
    let mut s = 0.0;
    for j in -r..=r {
        for i in -r..=r {
            let a = bilinear(prev, p.0 + i as f64, p.1 + j as f64);
            let b = bilinear(next, p.0 + d.0 + i as f64, p.1 + d.1 + j as f64);
            s += (a - b) * (a - b);
        }
    }
    s
}

/// Grid point `d ∈ {-range, -range + step, …, range}²` minimising the SSD.
/// Ties go to the smaller `|d|`, then to the smaller `(dx, dy)`.
pub fn oracle_flow(prev: &Image, next: &Image, p: (f64, f64), window: usize, range: f64, step: f64) -> (f64, f64) {
    let n = (range / step).round() as i64;
    let axis: Vec<f64> = (-n..=n).map(|i| i as f64 * step).collect();
    let mut best: Option<(f64, f64, (f64, f64))> = None;
    for &dx in &axis {
        for &dy in &axis {
            let cost = ssd(prev, next, p, (dx, dy), window);
            let mag = dx * dx + dy * dy;
            let better = match best {
                None => true,
                Some((c, m, d)) => cost < c || (cost == c && (mag < m || (mag == m && (dx, dy) < d))),
            };
            if better {
                best = Some((cost, mag, (dx, dy)));
            }
        }
    }
    best.expect("non-empty grid").2
}
