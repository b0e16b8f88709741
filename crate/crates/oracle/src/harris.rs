//! Harris detector by direct summation over each window.

use featfront::Image;

use crate::filter::sobel_at;
use crate::Detection;

/// Structure tensor `(Σ gx², Σ gx·gy, Σ gy²)` over the `block × block`
/// window centred on `(x, y)`, uniform weights.
pub fn oracle_tensor(img: &Image, sobel: usize, block: usize, x: usize, y: usize) -> (i64, i64, i64) {
    let r = block / 2;
    let (mut a, mut b, mut c) = (0i64, 0i64, 0i64);
    for v in y - r..=y + r {
        for u in x - r..=x + r {
            let (gx, gy) = sobel_at(img, sobel, u, v);
            a += gx * gx;
            b += gx * gy;
            c += gy * gy;
        }
    }
    (a, b, c)
}

pub fn oracle_response(a: i64, b: i64, c: i64, k: f64) -> f64 {
    let (a, b, c) = (a as f64, b as f64, c as f64);
    let det = a * c - b * b;
    let trace = a + c;
    det - k * (trace * trace)
}

/// Response over every pixel whose window fits, `None` elsewhere.
pub fn oracle_response_map(img: &Image, k: f64, sobel: usize, block: usize) -> Vec<Vec<Option<f64>>> {
    let m = sobel / 2 + block / 2;
    let (w, h) = (img.width(), img.height());
    (0..h)
        .map(|y| {
            (0..w)
                .map(|x| {
                    let inside = x >= m && y >= m && x + m < w && y + m < h;
                    inside.then(|| {
                        let (a, b, c) = oracle_tensor(img, sobel, block, x, y);
                        oracle_response(a, b, c, k)
                    })
                })
                .collect()
        })
        .collect()
}

/// Threshold (strict), then suppression. A 2-wide window covers the pixel,
/// its right, lower and lower-right neighbours; odd windows are centred.
pub fn oracle_harris(img: &Image, k: f64, threshold: f64, sobel: usize, block: usize, nms: usize) -> Vec<Detection> {
    let map = oracle_response_map(img, k, sobel, block);
    let (w, h) = (img.width() as i64, img.height() as i64);
    let cand = |x: i64, y: i64| -> Option<f64> {
        if x < 0 || y < 0 || x >= w || y >= h {
            return None;
        }
        map[y as usize][x as usize].filter(|&r| r > threshold)
    };
    let window: Vec<(i64, i64)> = if nms == 2 {
        vec![(0, 0), (1, 0), (0, 1), (1, 1)]
    } else {
        let r = (nms / 2) as i64;
        (-r..=r).flat_map(|dy| (-r..=r).map(move |dx| (dx, dy))).collect()
    };
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let Some(own) = cand(x, y) else { continue };
            let beaten = window.iter().any(|&(dx, dy)| cand(x + dx, y + dy).is_some_and(|v| v > own));
            if !beaten {
                out.push(Detection { x: x as u32, y: y as u32, score: own });
            }
        }
    }
    out
}
