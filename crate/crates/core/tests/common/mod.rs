#![allow(dead_code)]

use featfront::bench::synth::{synth_image, synth_sequence, SynthParams};
use featfront::image::gaussian_blur;
use featfront::{Corner, Image};
use featfront_oracle::{noise_image, Detection};

/// Seeded small image of one of three textures: raw noise, blurred noise or
/// a synthetic scene crop.
pub fn seeded_image(side: usize, seed: u64) -> Image {
    match seed % 3 {
        0 => noise_image(side, side, seed),
        1 => gaussian_blur(&noise_image(side, side, seed), 5, 1.5).unwrap(),
        _ => synth_image(side, side, seed),
    }
}

pub fn corpus(side: usize, count: u64) -> Vec<Image> {
    (0..count).map(|s| seeded_image(side, s)).collect()
}

/// Synthetic 752x480 frames.
pub fn frames(n: usize) -> Vec<Image> {
    synth_sequence(&SynthParams { frames: n, ..SynthParams::default() })
}

pub fn detections(corners: &[Corner]) -> Vec<Detection> {
    corners.iter().map(|c| Detection { x: c.x, y: c.y, score: c.score }).collect()
}

/// Smooth seeded noise, suitable for tracking.
pub fn texture(w: usize, h: usize, seed: u64) -> Image {
    gaussian_blur(&noise_image(w, h, seed), 7, 2.0).unwrap()
}

/// `next(x, y) = prev(x - dx, y - dy)`, bilinear, rounded.
pub fn warp(img: &Image, dx: f64, dy: f64) -> Image {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let px = |x: i64, y: i64| img.get(x.clamp(0, w - 1) as usize, y.clamp(0, h - 1) as usize) as f64;
    Image::from_fn(img.width(), img.height(), |x, y| {
        let (sx, sy) = (x as f64 - dx, y as f64 - dy);
        let (x0, y0) = (sx.floor(), sy.floor());
        let (fx, fy) = (sx - x0, sy - y0);
        let (xi, yi) = (x0 as i64, y0 as i64);
        let v = (1.0 - fy) * ((1.0 - fx) * px(xi, yi) + fx * px(xi + 1, yi))
            + fy * ((1.0 - fx) * px(xi, yi + 1) + fx * px(xi + 1, yi + 1));
        v.round() as u8
    })
    .unwrap()
}
