//! Seeded synthetic scenes for benchmarking without a dataset.
//!
//! A padded canvas of layered value noise is overlaid with opaque
//! rectangles (which give clean corners); frame `i` is the crop of that canvas
//! shifted by `i × (dx, dy)` pixels, so consecutive frames are related by an
//! exact integer translation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::image::Image;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub seed: u64,
    /// Per-frame translation of the camera over the canvas.
    pub dx: i32,
    pub dy: i32,
    /// Rectangles per 10 000 pixels of canvas.
    pub rect_density: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self { width: 752, height: 480, frames: 100, seed: 7, dx: 2, dy: 1, rect_density: 3.0 }
    }
}

const PAD: usize = 16;
const OCTAVES: [(usize, f32); 3] = [(64, 70.0), (16, 30.0), (4, 10.0)];

fn smooth(t: f32) -> f32 {
    t * t * (3.0 - 2.0 * t)
}

fn add_octave(canvas: &mut [f32], w: usize, h: usize, cell: usize, amp: f32, rng: &mut ChaCha8Rng) {
    let gw = w / cell + 2;
    let gh = h / cell + 2;
    let grid: Vec<f32> = (0..gw * gh).map(|_| rng.gen::<f32>()).collect();
    for y in 0..h {
        let gy = y / cell;
        let fy = smooth((y % cell) as f32 / cell as f32);
        for x in 0..w {
            let gx = x / cell;
            let fx = smooth((x % cell) as f32 / cell as f32);
            let g = |i: usize, j: usize| grid[(gy + j) * gw + gx + i];
            let top = g(0, 0) + (g(1, 0) - g(0, 0)) * fx;
            let bot = g(0, 1) + (g(1, 1) - g(0, 1)) * fx;
            canvas[y * w + x] += amp * (top + (bot - top) * fy);
        }
    }
}

fn canvas_span(p: &SynthParams) -> (usize, usize) {
    let travel = p.frames.saturating_sub(1);
    (
        p.width + 2 * PAD + travel * p.dx.unsigned_abs() as usize,
        p.height + 2 * PAD + travel * p.dy.unsigned_abs() as usize,
    )
}

/// The full canvas every frame is cropped from.
pub fn synth_canvas(p: &SynthParams) -> Image {
    let (w, h) = canvas_span(p);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut canvas = vec![50.0f32; w * h];
    for (cell, amp) in OCTAVES {
        add_octave(&mut canvas, w, h, cell, amp, &mut rng);
    }
    let rects = ((w * h) as f64 / 10_000.0 * p.rect_density).round() as usize;
    for _ in 0..rects {
        let rw = rng.gen_range(6..40usize);
        let rh = rng.gen_range(6..40usize);
        let x0 = rng.gen_range(0..w.saturating_sub(rw).max(1));
        let y0 = rng.gen_range(0..h.saturating_sub(rh).max(1));
        let v = rng.gen_range(0..=255u8) as f32;
        for y in y0..(y0 + rh).min(h) {
            canvas[y * w + x0..y * w + (x0 + rw).min(w)].fill(v);
        }
    }
    Image::from_fn(w, h, |x, y| canvas[y * w + x].round().clamp(0.0, 255.0) as u8).expect("non-empty canvas")
}

fn origin(p: &SynthParams, i: usize) -> (usize, usize) {
    let travel = p.frames.saturating_sub(1) as i64;
    let start = |d: i32| if d < 0 { travel * -(d as i64) } else { 0 };
    let ox = PAD as i64 + start(p.dx) + i as i64 * p.dx as i64;
    let oy = PAD as i64 + start(p.dy) + i as i64 * p.dy as i64;
    (ox as usize, oy as usize)
}

fn crop(canvas: &Image, p: &SynthParams, i: usize) -> Image {
    let (ox, oy) = origin(p, i);
    Image::from_fn(p.width, p.height, |x, y| canvas.get(ox + x, oy + y)).expect("non-empty frame")
}

/// All `p.frames` frames, in order.
pub fn synth_sequence(p: &SynthParams) -> Vec<Image> {
    let canvas = synth_canvas(p);
    (0..p.frames).map(|i| crop(&canvas, p, i)).collect()
}

/// A single frame (frame 0 of a one-frame sequence).
pub fn synth_image(width: usize, height: usize, seed: u64) -> Image {
    let p = SynthParams { width, height, frames: 1, seed, ..SynthParams::default() };
    crop(&synth_canvas(&p), &p, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let p = SynthParams { width: 64, height: 48, frames: 3, ..SynthParams::default() };
        assert_eq!(synth_sequence(&p), synth_sequence(&p));
        let q = SynthParams { seed: 8, ..p };
        assert_ne!(synth_sequence(&p), synth_sequence(&q));
    }

    #[test]
    fn frames_are_translations() {
        let p = SynthParams { width: 80, height: 60, frames: 4, dx: -3, dy: 2, ..SynthParams::default() };
        let f = synth_sequence(&p);
        assert_eq!((f[0].width(), f[0].height()), (80, 60));
        for y in 0..50 {
            for x in 3..80 {
                // content moves by (+3, -2) in the image when the view moves by (-3, +2)
                assert_eq!(f[1].get(x, y), f[0].get(x - 3, y + 2));
            }
        }
    }

    #[test]
    fn has_texture() {
        let img = synth_image(128, 96, 1);
        let distinct: std::collections::HashSet<u8> = img.data().iter().copied().collect();
        assert!(distinct.len() > 64);
    }
}
