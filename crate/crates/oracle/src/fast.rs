//! Segment-test detector, transcribed step by step.

use featfront::Image;

use crate::Detection;

/// Bresenham circle of radius 3, clockwise from the top.
const RING: [(i32, i32); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

fn px(img: &Image, x: i32, y: i32) -> i32 {
    img.get(x as usize, y as usize) as i32
}

/// Enumerates all 16 starting positions and checks each arc of `n` pixels.
pub fn oracle_segment_test(img: &Image, x: i32, y: i32, t: i32, n: usize) -> bool {
    let p = px(img, x, y);
    for start in 0..16 {
        let mut all_bright = true;
        let mut all_dark = true;
        for k in 0..n {
            let (dx, dy) = RING[(start + k) % 16];
            let q = px(img, x + dx, y + dy);
            if !(q > p + t) {
                all_bright = false;
            }
            if !(q < p - t) {
                all_dark = false;
            }
        }
        if all_bright || all_dark {
            return true;
        }
    }
    false
}

/// Raises the threshold one step at a time while the test still passes;
/// the score is the last threshold that passed.
pub fn oracle_score(img: &Image, x: i32, y: i32, threshold: i32, n: usize) -> Option<i32> {
    if !oracle_segment_test(img, x, y, threshold, n) {
        return None;
    }
    let mut t = threshold;
    while t < 254 && oracle_segment_test(img, x, y, t + 1, n) {
        t += 1;
    }
    Some(t)
}

/// Full detector: score every interior pixel, then keep a candidate unless a
/// candidate within the `nms`-sized window scores strictly higher.
pub fn oracle_fast(img: &Image, n: usize, threshold: u8, nms: usize) -> Vec<Detection> {
    let (w, h) = (img.width() as i32, img.height() as i32);
    let mut score = vec![vec![0i32; w as usize]; h as usize];
    for y in 3..h - 3 {
        for x in 3..w - 3 {
            if let Some(s) = oracle_score(img, x, y, threshold as i32, n) {
                score[y as usize][x as usize] = s;
            }
        }
    }
    let r = (nms / 2) as i32;
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let s = score[y as usize][x as usize];
            if s == 0 {
                continue;
            }
            let mut keep = true;
            for ny in y - r..=y + r {
                for nx in x - r..=x + r {
                    if nx >= 0 && ny >= 0 && nx < w && ny < h && score[ny as usize][nx as usize] > s {
                        keep = false;
                    }
                }
            }
            if keep {
                out.push(Detection { x: x as u32, y: y as u32, score: s as f64 });
            }
        }
    }
    out
}
