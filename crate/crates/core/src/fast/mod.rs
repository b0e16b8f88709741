//! FAST segment-test corner detection with maximum-threshold scoring and
//! non-maxima suppression.
//!
//! Two tiers produce identical output. [`detect_fast`] is the per-pixel
//! reference; [`detect_fast_batch`] streams rows through a seven-row buffer
//! and evaluates `N` adjacent pixels per step, scoring candidates as soon as
//! they are tagged and suppressing against a trailing score buffer.

mod batch;

pub use batch::{detect_fast_batch, FastBatchState, SUPPORTED_LANES};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corner::Corner;
use crate::image::Image;

/// Offsets of the 16-pixel Bresenham circle of radius 3, clockwise from the top.
pub const CIRCLE: [(isize, isize); 16] = [
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

/// Pixels closer than this to any border are never tested.
pub const BORDER: usize = 3;

/// Largest threshold that can still pass: differences never exceed 255.
pub const MAX_THRESHOLD: u8 = 254;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FastError {
    #[error("pixel ({x}, {y}) is within {BORDER} pixels of the border of a {width}x{height} image")]
    OutOfInterior { x: usize, y: usize, width: usize, height: usize },
    #[error("pixel ({x}, {y}) does not pass the segment test at threshold {threshold}")]
    NotACorner { x: usize, y: usize, threshold: u8 },
    #[error("image {width}x{height} is smaller than 7x7")]
    ImageTooSmall { width: usize, height: usize },
    #[error("unsupported lane count {0} (expected 1, 4, 8 or 16)")]
    UnsupportedLaneCount(usize),
    #[error("invalid FAST configuration: {0}")]
    InvalidConfig(String),
}

/// Detector parameters. The defaults are FAST-9, threshold 10, 3x3 NMS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FastConfig {
    /// Required number of cyclically contiguous circle pixels.
    pub arc_length: u8,
    pub threshold: u8,
    /// Side of the square suppression window, odd.
    pub nms_window: usize,
}

impl Default for FastConfig {
    fn default() -> Self {
        Self { arc_length: 9, threshold: 10, nms_window: 3 }
    }
}

impl FastConfig {
    pub fn with_threshold(threshold: u8) -> Self {
        Self { threshold, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), FastError> {
        if !(9..=16).contains(&self.arc_length) {
            return Err(FastError::InvalidConfig(format!("arc_length {} outside [9, 16]", self.arc_length)));
        }
        if !(1..=MAX_THRESHOLD).contains(&self.threshold) {
            return Err(FastError::InvalidConfig(format!("threshold {} outside [1, {MAX_THRESHOLD}]", self.threshold)));
        }
        if self.nms_window.is_multiple_of(2) {
            return Err(FastError::InvalidConfig(format!("nms_window {} must be odd", self.nms_window)));
        }
        Ok(())
    }
}

/// True if `mask` (16 circle bits) contains `arc` cyclically contiguous ones.
#[inline]
pub(crate) fn has_arc(mask: u16, arc: u8) -> bool {
    if mask.count_ones() < arc as u32 {
        return false;
    }
    let doubled = (mask as u32) | ((mask as u32) << 16);
    let mut run = doubled;
    for _ in 1..arc {
        run &= run >> 1;
    }
    run != 0
}

fn check_interior(img: &Image, x: usize, y: usize) -> Result<(), FastError> {
    let (w, h) = (img.width(), img.height());
    if x < BORDER || y < BORDER || x + BORDER >= w || y + BORDER >= h {
        return Err(FastError::OutOfInterior { x, y, width: w, height: h });
    }
    Ok(())
}

/// Brighter/darker circle masks for a pixel known to be in the interior.
#[inline]
fn circle_masks(img: &Image, x: usize, y: usize, t: u8) -> (u16, u16) {
    let w = img.width();
    let data = img.data();
    let centre = data[y * w + x] as i16;
    let t = t as i16;
    let mut bright = 0u16;
    let mut dark = 0u16;
    for (i, &(dx, dy)) in CIRCLE.iter().enumerate() {
        let p = data[(y as isize + dy) as usize * w + (x as isize + dx) as usize] as i16;
        if p > centre + t {
            bright |= 1 << i;
        } else if p < centre - t {
            dark |= 1 << i;
        }
    }
    (bright, dark)
}

/// False only if the pixel cannot pass: a contiguous arc of length `arc`
/// covers at least `arc / 4` of the ring positions 0, 4, 8, 12.
#[inline]
fn compass_may_pass(img: &Image, x: usize, y: usize, t: u8, arc: u8) -> bool {
    let w = img.width();
    let data = img.data();
    let centre = data[y * w + x] as i16;
    let t = t as i16;
    let need = arc / 4;
    let (mut bright, mut dark) = (0u8, 0u8);
    for &(dx, dy) in [CIRCLE[0], CIRCLE[4], CIRCLE[8], CIRCLE[12]].iter() {
        let p = data[(y as isize + dy) as usize * w + (x as isize + dx) as usize] as i16;
        bright += (p > centre + t) as u8;
        dark += (p < centre - t) as u8;
    }
    bright >= need || dark >= need
}

#[inline]
fn passes(img: &Image, x: usize, y: usize, t: u8, arc: u8) -> bool {
    let (bright, dark) = circle_masks(img, x, y, t);
    has_arc(bright, arc) || has_arc(dark, arc)
}

/// The segment test: at least `arc_length` contiguous circle pixels strictly
/// brighter than `I_p + t`, or strictly darker than `I_p - t`.
pub fn segment_test(img: &Image, x: usize, y: usize, threshold: u8, arc_length: u8) -> Result<bool, FastError> {
    check_interior(img, x, y)?;
    Ok(passes(img, x, y, threshold, arc_length))
}

/// Maximum threshold at which the pixel still passes the segment test.
///
/// Passing is monotone in the threshold, so a binary search over
/// `[cfg.threshold, 254]` finds the same value as stepping up by one.
pub fn fast_score(img: &Image, x: usize, y: usize, cfg: &FastConfig) -> Result<u8, FastError> {
    check_interior(img, x, y)?;
    if !passes(img, x, y, cfg.threshold, cfg.arc_length) {
        return Err(FastError::NotACorner { x, y, threshold: cfg.threshold });
    }
    Ok(score_unchecked(img, x, y, cfg))
}

fn score_unchecked(img: &Image, x: usize, y: usize, cfg: &FastConfig) -> u8 {
    // Invariant: passes(lo), and !passes(hi + 1) or hi == MAX_THRESHOLD.
    let mut lo = cfg.threshold;
    let mut hi = MAX_THRESHOLD;
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if passes(img, x, y, mid, cfg.arc_length) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

fn check_image(img: &Image) -> Result<(), FastError> {
    if img.width() < 2 * BORDER + 1 || img.height() < 2 * BORDER + 1 {
        return Err(FastError::ImageTooSmall { width: img.width(), height: img.height() });
    }
    Ok(())
}

/// Keeps candidate `(x, y)` unless a candidate inside the window around it
/// has a strictly greater score. `scores` is a full-size map, 0 = no candidate.
pub(crate) fn survives_nms(scores: &[u8], width: usize, height: usize, x: usize, y: usize, window: usize) -> bool {
    let r = window / 2;
    let own = scores[y * width + x];
    let (x0, x1) = (x.saturating_sub(r), (x + r).min(width - 1));
    let (y0, y1) = (y.saturating_sub(r), (y + r).min(height - 1));
    for ny in y0..=y1 {
        for nx in x0..=x1 {
            if scores[ny * width + nx] > own {
                return false;
            }
        }
    }
    true
}

/// Scalar reference detector. Output is sorted by `(y, x)`.
pub fn detect_fast(img: &Image, cfg: &FastConfig) -> Result<Vec<Corner>, FastError> {
    cfg.validate()?;
    check_image(img)?;
    let (w, h) = (img.width(), img.height());
    let mut scores = vec![0u8; w * h];
    for y in BORDER..h - BORDER {
        for x in BORDER..w - BORDER {
            let (t, arc) = (cfg.threshold, cfg.arc_length);
            if compass_may_pass(img, x, y, t, arc) && passes(img, x, y, t, arc) {
                scores[y * w + x] = score_unchecked(img, x, y, cfg);
            }
        }
    }
    let mut out = Vec::new();
    for y in BORDER..h - BORDER {
        for x in BORDER..w - BORDER {
            let s = scores[y * w + x];
            if s != 0 && survives_nms(&scores, w, h, x, y, cfg.nms_window) {
                out.push(Corner::new(x as u32, y as u32, s as f64, 0));
            }
        }
    }
    Ok(out)
}
