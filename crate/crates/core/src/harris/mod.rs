//! Harris corner detection.
//!
//! The float tier computes Sobel gradients, box-weighted structure tensors
//! and the response `R = det(M) - k * trace(M)^2`. Tensor entries are exact
//! integer sums, so only the response itself is subject to rounding. The
//! fixed-point tier in [`fixed`] mirrors it with truncating shifts.

pub mod fixed;

pub use fixed::{detect_harris_fixed, FixedHarrisPlan, FixedPointFormat};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corner::Corner;
use crate::image::{sobel_gradients, GradientField, Image, ImageError};

#[derive(Debug, Error)]
pub enum HarrisError {
    #[error("image {width}x{height} is too small for a {sobel}x{sobel} Sobel and {block}x{block} block")]
    ImageTooSmall { width: usize, height: usize, sobel: usize, block: usize },
    #[error("block {block}x{block} does not fit the {width}x{height} gradient interior")]
    BlockTooLarge { block: usize, width: usize, height: usize },
    #[error("invalid Harris configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid fixed-point format: {0}")]
    InvalidFormat(String),
    #[error("fixed-point format overflow: {0}")]
    FormatOverflow(String),
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// Default response threshold for 7x7 Sobel, 7x7 block.
///
/// Chosen so the bundled synthetic 752x480 corpus yields roughly as many
/// Harris corners as FAST-9 at threshold 10 (see `bench::synth`). The
/// response scales with the fourth power of the gradient gain, so the value
/// only makes sense for the default kernel sizes.
pub const DEFAULT_RESPONSE_THRESHOLD: f64 = 1.0e21;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarrisConfig {
    /// Sensitivity `k` in `det - k * trace^2`.
    pub k: f64,
    /// Pixels with `R > response_threshold` become candidates.
    pub response_threshold: f64,
    pub sobel_size: usize,
    pub block_size: usize,
    /// Side of the suppression window. Only 2 (anchored top-left) and odd
    /// centred windows are supported.
    pub nms_window: usize,
}

impl Default for HarrisConfig {
    fn default() -> Self {
        Self { k: 0.04, response_threshold: DEFAULT_RESPONSE_THRESHOLD, sobel_size: 7, block_size: 7, nms_window: 2 }
    }
}

impl HarrisConfig {
    pub fn validate(&self) -> Result<(), HarrisError> {
        let bad = |m: String| Err(HarrisError::InvalidConfig(m));
        if !(self.k > 0.0 && self.k < 0.25) {
            return bad(format!("k = {} outside (0, 0.25)", self.k));
        }
        if !(self.response_threshold >= 0.0 && self.response_threshold.is_finite()) {
            return bad(format!("response_threshold = {} must be finite and >= 0", self.response_threshold));
        }
        if !matches!(self.sobel_size, 3 | 5 | 7) {
            return bad(format!("sobel_size {} not in {{3, 5, 7}}", self.sobel_size));
        }
        if self.block_size.is_multiple_of(2) {
            return bad(format!("block_size {} must be odd", self.block_size));
        }
        if self.nms_window != 2 && self.nms_window.is_multiple_of(2) {
            return bad(format!("nms_window {} must be 2 or odd", self.nms_window));
        }
        Ok(())
    }

    /// Distance from the image border to the first pixel with a response.
    pub fn margin(&self) -> usize {
        self.sobel_size / 2 + self.block_size / 2
    }
}

/// Per-pixel box sums `a = ΣIx²`, `b = ΣIxIy`, `c = ΣIy²` over the interior
/// where the whole block sees valid gradients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureTensorField {
    src_width: usize,
    src_height: usize,
    margin: usize,
    width: usize,
    height: usize,
    a: Vec<i64>,
    b: Vec<i64>,
    c: Vec<i64>,
}

impl StructureTensorField {
    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn source_width(&self) -> usize {
        self.src_width
    }

    pub fn source_height(&self) -> usize {
        self.src_height
    }

    pub fn interior_width(&self) -> usize {
        self.width
    }

    pub fn interior_height(&self) -> usize {
        self.height
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.margin && y >= self.margin && x - self.margin < self.width && y - self.margin < self.height
    }

    /// `(a, b, c)` at source coordinates, `None` in the border.
    pub fn get(&self, x: usize, y: usize) -> Option<(i64, i64, i64)> {
        self.contains(x, y).then(|| {
            let i = (y - self.margin) * self.width + (x - self.margin);
            (self.a[i], self.b[i], self.c[i])
        })
    }

    /// Interior entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (i64, i64, i64)> + '_ {
        self.a.iter().zip(&self.b).zip(&self.c).map(|((&a, &b), &c)| (a, b, c))
    }
}

/// Sliding box sums of width `k` along rows, producing `w - k + 1` values per row.
fn box_rows(src: &[i64], w: usize, h: usize, k: usize) -> Vec<i64> {
    let ow = w - k + 1;
    let mut out = vec![0i64; ow * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        let mut acc: i64 = row[..k].iter().sum();
        out[y * ow] = acc;
        for x in 1..ow {
            acc += row[x + k - 1] - row[x - 1];
            out[y * ow + x] = acc;
        }
    }
    out
}

fn box_cols(src: &[i64], w: usize, h: usize, k: usize) -> Vec<i64> {
    let oh = h - k + 1;
    let mut out = vec![0i64; w * oh];
    for x in 0..w {
        let mut acc: i64 = (0..k).map(|y| src[y * w + x]).sum();
        out[x] = acc;
        for y in 1..oh {
            acc += src[(y + k - 1) * w + x] - src[(y - 1) * w + x];
            out[y * w + x] = acc;
        }
    }
    out
}

/// Box-window structure tensor (uniform weights) over `block_size`.
pub fn structure_tensor(grads: &GradientField, block_size: usize) -> Result<StructureTensorField, HarrisError> {
    let (gw, gh) = (grads.interior_width(), grads.interior_height());
    if block_size.is_multiple_of(2) || block_size > gw || block_size > gh {
        return Err(HarrisError::BlockTooLarge { block: block_size, width: gw, height: gh });
    }
    let gx = grads.gx_interior();
    let gy = grads.gy_interior();
    let n = gw * gh;
    let mut xx = Vec::with_capacity(n);
    let mut xy = Vec::with_capacity(n);
    let mut yy = Vec::with_capacity(n);
    for i in 0..n {
        let (x, y) = (gx[i] as i64, gy[i] as i64);
        xx.push(x * x);
        xy.push(x * y);
        yy.push(y * y);
    }
    let sum = |p: &[i64]| box_cols(&box_rows(p, gw, gh, block_size), gw - block_size + 1, gh, block_size);
    Ok(StructureTensorField {
        src_width: grads.source_width(),
        src_height: grads.source_height(),
        margin: grads.margin() + block_size / 2,
        width: gw - block_size + 1,
        height: gh - block_size + 1,
        a: sum(&xx),
        b: sum(&xy),
        c: sum(&yy),
    })
}

/// Harris response over the tensor interior.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseMap {
    margin: usize,
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ResponseMap {
    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn interior_width(&self) -> usize {
        self.width
    }

    pub fn interior_height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        let m = self.margin;
        (x >= m && y >= m && x - m < self.width && y - m < self.height)
            .then(|| self.values[(y - m) * self.width + (x - m)])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Affinely rescales the interior to 0..=255 for inspection.
    pub fn to_image(&self) -> Image {
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        let data = self.values.iter().map(|v| ((v - lo) / span * 255.0).round() as u8).collect();
        Image::new(self.width, self.height, data).expect("non-empty interior")
    }
}

/// `R = (a·c − b²) − k·((a + c)·(a + c))`, evaluated in exactly this order.
#[inline]
pub fn response_value(a: f64, b: f64, c: f64, k: f64) -> f64 {
    let det = a * c - b * b;
    let trace = a + c;
    det - k * (trace * trace)
}

pub fn harris_response(tensor: &StructureTensorField, k: f64) -> ResponseMap {
    let values = tensor.entries().map(|(a, b, c)| response_value(a as f64, b as f64, c as f64, k)).collect();
    ResponseMap { margin: tensor.margin, width: tensor.width, height: tensor.height, values }
}

/// Non-maxima suppression over a response grid, `None` = not a candidate.
///
/// A window of 2 is anchored top-left: a candidate is dropped iff its right,
/// lower or lower-right neighbour is a candidate with a strictly greater
/// value. Odd windows are centred. Returns surviving interior indices in
/// row-major order.
pub(crate) fn suppress<T: PartialOrd + Copy>(values: &[Option<T>], w: usize, h: usize, window: usize) -> Vec<usize> {
    let beats = |i: usize, own: T| values[i].is_some_and(|v| v > own);
    let mut keep = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let Some(own) = values[y * w + x] else { continue };
            let beaten = if window == 2 {
                (x + 1 < w && beats(y * w + x + 1, own))
                    || (y + 1 < h && beats((y + 1) * w + x, own))
                    || (x + 1 < w && y + 1 < h && beats((y + 1) * w + x + 1, own))
            } else {
                let r = window / 2;
                let (x0, x1) = (x.saturating_sub(r), (x + r).min(w - 1));
                let (y0, y1) = (y.saturating_sub(r), (y + r).min(h - 1));
                (y0..=y1).any(|ny| (x0..=x1).any(|nx| beats(ny * w + nx, own)))
            };
            if !beaten {
                keep.push(y * w + x);
            }
        }
    }
    keep
}

pub(crate) fn check_size(img: &Image, cfg: &HarrisConfig) -> Result<(), HarrisError> {
    let need = cfg.sobel_size + cfg.block_size - 1;
    if img.width() < need || img.height() < need {
        return Err(HarrisError::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            sobel: cfg.sobel_size,
            block: cfg.block_size,
        });
    }
    Ok(())
}

pub(crate) fn tensor_for(img: &Image, cfg: &HarrisConfig) -> Result<StructureTensorField, HarrisError> {
    cfg.validate()?;
    check_size(img, cfg)?;
    let grads = sobel_gradients(img, cfg.sobel_size)?;
    structure_tensor(&grads, cfg.block_size)
}

/// Float Harris detector: threshold, then NMS. Output sorted by `(y, x)`,
/// score = `R`.
pub fn detect_harris(img: &Image, cfg: &HarrisConfig) -> Result<Vec<Corner>, HarrisError> {
    let tensor = tensor_for(img, cfg)?;
    let response = harris_response(&tensor, cfg.k);
    let candidates: Vec<Option<f64>> =
        response.values.iter().map(|&r| (r > cfg.response_threshold).then_some(r)).collect();
    let m = response.margin;
    Ok(suppress(&candidates, response.width, response.height, cfg.nms_window)
        .into_iter()
        .map(|i| {
            let (x, y) = (i % response.width + m, i / response.width + m);
            Corner::new(x as u32, y as u32, response.values[i], 0)
        })
        .collect())
}
