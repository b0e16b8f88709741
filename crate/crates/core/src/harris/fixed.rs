//! Reduced-precision Harris.
//!
//! Tensor entries are normalized by a right shift chosen from the worst-case
//! gradient magnitude, then held in `I.F` fixed point; the response is
//! accumulated in a wider `A.F` register. Multiplication by `k` is replaced by
//! a sum of right shifts, and every narrowing step truncates toward zero.
//!
//! For the default 7x7 Sobel and 7x7 block, `|Ix| <= 255 * 20 * 64 = 326_400`,
//! so `a <= 49 * 326_400^2 < 2^43`. A 16-bit integer part (sign included)
//! needs a 28-bit normalizing shift, and `trace^2 < 2^32` fits the 48-bit
//! accumulator with room to spare. The bound holds at any image size because
//! every entry depends only on a fixed neighbourhood.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{check_size, suppress, tensor_for, HarrisConfig, HarrisError};
use crate::corner::Corner;
use crate::image::{sobel_kernels, Image};

/// Bit budget of the fixed-point tier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedPointFormat {
    /// Integer bits of tensor entries, sign included.
    pub integer_bits: u32,
    /// Fraction bits of tensor entries and the response.
    pub fraction_bits: u32,
    /// Integer bits of the response accumulator, sign included.
    pub accumulator_bits: u32,
}

impl Default for FixedPointFormat {
    fn default() -> Self {
        Self { integer_bits: 16, fraction_bits: 8, accumulator_bits: 48 }
    }
}

impl fmt::Display for FixedPointFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.integer_bits, self.fraction_bits)
    }
}

impl FromStr for FixedPointFormat {
    type Err = HarrisError;

    /// Parses `I.F`; the accumulator keeps its default width.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HarrisError::InvalidFormat(format!("expected I.F, got {s:?}"));
        let (i, f) = s.split_once('.').ok_or_else(bad)?;
        let fmt = Self {
            integer_bits: i.trim().parse().map_err(|_| bad())?,
            fraction_bits: f.trim().parse().map_err(|_| bad())?,
            ..Self::default()
        };
        fmt.validate()?;
        Ok(fmt)
    }
}

impl FixedPointFormat {
    pub fn validate(&self) -> Result<(), HarrisError> {
        let bad = |m: String| Err(HarrisError::InvalidFormat(m));
        if self.integer_bits < 2 || self.fraction_bits < 1 {
            return bad(format!("{self} needs at least 2 integer and 1 fraction bit"));
        }
        if self.integer_bits + self.fraction_bits > 32 {
            return bad(format!("tensor entries {self} exceed 32 bits"));
        }
        if self.accumulator_bits + self.fraction_bits > 64 {
            return bad(format!("accumulator {}.{} exceeds 64 bits", self.accumulator_bits, self.fraction_bits));
        }
        Ok(())
    }

    /// Quantization step `2^-F`.
    pub fn step(&self) -> f64 {
        (-(self.fraction_bits as f64)).exp2()
    }
}

/// Everything the fixed tier fixes at configuration time.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedHarrisPlan {
    pub format: FixedPointFormat,
    /// Tensor entries are divided by `2^tensor_shift` before quantization.
    pub tensor_shift: u32,
    /// `k` is approximated as `Σ 2^-e` over these exponents.
    pub k_shifts: Vec<u32>,
    /// Response threshold in accumulator units.
    pub threshold_raw: i64,
    k: f64,
    response_threshold: f64,
}

fn trunc_shift(v: i128, shift: u32) -> i128 {
    // Division truncates toward zero for either sign.
    v / (1i128 << shift)
}

impl FixedHarrisPlan {
    pub fn new(cfg: &HarrisConfig, format: FixedPointFormat) -> Result<Self, HarrisError> {
        cfg.validate()?;
        format.validate()?;
        let (smooth, deriv) = sobel_kernels(cfg.sobel_size)?;
        let gain: i64 =
            smooth.iter().map(|&v| v as i64).sum::<i64>() * deriv.iter().map(|&v| v.abs() as i64).sum::<i64>();
        let g_max = 255 * gain as i128;
        let a_max = (cfg.block_size * cfg.block_size) as i128 * g_max * g_max;

        // Smallest shift with a_max / 2^s < 2^(I-1).
        let limit = 1i128 << (format.integer_bits - 1);
        let mut tensor_shift = 0u32;
        while (a_max >> tensor_shift) >= limit {
            tensor_shift += 1;
        }

        // |R| <= trace^2 < 2^(2I); the accumulator must hold that plus sign.
        let needed = 2 * format.integer_bits + 1;
        if format.accumulator_bits < needed {
            return Err(HarrisError::FormatOverflow(format!(
                "{}-bit accumulator cannot hold responses of {format} entries (needs {needed})",
                format.accumulator_bits
            )));
        }

        let k_q = (cfg.k * (format.fraction_bits as f64).exp2()).round() as u64;
        let k_shifts = (0..format.fraction_bits)
            .filter(|&b| k_q & (1 << (format.fraction_bits - 1 - b)) != 0)
            .map(|b| b + 1)
            .collect();

        let scale = (format.fraction_bits as i32 - 2 * tensor_shift as i32) as f64;
        let thr = (cfg.response_threshold * scale.exp2()).floor();
        let acc_max = ((1u64 << (format.accumulator_bits + format.fraction_bits - 1)) - 1) as f64;
        let threshold_raw = thr.min(acc_max) as i64;

        Ok(Self { format, tensor_shift, k_shifts, threshold_raw, k: cfg.k, response_threshold: cfg.response_threshold })
    }

    /// The shift-sum value that stands in for `k`.
    pub fn k_approx(&self) -> f64 {
        self.k_shifts.iter().map(|&e| (-(e as f64)).exp2()).sum()
    }

    /// Quantizes one exact tensor entry to `I.F` raw units.
    pub fn quantize_entry(&self, v: i64) -> i64 {
        let f = self.format.fraction_bits;
        let s = self.tensor_shift;
        let v = v as i128;
        let raw = if s >= f { trunc_shift(v, s - f) } else { v << (f - s) };
        raw as i64
    }

    /// Fixed-point response in accumulator raw units (`2^-F` steps of the
    /// normalized response).
    pub fn response_raw(&self, a: i64, b: i64, c: i64) -> i64 {
        let f = self.format.fraction_bits;
        let (a, b, c) =
            (self.quantize_entry(a) as i128, self.quantize_entry(b) as i128, self.quantize_entry(c) as i128);
        let det = trunc_shift(a * c - b * b, f);
        let trace = a + c;
        let trace_sq = trunc_shift(trace * trace, f);
        let k_term: i128 = self.k_shifts.iter().map(|&e| trunc_shift(trace_sq, e)).sum();
        (det - k_term) as i64
    }

    /// Converts accumulator raw units back to the float response scale.
    pub fn raw_to_response(&self, raw: i64) -> f64 {
        let scale = 2 * self.tensor_shift as i32 - self.format.fraction_bits as i32;
        raw as f64 * (scale as f64).exp2()
    }

    /// Upper bound on `|R_fixed - R_exact|` at a pixel with exact tensor
    /// `(a, b, c)`, in float response units.
    ///
    /// With `q = 2^-F` and normalized entries `α, β, γ` (divided by
    /// `2^tensor_shift`), truncation contributes at most `q(α+γ) + q² +
    /// 2|β|q + q` to the determinant, `4q·tr + q` to the squared trace, and
    /// `q` per shift term; `k` itself is off by `|k - k̃|`. The sum is scaled
    /// back by `2^(2·tensor_shift)`.
    pub fn error_bound(&self, a: i64, b: i64, c: i64) -> f64 {
        let q = self.format.step();
        let norm = (-(self.tensor_shift as f64)).exp2();
        let (alpha, beta, gamma) = (a as f64 * norm, (b as f64 * norm).abs(), c as f64 * norm);
        let tr = alpha + gamma;
        let k_approx = self.k_approx();
        let det_err = q * tr + q * q + 2.0 * beta * q + q;
        let k_err =
            self.k_shifts.len() as f64 * q + k_approx * (4.0 * q * tr + q) + (self.k - k_approx).abs() * tr * tr;
        (det_err + k_err) * (2.0 * self.tensor_shift as f64).exp2()
    }

    /// Relative slack `δ` such that every emitted corner satisfies
    /// `R_exact > threshold · (1 − δ)`.
    pub fn relative_error_bound(&self, a: i64, b: i64, c: i64) -> f64 {
        if self.response_threshold > 0.0 {
            self.error_bound(a, b, c) / self.response_threshold
        } else {
            f64::INFINITY
        }
    }
}

/// Fixed-point Harris. Output has the same shape as
/// [`detect_harris`](super::detect_harris), with scores converted back to the
/// float response scale.
pub fn detect_harris_fixed(
    img: &Image,
    cfg: &HarrisConfig,
    format: FixedPointFormat,
) -> Result<Vec<Corner>, HarrisError> {
    let plan = FixedHarrisPlan::new(cfg, format)?;
    check_size(img, cfg)?;
    let tensor = tensor_for(img, cfg)?;
    let (w, h) = (tensor.interior_width(), tensor.interior_height());
    let raw: Vec<i64> = tensor.entries().map(|(a, b, c)| plan.response_raw(a, b, c)).collect();
    let candidates: Vec<Option<i64>> = raw.iter().map(|&r| (r > plan.threshold_raw).then_some(r)).collect();
    let m = tensor.margin();
    Ok(suppress(&candidates, w, h, cfg.nms_window)
        .into_iter()
        .map(|i| Corner::new((i % w + m) as u32, (i / w + m) as u32, plan.raw_to_response(raw[i]), 0))
        .collect())
}
