use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corner::Corner;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("time must be positive and finite (got {0} ms)")]
    NonPositiveTime(f64),
    #[error("power must be non-negative and finite (got {0} W)")]
    NegativePower(f64),
    #[error("match radius must be non-negative (got {0})")]
    NegativeRadius(f64),
}

fn check_time(ms: f64) -> Result<(), MetricError> {
    if ms > 0.0 && ms.is_finite() {
        Ok(())
    } else {
        Err(MetricError::NonPositiveTime(ms))
    }
}

/// `baseline_ms / candidate_ms`.
pub fn speedup(baseline_ms: f64, candidate_ms: f64) -> Result<f64, MetricError> {
    check_time(baseline_ms)?;
    check_time(candidate_ms)?;
    Ok(baseline_ms / candidate_ms)
}

/// Modeled energy in millijoules: W × ms = mJ.
pub fn energy_per_frame(power_w: f64, frame_time_ms: f64) -> Result<f64, MetricError> {
    if !(power_w >= 0.0 && power_w.is_finite()) {
        return Err(MetricError::NegativePower(power_w));
    }
    check_time(frame_time_ms)?;
    Ok(power_w * frame_time_ms)
}

/// Matching statistics between a reference list and a candidate list.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub matched: usize,
    pub reference_count: usize,
    pub candidate_count: usize,
    /// `matched / candidate_count`, 1 when the candidate list is empty.
    pub precision: f64,
    /// `matched / reference_count`, 1 when the reference list is empty.
    pub recall: f64,
    /// Mean distance of matched pairs, 0 without matches.
    pub mean_offset: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Greedy mutual-nearest matching within `radius` pixels.
///
/// Pairs on the same pyramid level are accepted in order of increasing
/// distance, ties broken by the reference corner's `(y, x)` and then the
/// candidate's; each corner is used at most once.
pub fn agreement(reference: &[Corner], candidate: &[Corner], radius: f64) -> Result<Agreement, MetricError> {
    if radius.is_nan() || radius < 0.0 {
        return Err(MetricError::NegativeRadius(radius));
    }
    let cell = radius.ceil().max(1.0) as i64;
    let key = |c: &Corner| (c.level, c.x as i64 / cell, c.y as i64 / cell);
    let mut grid: HashMap<(u32, i64, i64), Vec<usize>> = HashMap::new();
    for (j, c) in candidate.iter().enumerate() {
        grid.entry(key(c)).or_default().push(j);
    }

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, a) in reference.iter().enumerate() {
        let (level, cx, cy) = key(a);
        for gy in cy - 1..=cy + 1 {
            for gx in cx - 1..=cx + 1 {
                let Some(bucket) = grid.get(&(level, gx, gy)) else { continue };
                for &j in bucket {
                    let b = &candidate[j];
                    let d = ((a.x as f64 - b.x as f64).powi(2) + (a.y as f64 - b.y as f64).powi(2)).sqrt();
                    if d <= radius {
                        pairs.push((d, i, j));
                    }
                }
            }
        }
    }
    let order = |c: &Corner| (c.y, c.x);
    pairs.sort_by(|p, q| {
        p.0.total_cmp(&q.0)
            .then_with(|| order(&reference[p.1]).cmp(&order(&reference[q.1])))
            .then_with(|| order(&candidate[p.2]).cmp(&order(&candidate[q.2])))
    });

    let mut used_a = vec![false; reference.len()];
    let mut used_b = vec![false; candidate.len()];
    let mut matched = 0usize;
    let mut total = 0.0f64;
    for (d, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            matched += 1;
            total += d;
        }
    }
    Ok(Agreement {
        matched,
        reference_count: reference.len(),
        candidate_count: candidate.len(),
        precision: ratio(matched, candidate.len()),
        recall: ratio(matched, reference.len()),
        mean_offset: if matched == 0 { 0.0 } else { total / matched as f64 },
    })
}
