//! Pyramidal sparse Lucas-Kanade tracking.
//!
//! Each point is refined coarse to fine. At every level the template window
//! and its gradients are sampled from the previous frame, and the 2x2 normal
//! equations `G δ = Σ ∇T (T − J)` are solved iteratively against the next
//! frame. Sampling is bilinear with edge clamping.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::{Image, Pyramid};

#[derive(Debug, Error, PartialEq)]
pub enum FlowError {
    #[error("previous and next pyramids differ in level count or level dimensions")]
    PyramidMismatch,
    #[error("window must be odd and at least 5 (got {0})")]
    InvalidWindow(usize),
    #[error("invalid tracker parameters: {0}")]
    InvalidParams(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LkParams {
    /// Side of the square integration window, odd.
    pub window: usize,
    pub max_iters: usize,
    /// Convergence threshold on the update norm, in pixels of the current level.
    pub eps: f32,
    /// A point is lost when the smallest eigenvalue of `G` falls below
    /// `min_eigen_factor × window area`. With intensities in 0..=255 and
    /// derivatives in intensity per pixel, 1e-4 only rejects windows that are
    /// flat to within quantization noise.
    pub min_eigen_factor: f32,
}

impl Default for LkParams {
    fn default() -> Self {
        Self { window: 21, max_iters: 30, eps: 0.01, min_eigen_factor: 1e-4 }
    }
}

impl LkParams {
    pub fn validate(&self) -> Result<(), FlowError> {
        if self.window < 5 || self.window.is_multiple_of(2) {
            return Err(FlowError::InvalidWindow(self.window));
        }
        if self.max_iters == 0 {
            return Err(FlowError::InvalidParams("max_iters must be positive".into()));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(FlowError::InvalidParams(format!("eps {} must be positive", self.eps)));
        }
        if self.min_eigen_factor.is_nan() || self.min_eigen_factor < 0.0 {
            return Err(FlowError::InvalidParams("min_eigen_factor must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackStatus {
    Tracked,
    Lost,
}

impl TrackStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TrackStatus::Tracked => "tracked",
            TrackStatus::Lost => "lost",
        }
    }
}

/// Result for one input point. Lost points keep their input coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub x: f32,
    pub y: f32,
    pub status: TrackStatus,
    /// Mean absolute intensity difference over the window at the final position.
    pub residual: f32,
}

impl TrackPoint {
    pub fn is_tracked(&self) -> bool {
        self.status == TrackStatus::Tracked
    }
}

/// Float plane with clamped bilinear sampling.
struct Plane {
    w: usize,
    h: usize,
    data: Vec<f32>,
}

impl Plane {
    fn from_image(img: &Image) -> Self {
        Self { w: img.width(), h: img.height(), data: img.data().iter().map(|&v| v as f32).collect() }
    }

    #[inline]
    fn at(&self, x: isize, y: isize) -> f32 {
        let x = x.clamp(0, self.w as isize - 1) as usize;
        let y = y.clamp(0, self.h as isize - 1) as usize;
        self.data[y * self.w + x]
    }

    /// Bilinear samples of the `(2 half + 1)^2` window centred on `(x, y)`,
    /// row-major into `out`. Every tap shares the same weights.
    fn sample_window(&self, x: f32, y: f32, half: isize, out: &mut Vec<f32>) {
        out.clear();
        let x0 = x.floor();
        let y0 = y.floor();
        let (fx, fy) = (x - x0, y - y0);
        let (xi, yi) = (x0 as isize, y0 as isize);
        let (w00, w10, w01, w11) = ((1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy);
        let inside =
            xi - half >= 0 && yi - half >= 0 && xi + half + 1 < self.w as isize && yi + half + 1 < self.h as isize;
        if inside {
            for dy in -half..=half {
                let r0 = ((yi + dy) as usize) * self.w;
                let r1 = r0 + self.w;
                let c = (xi - half) as usize;
                let span = (2 * half + 1) as usize;
                let (a, b) = (&self.data[r0 + c..r0 + c + span + 1], &self.data[r1 + c..r1 + c + span + 1]);
                for k in 0..span {
                    out.push(a[k] * w00 + a[k + 1] * w10 + b[k] * w01 + b[k + 1] * w11);
                }
            }
        } else {
            for dy in -half..=half {
                for dx in -half..=half {
                    let (sx, sy) = (xi + dx, yi + dy);
                    out.push(
                        self.at(sx, sy) * w00
                            + self.at(sx + 1, sy) * w10
                            + self.at(sx, sy + 1) * w01
                            + self.at(sx + 1, sy + 1) * w11,
                    );
                }
            }
        }
    }
}

struct Level {
    prev: Plane,
    next: Plane,
    gx: Plane,
    gy: Plane,
}

impl Level {
    fn new(prev: &Image, next: &Image) -> Self {
        let (w, h) = (prev.width(), prev.height());
        let mut gx = vec![0f32; w * h];
        let mut gy = vec![0f32; w * h];
        // 3x3 Sobel divided by its gain of 8; the one-pixel border replicates
        // the nearest interior derivative.
        if w >= 3 && h >= 3 {
            let d = prev.data();
            let p = |x: usize, y: usize| d[y * w + x] as i32;
            for y in 1..h - 1 {
                for x in 1..w - 1 {
                    let sx = (p(x + 1, y - 1) - p(x - 1, y - 1))
                        + 2 * (p(x + 1, y) - p(x - 1, y))
                        + (p(x + 1, y + 1) - p(x - 1, y + 1));
                    let sy = (p(x - 1, y + 1) - p(x - 1, y - 1))
                        + 2 * (p(x, y + 1) - p(x, y - 1))
                        + (p(x + 1, y + 1) - p(x + 1, y - 1));
                    gx[y * w + x] = sx as f32 * 0.125;
                    gy[y * w + x] = sy as f32 * 0.125;
                }
            }
            for g in [&mut gx, &mut gy] {
                for y in 1..h - 1 {
                    g[y * w] = g[y * w + 1];
                    g[y * w + w - 1] = g[y * w + w - 2];
                }
                g.copy_within(w..2 * w, 0);
                g.copy_within((h - 2) * w..(h - 1) * w, (h - 1) * w);
            }
        }
        Self {
            prev: Plane::from_image(prev),
            next: Plane::from_image(next),
            gx: Plane { w, h, data: gx },
            gy: Plane { w, h, data: gy },
        }
    }
}

enum LevelOutcome {
    Converged(f32, f32),
    Exhausted(f32, f32),
    Singular,
}

fn to_level(v: f32, level: usize) -> f32 {
    (v + 0.5) / (1u32 << level) as f32 - 0.5
}

fn refine(level: &Level, px: f32, py: f32, guess: (f32, f32), params: &LkParams, buf: &mut Scratch) -> LevelOutcome {
    let half = (params.window / 2) as isize;
    let n = params.window * params.window;
    level.prev.sample_window(px, py, half, &mut buf.tmpl);
    level.gx.sample_window(px, py, half, &mut buf.ix);
    level.gy.sample_window(px, py, half, &mut buf.iy);
    let (mut gxx, mut gxy, mut gyy) = (0f64, 0f64, 0f64);
    for (&gx, &gy) in buf.ix.iter().zip(&buf.iy) {
        gxx += (gx * gx) as f64;
        gxy += (gx * gy) as f64;
        gyy += (gy * gy) as f64;
    }
    let det = gxx * gyy - gxy * gxy;
    let min_eig = 0.5 * (gxx + gyy - ((gxx - gyy).powi(2) + 4.0 * gxy * gxy).sqrt());
    if min_eig < params.min_eigen_factor as f64 * n as f64 || det <= 0.0 {
        return LevelOutcome::Singular;
    }

    let (mut vx, mut vy) = guess;
    for _ in 0..params.max_iters {
        level.next.sample_window(px + vx, py + vy, half, &mut buf.warped);
        let (mut bx, mut by) = (0f64, 0f64);
        for k in 0..n {
            let e = (buf.tmpl[k] - buf.warped[k]) as f64;
            bx += e * buf.ix[k] as f64;
            by += e * buf.iy[k] as f64;
        }
        let ddx = ((gyy * bx - gxy * by) / det) as f32;
        let ddy = ((gxx * by - gxy * bx) / det) as f32;
        if !(ddx.is_finite() && ddy.is_finite()) {
            return LevelOutcome::Singular;
        }
        vx += ddx;
        vy += ddy;
        if (ddx * ddx + ddy * ddy).sqrt() < params.eps {
            return LevelOutcome::Converged(vx, vy);
        }
    }
    LevelOutcome::Exhausted(vx, vy)
}

#[derive(Default)]
struct Scratch {
    tmpl: Vec<f32>,
    ix: Vec<f32>,
    iy: Vec<f32>,
    warped: Vec<f32>,
}

fn residual(level: &Level, px: f32, py: f32, qx: f32, qy: f32, half: isize, buf: &mut Scratch) -> f32 {
    level.prev.sample_window(px, py, half, &mut buf.tmpl);
    level.next.sample_window(qx, qy, half, &mut buf.warped);
    let sum: f64 = buf.tmpl.iter().zip(&buf.warped).map(|(t, j)| (t - j).abs() as f64).sum();
    (sum / buf.tmpl.len() as f64) as f32
}

fn window_inside(x: f32, y: f32, half: f32, w: usize, h: usize) -> bool {
    x.is_finite()
        && y.is_finite()
        && x - half >= 0.0
        && y - half >= 0.0
        && x + half <= (w - 1) as f32
        && y + half <= (h - 1) as f32
}

/// Tracks `points` (level-0 coordinates) from `prev` into `next`.
///
/// A point is lost when its window leaves the level-0 image (before or after
/// tracking), when `G` is near-singular at level 0, or when level 0 runs
/// out of iterations before the update drops below `eps`. Pyramid levels
/// smaller than the window are skipped. Output order
/// matches input order; an empty input yields an empty output.
pub fn track_lk(
    prev: &Pyramid,
    next: &Pyramid,
    points: &[(f32, f32)],
    params: &LkParams,
) -> Result<Vec<TrackPoint>, FlowError> {
    params.validate()?;
    if !prev.same_geometry(next) {
        return Err(FlowError::PyramidMismatch);
    }
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let levels: Vec<Level> = prev
        .levels()
        .iter()
        .zip(next.levels())
        // Levels smaller than the window carry no usable motion estimate.
        .take_while(|(p, _)| p.width() >= params.window && p.height() >= params.window)
        .map(|(p, n)| Level::new(p, n))
        .collect();
    let (w, h) = (prev.base().width(), prev.base().height());
    let half = (params.window / 2) as f32;

    let lost = |x: f32, y: f32| TrackPoint { x, y, status: TrackStatus::Lost, residual: 0.0 };
    let mut out = Vec::with_capacity(points.len());
    let mut scratch = Scratch::default();
    'points: for &(x, y) in points {
        if !window_inside(x, y, half, w, h) {
            out.push(lost(x, y));
            continue;
        }
        let mut guess = (0f32, 0f32);
        for (li, level) in levels.iter().enumerate().rev() {
            let (px, py) = (to_level(x, li), to_level(y, li));
            match refine(level, px, py, guess, params, &mut scratch) {
                LevelOutcome::Singular if li == 0 => {
                    out.push(lost(x, y));
                    continue 'points;
                }
                // A flat coarse level contributes no update.
                LevelOutcome::Singular => guess = (2.0 * guess.0, 2.0 * guess.1),
                LevelOutcome::Exhausted(..) if li == 0 => {
                    out.push(lost(x, y));
                    continue 'points;
                }
                LevelOutcome::Converged(vx, vy) | LevelOutcome::Exhausted(vx, vy) => {
                    guess = if li == 0 { (vx, vy) } else { (2.0 * vx, 2.0 * vy) };
                }
            }
        }
        let (qx, qy) = (x + guess.0, y + guess.1);
        if !window_inside(qx, qy, half, w, h) {
            out.push(lost(x, y));
            continue;
        }
        let r = residual(&levels[0], x, y, qx, qy, half as isize, &mut scratch);
        out.push(TrackPoint { x: qx, y: qy, status: TrackStatus::Tracked, residual: r });
    }
    Ok(out)
}

pub const CSV_HEADER: &str = "idx,x,y,status,residual";

pub fn tracks_to_csv(tracks: &[TrackPoint]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for (i, t) in tracks.iter().enumerate() {
        s.push_str(&format!("{i},{:.4},{:.4},{},{:.4}\n", t.x, t.y, t.status.as_str(), t.residual));
    }
    s
}
