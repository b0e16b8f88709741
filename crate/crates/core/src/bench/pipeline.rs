//! Timed front-end loop: pre-processing, detection, optical flow.

use std::time::Instant;

use super::report::{BreakdownReport, FrameRecord};
use super::{BenchError, PipelineConfig, PowerModel, SequenceSource};
use crate::corner::Corner;
use crate::flow::{track_lk, TrackPoint};
use crate::image::{build_pyramid, gaussian_blur, Image, Pyramid};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Preprocess,
    Detection,
    Flow,
}

/// Hooks called around every timed stage. `at` is the clock reading that
/// opens (or closes) the measured interval.
pub trait PipelineObserver {
    fn stage_started(&mut self, _frame: usize, _stage: Stage, _at: Instant) {}
    fn stage_finished(&mut self, _frame: usize, _stage: Stage, _at: Instant) {}
}

struct NoObserver;

impl PipelineObserver for NoObserver {}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameOutput {
    pub timestamp_ns: u64,
    /// Corners over every pyramid level, sorted by `(level, y, x)`.
    pub corners: Vec<Corner>,
    /// Tracks of the previous frame's strongest corners into this frame.
    pub tracks: Vec<TrackPoint>,
}

#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub report: BreakdownReport,
    pub frames: Vec<FrameOutput>,
}

fn median_ms(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    }
}

/// Runs `f` `reps` times and returns the last result with the median time.
fn timed<T, E>(
    reps: usize,
    frame: usize,
    stage: Stage,
    obs: &mut dyn PipelineObserver,
    mut f: impl FnMut() -> Result<T, E>,
) -> Result<(T, f64), E> {
    let mut samples = Vec::with_capacity(reps);
    let mut out = None;
    for _ in 0..reps {
        let start = Instant::now();
        obs.stage_started(frame, stage, start);
        let r = f()?;
        let end = Instant::now();
        obs.stage_finished(frame, stage, end);
        samples.push(end.duration_since(start).as_secs_f64() * 1e3);
        out = Some(r);
    }
    Ok((out.expect("reps >= 1"), median_ms(&mut samples)))
}

fn preprocess(img: &Image, cfg: &PipelineConfig) -> Result<Pyramid, BenchError> {
    let base = if cfg.blur.enabled { gaussian_blur(img, cfg.blur.ksize, cfg.blur.sigma)? } else { img.clone() };
    Ok(build_pyramid(&base, cfg.pyramid_levels)?)
}

/// Strongest `max` corners mapped to level-0 coordinates.
fn seeds(corners: &[Corner], max: usize) -> Vec<(f32, f32)> {
    let mut order: Vec<&Corner> = corners.iter().collect();
    order.sort_by(|a, b| b.score.total_cmp(&a.score).then((a.level, a.y, a.x).cmp(&(b.level, b.y, b.x))));
    order
        .into_iter()
        .take(max)
        .map(|c| {
            let s = (1u32 << c.level) as f32;
            ((c.x as f32 + 0.5) * s - 0.5, (c.y as f32 + 0.5) * s - 0.5)
        })
        .collect()
}

pub fn run_pipeline(
    seq: &SequenceSource,
    cfg: &PipelineConfig,
    power: Option<&PowerModel>,
) -> Result<PipelineRun, BenchError> {
    run_pipeline_observed(seq, cfg, power, &mut NoObserver)
}

/// Processes every frame of a preloaded sequence. Each stage is repeated
/// `cfg.repetitions` times and its median time recorded; the first
/// `cfg.warmup` frames (at most all but one) run once and are excluded from
/// the steady-state figures.
pub fn run_pipeline_observed(
    seq: &SequenceSource,
    cfg: &PipelineConfig,
    power: Option<&PowerModel>,
    obs: &mut dyn PipelineObserver,
) -> Result<PipelineRun, BenchError> {
    cfg.validate()?;
    if seq.is_empty() {
        return Err(BenchError::EmptySequence);
    }
    let warmup = cfg.warmup.min(seq.len() - 1);
    let mut records = Vec::with_capacity(seq.len());
    let mut outputs: Vec<FrameOutput> = Vec::with_capacity(seq.len());
    let mut prev: Option<Pyramid> = None;

    for (i, frame) in seq.frames().iter().enumerate() {
        let is_warmup = i < warmup;
        let reps = if is_warmup { 1 } else { cfg.repetitions };
        let (pyr, pre_ms) = timed(reps, i, Stage::Preprocess, obs, || preprocess(&frame.image, cfg))?;
        let (corners, det_ms) = timed(reps, i, Stage::Detection, obs, || cfg.detection.detect_pyramid(&pyr))?;
        let points = match outputs.last() {
            Some(last) => seeds(&last.corners, cfg.max_tracks),
            None => Vec::new(),
        };
        let (tracks, flow_ms) = match &prev {
            Some(p) => timed(reps, i, Stage::Flow, obs, || track_lk(p, &pyr, &points, &cfg.flow))?,
            None => (Vec::new(), 0.0),
        };
        let tracked = tracks.iter().filter(|t| t.is_tracked()).count();
        records.push(FrameRecord::new(
            i,
            frame.timestamp_ns,
            is_warmup,
            [pre_ms, det_ms, flow_ms],
            corners.len(),
            points.len(),
            tracked,
        ));
        outputs.push(FrameOutput { timestamp_ns: frame.timestamp_ns, corners, tracks });
        prev = Some(pyr);
    }

    let report = BreakdownReport::build(cfg.detection.detector.as_str(), cfg.repetitions, records, power)?;
    Ok(PipelineRun { report, frames: outputs })
}
