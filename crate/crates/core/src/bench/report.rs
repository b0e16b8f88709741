//! Breakdown report and its CSV / JSON / Markdown renderings.
//!
//! Every time is quantized to 3 decimals (1 µs) and every share to 3 decimals
//! when the report is built, so the three renderings carry exactly the same
//! numbers and JSON round-trips losslessly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::metrics::energy_per_frame;
use super::{BenchError, PowerModel};

/// Lower bound on the detector's share of front-end time reported for the
/// FAST baseline on embedded and workstation processors. Informational.
pub const REFERENCE_DETECTION_SHARE: f64 = 0.66;

pub const STAGE_NAMES: [&str; 3] = ["pre-processing", "feature detection", "optical flow"];

fn q3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub index: usize,
    pub timestamp_ns: u64,
    pub warmup: bool,
    pub preprocess_ms: f64,
    pub detection_ms: f64,
    pub flow_ms: f64,
    pub total_ms: f64,
    pub corners: usize,
    pub tracks_attempted: usize,
    pub tracked: usize,
}

impl FrameRecord {
    /// Record from raw stage times; times are quantized here.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        index: usize,
        timestamp_ns: u64,
        warmup: bool,
        stage_ms: [f64; 3],
        corners: usize,
        tracks_attempted: usize,
        tracked: usize,
    ) -> Self {
        Self {
            index,
            timestamp_ns,
            warmup,
            preprocess_ms: q3(stage_ms[0]),
            detection_ms: q3(stage_ms[1]),
            flow_ms: q3(stage_ms[2]),
            total_ms: q3(stage_ms.iter().sum()),
            corners,
            tracks_attempted,
            tracked,
        }
    }

    fn stage_ms(&self) -> [f64; 3] {
        [self.preprocess_ms, self.detection_ms, self.flow_ms]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage: String,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergySummary {
    pub label: String,
    pub processor_w: f64,
    pub accelerator_w: f64,
    pub total_w: f64,
    /// Accelerator power × mean detection time.
    pub detection_mj_per_frame: f64,
    /// Total power × mean front-end time.
    pub frontend_mj_per_frame: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakdownReport {
    pub detector: String,
    pub frames: usize,
    pub warmup_frames: usize,
    pub timed_frames: usize,
    pub repetitions: usize,
    pub stages: Vec<StageSummary>,
    pub total_mean_ms: f64,
    pub total_median_ms: f64,
    /// Frames per second over the timed (post-warmup) frames.
    pub fps_steady: f64,
    /// Frames per second over every frame, warmup included.
    pub fps_aggregate: f64,
    pub detection_share: f64,
    pub reference_detection_share: f64,
    pub detection_share_at_least_reference: bool,
    pub mean_corners: f64,
    pub mean_tracked: f64,
    pub energy: Option<EnergySummary>,
    pub per_frame: Vec<FrameRecord>,
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

impl BreakdownReport {
    /// Aggregates per-frame records. Frames flagged `warmup` count toward
    /// `fps_aggregate` only.
    pub fn build(
        detector: &str,
        repetitions: usize,
        per_frame: Vec<FrameRecord>,
        power: Option<&PowerModel>,
    ) -> Result<Self, BenchError> {
        if per_frame.is_empty() {
            return Err(BenchError::EmptySequence);
        }
        let timed: Vec<&FrameRecord> = per_frame.iter().filter(|f| !f.warmup).collect();
        if timed.is_empty() {
            return Err(BenchError::InvalidConfig("every frame is a warmup frame".into()));
        }
        let n = timed.len() as f64;
        let mut means = [0.0f64; 3];
        for f in &timed {
            for (m, v) in means.iter_mut().zip(f.stage_ms()) {
                *m += v / n;
            }
        }
        let total_raw: f64 = means.iter().sum();
        let shares: [f64; 3] = if total_raw > 0.0 { means.map(|m| m / total_raw) } else { [0.0, 1.0, 0.0] };
        let stages = (0..3)
            .map(|s| {
                let mut col: Vec<f64> = timed.iter().map(|f| f.stage_ms()[s]).collect();
                StageSummary {
                    stage: STAGE_NAMES[s].to_string(),
                    mean_ms: q3(means[s]),
                    median_ms: q3(median(&mut col)),
                    share: q3(shares[s]),
                }
            })
            .collect();
        let mut totals: Vec<f64> = timed.iter().map(|f| f.total_ms).collect();
        let total_median = median(&mut totals);
        let all_total: f64 = per_frame.iter().map(|f| f.total_ms).sum();
        let fps = |frames: usize, ms: f64| if ms > 0.0 { q3(frames as f64 * 1000.0 / ms) } else { 0.0 };

        let total_mean_ms = q3(total_raw);
        let detection_ms = q3(means[1]);
        let energy = match power {
            None => None,
            Some(p) => {
                p.validate()?;
                let model = |w: f64, ms: f64| if ms > 0.0 { energy_per_frame(w, ms).map(q3) } else { Ok(0.0) };
                Some(EnergySummary {
                    label: p.label.clone(),
                    processor_w: p.processor_w,
                    accelerator_w: p.accelerator_w,
                    total_w: p.total_w,
                    detection_mj_per_frame: model(p.accelerator_w, detection_ms)?,
                    frontend_mj_per_frame: model(p.total_w, total_mean_ms)?,
                })
            }
        };
        let detection_share = q3(shares[1]);
        Ok(Self {
            detector: detector.to_string(),
            frames: per_frame.len(),
            warmup_frames: per_frame.len() - timed.len(),
            timed_frames: timed.len(),
            repetitions,
            stages,
            total_mean_ms,
            total_median_ms: q3(total_median),
            fps_steady: fps(1, total_raw),
            fps_aggregate: fps(per_frame.len(), all_total),
            detection_share,
            reference_detection_share: REFERENCE_DETECTION_SHARE,
            detection_share_at_least_reference: detection_share >= REFERENCE_DETECTION_SHARE,
            mean_corners: q3(timed.iter().map(|f| f.corners as f64).sum::<f64>() / n),
            mean_tracked: q3(timed.iter().map(|f| f.tracked as f64).sum::<f64>() / n),
            energy,
            per_frame,
        })
    }

    pub fn stage(&self, name: &str) -> Option<&StageSummary> {
        self.stages.iter().find(|s| s.stage == name)
    }

    /// Corner counts per frame, in frame order.
    pub fn corner_counts(&self) -> Vec<usize> {
        self.per_frame.iter().map(|f| f.corners).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "markdown" | "md" => Ok(Self::Markdown),
            _ => Err(BenchError::InvalidConfig(format!("unknown report format {s:?}"))),
        }
    }
}

fn csv_rows(r: &BreakdownReport) -> Vec<(String, String)> {
    let mut rows = vec![
        ("detector".to_string(), r.detector.clone()),
        ("frames".into(), r.frames.to_string()),
        ("warmup_frames".into(), r.warmup_frames.to_string()),
        ("timed_frames".into(), r.timed_frames.to_string()),
        ("repetitions".into(), r.repetitions.to_string()),
    ];
    for s in &r.stages {
        let key = s.stage.replace([' ', '-'], "_");
        rows.push((format!("{key}_mean_ms"), format!("{:.3}", s.mean_ms)));
        rows.push((format!("{key}_median_ms"), format!("{:.3}", s.median_ms)));
        rows.push((format!("{key}_share"), format!("{:.3}", s.share)));
    }
    rows.extend([
        ("total_mean_ms".to_string(), format!("{:.3}", r.total_mean_ms)),
        ("total_median_ms".into(), format!("{:.3}", r.total_median_ms)),
        ("fps_steady".into(), format!("{:.3}", r.fps_steady)),
        ("fps_aggregate".into(), format!("{:.3}", r.fps_aggregate)),
        ("detection_share".into(), format!("{:.3}", r.detection_share)),
        ("reference_detection_share".into(), format!("{:.3}", r.reference_detection_share)),
        ("detection_share_at_least_reference".into(), r.detection_share_at_least_reference.to_string()),
        ("mean_corners".into(), format!("{:.3}", r.mean_corners)),
        ("mean_tracked".into(), format!("{:.3}", r.mean_tracked)),
    ]);
    if let Some(e) = &r.energy {
        rows.extend([
            ("power_label".to_string(), e.label.replace(',', ";")),
            ("processor_w".into(), format!("{:.3}", e.processor_w)),
            ("accelerator_w".into(), format!("{:.3}", e.accelerator_w)),
            ("total_w".into(), format!("{:.3}", e.total_w)),
            ("detection_mj_per_frame".into(), format!("{:.3}", e.detection_mj_per_frame)),
            ("frontend_mj_per_frame".into(), format!("{:.3}", e.frontend_mj_per_frame)),
        ]);
    }
    rows
}

fn render_markdown(r: &BreakdownReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Front-end breakdown: {}\n", r.detector);
    let _ = writeln!(
        s,
        "{} frames ({} warmup, {} timed), {} repetitions per stage.\n",
        r.frames, r.warmup_frames, r.timed_frames, r.repetitions
    );
    let _ = writeln!(s, "| Stage | Mean (ms) | Median (ms) | Share |");
    let _ = writeln!(s, "|---|---:|---:|---:|");
    for st in &r.stages {
        let _ = writeln!(s, "| {} | {:.3} | {:.3} | {:.3} |", st.stage, st.mean_ms, st.median_ms, st.share);
    }
    let share_sum: f64 = r.stages.iter().map(|st| st.share).sum();
    let _ = writeln!(s, "| total | {:.3} | {:.3} | {:.3} |", r.total_mean_ms, r.total_median_ms, share_sum);
    let _ = writeln!(s);
    let _ = writeln!(s, "- FPS (steady state): {:.3}", r.fps_steady);
    let _ = writeln!(s, "- FPS (aggregate): {:.3}", r.fps_aggregate);
    let _ = writeln!(
        s,
        "- Detection share: {:.3} (reference lower bound {:.3}, met: {})",
        r.detection_share, r.reference_detection_share, r.detection_share_at_least_reference
    );
    let _ = writeln!(s, "- Mean corners per frame: {:.3}", r.mean_corners);
    let _ = writeln!(s, "- Mean tracked points per frame: {:.3}", r.mean_tracked);
    if let Some(e) = &r.energy {
        let _ = writeln!(
            s,
            "- Energy ({}): detection {:.3} mJ/frame at {:.3} W, front-end {:.3} mJ/frame at {:.3} W",
            e.label, e.detection_mj_per_frame, e.accelerator_w, e.frontend_mj_per_frame, e.total_w
        );
    }
    s
}

pub fn render_report(report: &BreakdownReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut s = String::from("metric,value\n");
            for (k, v) in csv_rows(report) {
                let _ = writeln!(s, "{k},{v}");
            }
            s
        }
        ReportFormat::Markdown => render_markdown(report),
    }
}

pub fn emit_report(report: &BreakdownReport, format: ReportFormat, path: impl AsRef<Path>) -> Result<(), BenchError> {
    fs::write(path, render_report(report, format))?;
    Ok(())
}

/// Reads the `metric,value` CSV rendering back into a map.
pub fn parse_report_csv(text: &str) -> Result<BTreeMap<String, String>, BenchError> {
    let mut lines = text.lines();
    if lines.next() != Some("metric,value") {
        return Err(BenchError::InvalidConfig("report CSV lacks `metric,value` header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split_once(',')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| BenchError::InvalidConfig(format!("bad report row {l:?}")))
        })
        .collect()
}
