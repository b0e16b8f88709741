//! Measurement harness: sequence ingestion, per-stage run-time breakdown,
//! FPS, speedup, modeled energy per frame and detector agreement.

mod config;
mod metrics;
mod pipeline;
mod report;
mod sequence;
pub mod synth;

pub use config::{BlurConfig, PipelineConfig, PowerModel};
pub use metrics::{agreement, energy_per_frame, speedup, Agreement, MetricError};
pub use pipeline::{run_pipeline, run_pipeline_observed, FrameOutput, PipelineObserver, PipelineRun, Stage};
pub use report::{
    emit_report, parse_report_csv, render_report, BreakdownReport, EnergySummary, FrameRecord, ReportFormat,
    StageSummary, REFERENCE_DETECTION_SHARE,
};
pub use sequence::{load_euroc_sequence, write_euroc_sequence, Frame, SequenceSource};

use thiserror::Error;

use crate::detector::DetectError;
use crate::flow::FlowError;
use crate::image::ImageError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("missing sequence index {0}")]
    MissingIndex(String),
    #[error("unreadable frame {path}: {reason}")]
    UnreadableFrame { path: String, reason: String },
    #[error("timestamps are not strictly increasing (duplicate {0})")]
    NonMonotonicTimestamps(u64),
    #[error("malformed index line {line}: {reason}")]
    MalformedIndex { line: usize, reason: String },
    #[error("sequence has no frames")]
    EmptySequence,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
}
