//! `featfront` command line.
//!
//! Exit codes: 0 success, 2 bad arguments or configuration, 3 I/O or input
//! decoding failure, 4 detector / tracker failure. Data goes to standard
//! output (or `--out`), diagnostics to standard error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bench::synth::{synth_sequence, SynthParams};
use crate::bench::{
    agreement, load_euroc_sequence, render_report, run_pipeline, write_euroc_sequence, Agreement, BenchError,
    PipelineConfig, PowerModel, ReportFormat, SequenceSource,
};
use crate::corner::{corners_to_csv, Corner};
use crate::detector::{DetectError, DetectorKind, DetectorSettings};
use crate::fast::{FastError, MAX_THRESHOLD};
use crate::flow::FlowError;
use crate::harris::{FixedPointFormat, HarrisError};
use crate::image::{build_pyramid, gaussian_blur, load_pgm, save_pgm, Image, ImageError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DETECTOR: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "featfront", version, about = "Sparse-feature front-end: detection, tracking, profiling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect corners in one PGM image and write them as CSV.
    Detect(DetectCmd),
    /// Run the timed front-end over an EuRoC-style sequence.
    Bench(BenchCmd),
    /// Agreement between two detectors on an image or a sequence.
    Compare(CompareCmd),
    /// Write the 2x2 box-average pyramid of an image as PGM files.
    Pyramid(PyramidCmd),
    /// Generate the seeded synthetic sequence.
    Synth(SynthCmd),
}

/// Detector overrides shared by several subcommands.
#[derive(Debug, Args, Clone, Default)]
pub struct DetectorFlags {
    /// fast, fast_batch, harris or harris_fixed.
    #[arg(long)]
    pub detector: Option<DetectorKind>,
    /// FAST intensity threshold (integer) or Harris response threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Pixels per step for fast_batch (1, 4, 8 or 16).
    #[arg(long)]
    pub lanes: Option<usize>,
    /// Fixed-point format `I.F` for harris_fixed.
    #[arg(long)]
    pub fmt: Option<FixedPointFormat>,
}

#[derive(Debug, Args)]
pub struct DetectCmd {
    pub image: PathBuf,
    #[command(flatten)]
    pub detector: DetectorFlags,
    /// TOML detector settings (same keys as the `[detection]` table).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Pyramid levels to detect on.
    #[arg(long, default_value_t = 1)]
    pub levels: usize,
    /// Gaussian-blur the image (5x5, sigma 1) before detection.
    #[arg(long)]
    pub blur: bool,
    /// Corner CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchCmd {
    /// Sequence root containing `mav0/cam0/data.csv`.
    pub sequence: PathBuf,
    #[arg(long)]
    pub pipeline_config: Option<PathBuf>,
    /// Power figures used to model energy per frame.
    #[arg(long)]
    pub power_config: Option<PathBuf>,
    #[command(flatten)]
    pub detector: DetectorFlags,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub blur: bool,
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub warmup: Option<usize>,
    /// csv, json or markdown.
    #[arg(long, default_value = "json")]
    pub format: String,
    /// Report destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write every frame's corners as `frame,x,y,score,level` CSV.
    #[arg(long)]
    pub corners_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareCmd {
    /// A PGM image or a sequence root.
    pub input: PathBuf,
    #[arg(long)]
    pub detector_a: DetectorKind,
    #[arg(long)]
    pub detector_b: DetectorKind,
    /// Match radius in pixels.
    #[arg(long, default_value_t = 2.0)]
    pub radius: f64,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub lanes: Option<usize>,
    #[arg(long)]
    pub fmt: Option<FixedPointFormat>,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    pub format: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PyramidCmd {
    pub image: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    #[arg(long)]
    pub blur: bool,
    /// Directory receiving `level_<i>.pgm`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthCmd {
    /// Sequence root to create.
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub frames: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 752)]
    pub width: usize,
    #[arg(long, default_value_t = 480)]
    pub height: usize,
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: message.into() }
    }
}

fn image_code(e: &ImageError) -> i32 {
    match e {
        ImageError::Io(_)
        | ImageError::MalformedHeader(_)
        | ImageError::TruncatedData { .. }
        | ImageError::UnsupportedMaxval(_)
        | ImageError::BufferSize { .. }
        | ImageError::EmptyImage { .. } => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

fn detect_code(e: &DetectError) -> i32 {
    match e {
        DetectError::UnknownDetector(_) => EXIT_USAGE,
        DetectError::Harris(HarrisError::InvalidFormat(_) | HarrisError::InvalidConfig(_)) => EXIT_USAGE,
        DetectError::Fast(FastError::InvalidConfig(_) | FastError::UnsupportedLaneCount(_)) => EXIT_USAGE,
        _ => EXIT_DETECTOR,
    }
}

impl From<ImageError> for CliError {
    fn from(e: ImageError) -> Self {
        Self { code: image_code(&e), message: e.to_string() }
    }
}

impl From<DetectError> for CliError {
    fn from(e: DetectError) -> Self {
        Self { code: detect_code(&e), message: e.to_string() }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        let code = match &e {
            BenchError::InvalidConfig(_)
            | BenchError::Flow(FlowError::InvalidWindow(_) | FlowError::InvalidParams(_)) => EXIT_USAGE,
            BenchError::Metric(_) | BenchError::Flow(_) => EXIT_DETECTOR,
            BenchError::Detect(d) => detect_code(d),
            BenchError::Image(i) => image_code(i),
            _ => EXIT_IO,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::io(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Detect(c) => cmd_detect(&c, stdout, stderr),
        Command::Bench(c) => cmd_bench(&c, stdout, stderr),
        Command::Compare(c) => cmd_compare(&c, stdout, stderr),
        Command::Pyramid(c) => cmd_pyramid(&c, stdout),
        Command::Synth(c) => cmd_synth(&c, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> CliResult {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(format!("{}: {e}", p.display()))),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn load_image(path: &Path) -> Result<Image, CliError> {
    load_pgm(path).map_err(|e| {
        let c = CliError::from(e);
        CliError { message: format!("{}: {}", path.display(), c.message), ..c }
    })
}

/// Applies command-line overrides on top of `base`.
pub fn apply_detector_flags(base: DetectorSettings, f: &DetectorFlags) -> Result<DetectorSettings, CliError> {
    let mut s = base;
    if let Some(k) = f.detector {
        s.detector = k;
    }
    if let Some(t) = f.threshold {
        match s.detector {
            DetectorKind::Fast | DetectorKind::FastBatch => {
                if t.fract() != 0.0 || !(0.0..=MAX_THRESHOLD as f64).contains(&t) {
                    return Err(CliError::usage(format!(
                        "FAST threshold must be an integer in 0..={MAX_THRESHOLD} (got {t})"
                    )));
                }
                s.fast.threshold = t as u8;
            }
            DetectorKind::Harris | DetectorKind::HarrisFixed => s.harris.response_threshold = t,
        }
    }
    if let Some(n) = f.lanes {
        s.lanes = n;
    }
    if let Some(fmt) = f.fmt {
        s.fixed_format = fmt;
    }
    Ok(s)
}

fn parse_format(s: &str) -> Result<ReportFormat, CliError> {
    s.parse().map_err(|e: BenchError| CliError::usage(e.to_string()))
}

pub fn cmd_detect(c: &DetectCmd, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let base = match &c.config {
        Some(p) => toml::from_str(&read_text(p)?).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?,
        None => DetectorSettings::default(),
    };
    let settings = apply_detector_flags(base, &c.detector)?;
    if c.levels == 0 {
        return Err(CliError::usage("--levels must be >= 1"));
    }
    let img = load_image(&c.image)?;
    let start = Instant::now();
    let img = if c.blur { gaussian_blur(&img, 5, 1.0)? } else { img };
    let corners = if c.levels == 1 {
        settings.detect(&img)?
    } else {
        settings.detect_pyramid(&build_pyramid(&img, c.levels)?)?
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let csv = corners_to_csv(&corners);
    let summary = format!("corners: {}\nelapsed_ms: {elapsed:.3}\n", corners.len());
    match &c.out {
        Some(p) => {
            write_output(Some(p), &csv, stdout)?;
            stdout.write_all(summary.as_bytes())?;
        }
        None => {
            stdout.write_all(csv.as_bytes())?;
            stderr.write_all(summary.as_bytes())?;
        }
    }
    Ok(())
}

/// Every frame's corners as one CSV with a leading frame index column.
pub fn frame_corners_csv(frames: &[Vec<Corner>]) -> String {
    let mut s = String::from("frame,x,y,score,level\n");
    for (i, corners) in frames.iter().enumerate() {
        for c in corners {
            let _ = writeln!(s, "{i},{},{},{},{}", c.x, c.y, c.score, c.level);
        }
    }
    s
}

pub fn cmd_bench(c: &BenchCmd, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let format = parse_format(&c.format)?;
    let mut cfg = match &c.pipeline_config {
        Some(p) => PipelineConfig::from_toml_str(&read_text(p)?)?,
        None => PipelineConfig::default(),
    };
    cfg.detection = apply_detector_flags(cfg.detection, &c.detector)?;
    if let Some(l) = c.levels {
        cfg.pyramid_levels = l;
    }
    if c.blur {
        cfg.blur.enabled = true;
    }
    if let Some(r) = c.repetitions {
        cfg.repetitions = r;
    }
    if let Some(w) = c.warmup {
        cfg.warmup = w;
    }
    cfg.validate()?;
    let power = match &c.power_config {
        Some(p) => Some(PowerModel::from_toml_str(&read_text(p)?)?),
        None => None,
    };
    let seq = load_euroc_sequence(&c.sequence)?;
    let run = run_pipeline(&seq, &cfg, power.as_ref())?;
    write_output(c.out.as_deref(), &render_report(&run.report, format), stdout)?;
    if let Some(p) = &c.corners_out {
        let frames: Vec<Vec<Corner>> = run.frames.into_iter().map(|f| f.corners).collect();
        write_output(Some(p), &frame_corners_csv(&frames), stdout)?;
    }
    let r = &run.report;
    let _ = writeln!(
        stderr,
        "{} frames, {} timed: {:.3} ms/frame, {:.3} FPS, detection share {:.3}",
        r.frames, r.timed_frames, r.total_mean_ms, r.fps_steady, r.detection_share
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct CompareRow {
    frame: usize,
    #[serde(flatten)]
    stats: Agreement,
}

#[derive(Debug, Serialize)]
struct CompareReport {
    detector_a: String,
    detector_b: String,
    radius: f64,
    frames: Vec<CompareRow>,
    aggregate: Agreement,
}

fn aggregate(rows: &[CompareRow]) -> Agreement {
    let matched: usize = rows.iter().map(|r| r.stats.matched).sum();
    let reference: usize = rows.iter().map(|r| r.stats.reference_count).sum();
    let candidate: usize = rows.iter().map(|r| r.stats.candidate_count).sum();
    let offset: f64 = rows.iter().map(|r| r.stats.mean_offset * r.stats.matched as f64).sum();
    let ratio = |n: usize, d: usize| if d == 0 { 1.0 } else { n as f64 / d as f64 };
    Agreement {
        matched,
        reference_count: reference,
        candidate_count: candidate,
        precision: ratio(matched, candidate),
        recall: ratio(matched, reference),
        mean_offset: if matched == 0 { 0.0 } else { offset / matched as f64 },
    }
}

fn compare_csv(rep: &CompareReport) -> String {
    let mut s = String::from("frame,reference,candidate,matched,precision,recall,mean_offset\n");
    let row = |s: &mut String, label: &str, a: &Agreement| {
        let _ = writeln!(
            s,
            "{label},{},{},{},{:.6},{:.6},{:.6}",
            a.reference_count, a.candidate_count, a.matched, a.precision, a.recall, a.mean_offset
        );
    };
    for r in &rep.frames {
        row(&mut s, &r.frame.to_string(), &r.stats);
    }
    row(&mut s, "all", &rep.aggregate);
    s
}

pub fn cmd_compare(c: &CompareCmd, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let format = parse_format(&c.format)?;
    if format == ReportFormat::Markdown {
        return Err(CliError::usage("compare supports --format csv or json"));
    }
    let flags = |k| DetectorFlags { detector: Some(k), threshold: c.threshold, lanes: c.lanes, fmt: c.fmt };
    let a = apply_detector_flags(DetectorSettings::default(), &flags(c.detector_a))?;
    let b = apply_detector_flags(DetectorSettings::default(), &flags(c.detector_b))?;
    let images: Vec<Image> = if c.input.is_dir() {
        let seq: SequenceSource = load_euroc_sequence(&c.input)?;
        seq.frames().iter().map(|f| f.image.clone()).collect()
    } else {
        vec![load_image(&c.input)?]
    };
    let mut rows = Vec::with_capacity(images.len());
    for (frame, img) in images.iter().enumerate() {
        let stats =
            agreement(&a.detect(img)?, &b.detect(img)?, c.radius).map_err(|e| CliError::usage(e.to_string()))?;
        rows.push(CompareRow { frame, stats });
    }
    let rep = CompareReport {
        detector_a: a.detector.to_string(),
        detector_b: b.detector.to_string(),
        radius: c.radius,
        aggregate: aggregate(&rows),
        frames: rows,
    };
    let text = match format {
        ReportFormat::Json => serde_json::to_string_pretty(&rep).expect("serializable") + "\n",
        _ => compare_csv(&rep),
    };
    write_output(c.out.as_deref(), &text, stdout)?;
    let _ = writeln!(
        stderr,
        "{} vs {}: precision {:.4}, recall {:.4} over {} frame(s)",
        rep.detector_a,
        rep.detector_b,
        rep.aggregate.precision,
        rep.aggregate.recall,
        rep.frames.len()
    );
    Ok(())
}

pub fn cmd_pyramid(c: &PyramidCmd, stdout: &mut dyn Write) -> CliResult {
    let img = load_image(&c.image)?;
    let img = if c.blur { gaussian_blur(&img, 5, 1.0)? } else { img };
    let pyr = build_pyramid(&img, c.levels)?;
    fs::create_dir_all(&c.out)?;
    for (i, level) in pyr.levels().iter().enumerate() {
        let path = c.out.join(format!("level_{i}.pgm"));
        save_pgm(level, &path)?;
        writeln!(stdout, "{},{}x{}", path.display(), level.width(), level.height())?;
    }
    Ok(())
}

pub fn cmd_synth(c: &SynthCmd, stdout: &mut dyn Write) -> CliResult {
    if c.frames == 0 || c.width == 0 || c.height == 0 {
        return Err(CliError::usage("--frames, --width and --height must be positive"));
    }
    let p = SynthParams { width: c.width, height: c.height, frames: c.frames, seed: c.seed, ..SynthParams::default() };
    let images = synth_sequence(&p);
    let frames: Vec<(u64, &Image)> = images.iter().enumerate().map(|(i, im)| (i as u64 * 50_000_000, im)).collect();
    write_euroc_sequence(&c.out, &frames)?;
    writeln!(stdout, "wrote {} frames ({}x{}, seed {}) to {}", c.frames, c.width, c.height, c.seed, c.out.display())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("featfront").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&[]).0, EXIT_USAGE);
        assert_eq!(run_args(&["detect"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["detect", "x.pgm", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["detect", "x.pgm", "--detector", "orb"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["detect", "x.pgm", "--fmt", "16"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn missing_file_exits_3() {
        let (code, out, err) = run_args(&["detect", "/nonexistent/a.pgm"]);
        assert_eq!(code, EXIT_IO);
        assert!(out.is_empty());
        assert!(err.contains("a.pgm"));
    }

    #[test]
    fn threshold_must_fit_fast() {
        let f = DetectorFlags { threshold: Some(10.5), ..Default::default() };
        assert_eq!(apply_detector_flags(DetectorSettings::default(), &f).unwrap_err().code, EXIT_USAGE);
        let f = DetectorFlags { threshold: Some(20.0), ..Default::default() };
        assert_eq!(apply_detector_flags(DetectorSettings::default(), &f).unwrap().fast.threshold, 20);
        let f = DetectorFlags { detector: Some(DetectorKind::Harris), threshold: Some(5e20), ..Default::default() };
        assert_eq!(apply_detector_flags(DetectorSettings::default(), &f).unwrap().harris.response_threshold, 5e20);
    }

    #[test]
    fn too_small_image_exits_4() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("tiny.pgm");
        save_pgm(&Image::filled(4, 4, 0).unwrap(), &p).unwrap();
        assert_eq!(run_args(&["detect", p.to_str().unwrap()]).0, EXIT_DETECTOR);
    }
}
