use std::path::Path;

use featfront::bench::synth::{synth_sequence, SynthParams};
use featfront::bench::{
    load_euroc_sequence, parse_report_csv, render_report, run_pipeline, write_euroc_sequence, BreakdownReport,
    PipelineConfig, PowerModel, ReportFormat, SequenceSource,
};
use featfront::detector::DetectorKind;
use featfront::Image;

fn images(frames: usize) -> Vec<Image> {
    synth_sequence(&SynthParams { width: 240, height: 160, frames, ..SynthParams::default() })
}

fn cfg(kind: DetectorKind) -> PipelineConfig {
    let mut c = PipelineConfig { repetitions: 1, warmup: 1, ..PipelineConfig::default() };
    c.detection.detector = kind;
    c
}

#[test]
fn euroc_round_trip_gives_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let imgs = images(4);
    let refs: Vec<(u64, &Image)> = imgs.iter().enumerate().map(|(i, im)| (10 + i as u64, im)).collect();
    write_euroc_sequence(dir.path(), &refs).unwrap();
    let loaded = load_euroc_sequence(dir.path()).unwrap();
    assert_eq!(loaded.len(), 4);
    let from_disk = run_pipeline(&loaded, &cfg(DetectorKind::Fast), None).unwrap();
    let in_memory = run_pipeline(&SequenceSource::from_images(imgs), &cfg(DetectorKind::Fast), None).unwrap();
    let corners = |r: &featfront::bench::PipelineRun| r.frames.iter().map(|f| f.corners.clone()).collect::<Vec<_>>();
    assert_eq!(corners(&from_disk), corners(&in_memory));
    assert_eq!(from_disk.frames[2].timestamp_ns, 12);
}

#[test]
fn tracks_follow_the_synthetic_motion() {
    let run = run_pipeline(&SequenceSource::from_images(images(3)), &cfg(DetectorKind::Fast), None).unwrap();
    let prev = &run.frames[1];
    let next = &run.frames[2];
    assert_eq!(next.tracks.len(), prev.corners.len().min(300));
    let tracked: Vec<_> = next.tracks.iter().filter(|t| t.is_tracked()).collect();
    assert!(tracked.len() * 10 >= next.tracks.len() * 8, "{} of {}", tracked.len(), next.tracks.len());
    // Tracked points should sit at a previous corner (in level-0 coordinates) moved by (-2, -1).
    let seeds: Vec<(f32, f32)> = prev
        .corners
        .iter()
        .map(|c| {
            let s = (1u32 << c.level) as f32;
            ((c.x as f32 + 0.5) * s - 0.5, (c.y as f32 + 0.5) * s - 0.5)
        })
        .collect();
    let near = |x: f32, y: f32| seeds.iter().any(|&(sx, sy)| (sx - 2.0 - x).abs() < 0.3 && (sy - 1.0 - y).abs() < 0.3);
    let consistent = tracked.iter().filter(|t| near(t.x, t.y)).count();
    assert!(consistent * 100 >= tracked.len() * 95, "{consistent} of {}", tracked.len());
}

#[test]
fn report_is_consistent_across_formats() {
    let power = PowerModel { label: "p".into(), processor_w: 4.0, accelerator_w: 8.8, total_w: 20.0 };
    let r =
        run_pipeline(&SequenceSource::from_images(images(5)), &cfg(DetectorKind::Harris), Some(&power)).unwrap().report;
    assert_eq!((r.frames, r.warmup_frames, r.timed_frames), (5, 1, 4));
    assert_eq!(r.per_frame.len(), 5);
    let e = r.energy.as_ref().unwrap();
    let q3 = |v: f64| (v * 1000.0).round() / 1000.0;
    assert_eq!(e.frontend_mj_per_frame, q3(20.0 * r.total_mean_ms));
    assert_eq!(e.detection_mj_per_frame, q3(8.8 * r.stage("feature detection").unwrap().mean_ms));

    let json: BreakdownReport = serde_json::from_str(&render_report(&r, ReportFormat::Json)).unwrap();
    assert_eq!(json, r);
    let csv = parse_report_csv(&render_report(&r, ReportFormat::Csv)).unwrap();
    assert_eq!(csv["total_mean_ms"].parse::<f64>().unwrap(), r.total_mean_ms);
    assert_eq!(csv["detector"], "harris");
    let md = render_report(&r, ReportFormat::Markdown);
    for stage in ["pre-processing", "feature detection", "optical flow"] {
        assert!(md.contains(&format!("| {stage} |")), "{stage}");
    }
}

#[test]
fn shipped_configs_load() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    assert_eq!(PipelineConfig::load(root.join("pipeline.toml")).unwrap(), PipelineConfig::default());
    for entry in std::fs::read_dir(root.join("power")).unwrap() {
        let path = entry.unwrap().path();
        let p = PowerModel::load(&path).unwrap();
        assert!(p.total_w >= p.accelerator_w.max(p.processor_w), "{}", path.display());
    }
}
