use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use featfront::bench::synth::{synth_sequence, SynthParams};
use featfront::bench::{parse_report_csv, write_euroc_sequence, BreakdownReport};
use featfront::corner::corners_to_csv;
use featfront::detector::{DetectorKind, DetectorSettings};
use featfront::harris::{detect_harris_fixed, HarrisConfig};
use featfront::image::load_pgm;
use serde_json::Value;

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn featfront(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_featfront")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn sequence(dir: &Path, frames: usize) -> PathBuf {
    let root = dir.join("seq");
    let imgs = synth_sequence(&SynthParams { width: 320, height: 240, frames, ..SynthParams::default() });
    let refs: Vec<(u64, &featfront::Image)> =
        imgs.iter().enumerate().map(|(i, im)| (1000 + i as u64 * 50_000_000, im)).collect();
    write_euroc_sequence(&root, &refs).unwrap();
    root
}

fn bench_json(root: &Path, extra: &[&str]) -> BreakdownReport {
    let mut args = vec!["bench", root.to_str().unwrap(), "--repetitions", "1", "--warmup", "2"];
    args.extend_from_slice(extra);
    let o = featfront(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn detect_blank_has_header_only() {
    let o = featfront(&["detect", golden("blank.pgm").to_str().unwrap(), "--detector", "fast"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "x,y,score,level\n");
    assert!(String::from_utf8_lossy(&o.stderr).contains("corners: 0"));
}

#[test]
fn detect_dot_defaults() {
    let o = featfront(&["detect", golden("dot.pgm").to_str().unwrap(), "--detector", "fast"]);
    assert_eq!(stdout(&o), "x,y,score,level\n8,8,149,0\n");
    let bare = featfront(&["detect", golden("dot.pgm").to_str().unwrap()]);
    assert_eq!(stdout(&bare), stdout(&o));
}

#[test]
fn detect_matches_golden_files_and_library() {
    let frame = golden("frame.pgm");
    let img = load_pgm(&frame).unwrap();
    for kind in DetectorKind::ALL {
        let want = fs::read_to_string(golden(&format!("frame_{kind}.csv"))).unwrap();
        let o = featfront(&["detect", frame.to_str().unwrap(), "--detector", kind.as_str()]);
        assert!(o.status.success());
        assert_eq!(stdout(&o), want, "{kind}");
        assert_eq!(corners_to_csv(&DetectorSettings::with_kind(kind).detect(&img).unwrap()), want, "{kind}");
    }
}

#[test]
fn detect_harris_fixed_to_file_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let frame = golden("frame.pgm");
    let o = featfront(&[
        "detect",
        frame.to_str().unwrap(),
        "--detector",
        "harris_fixed",
        "--fmt",
        "16.8",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let lib =
        detect_harris_fixed(&load_pgm(&frame).unwrap(), &HarrisConfig::default(), "16.8".parse().unwrap()).unwrap();
    assert_eq!(fs::read_to_string(&out).unwrap(), corners_to_csv(&lib));
    let summary = stdout(&o);
    assert!(summary.contains(&format!("corners: {}", lib.len())) && summary.contains("elapsed_ms: "));
}

#[test]
fn detect_respects_config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("det.toml");
    fs::write(&cfg, "detector = \"fast\"\n[fast]\nthreshold = 149\n").unwrap();
    let dot = golden("dot.pgm");
    assert_eq!(
        stdout(&featfront(&["detect", dot.to_str().unwrap(), "--config", cfg.to_str().unwrap()])).lines().count(),
        2
    );
    let o = featfront(&["detect", dot.to_str().unwrap(), "--config", cfg.to_str().unwrap(), "--threshold", "150"]);
    assert_eq!(stdout(&o), "x,y,score,level\n");
}

#[test]
fn exit_codes() {
    let dot = golden("dot.pgm");
    let dot = dot.to_str().unwrap();
    assert_eq!(featfront(&["detect", "/no/such.pgm"]).status.code(), Some(3));
    assert_eq!(featfront(&["detect", dot, "--detector", "sift"]).status.code(), Some(2));
    assert_eq!(featfront(&["detect", dot, "--frobnicate"]).status.code(), Some(2));
    assert_eq!(featfront(&["detect", dot, "--lanes", "3", "--detector", "fast_batch"]).status.code(), Some(2));
    assert_eq!(featfront(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.pgm");
    fs::write(&junk, b"P6\n1 1\n255\nabc").unwrap();
    assert_eq!(featfront(&["detect", junk.to_str().unwrap()]).status.code(), Some(3));
    let tiny = dir.path().join("tiny.pgm");
    fs::write(&tiny, b"P5\n4 4\n255\n0123456789abcdef").unwrap();
    let o = featfront(&["detect", tiny.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(o.stdout.is_empty() && !o.stderr.is_empty());
    let bad_cfg = dir.path().join("bad.toml");
    fs::write(&bad_cfg, "repetitions = 0\n").unwrap();
    let seq = sequence(dir.path(), 2);
    let o = featfront(&["bench", seq.to_str().unwrap(), "--pipeline-config", bad_cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(featfront(&["bench", dir.path().join("none").to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn bench_report_and_batched_counts() {
    let dir = tempfile::tempdir().unwrap();
    let seq = sequence(dir.path(), 10);
    let scalar = bench_json(&seq, &["--detector", "fast"]);
    assert_eq!(scalar.frames, 10);
    assert_eq!(scalar.stages.len(), 3);
    let shares: f64 = scalar.stages.iter().map(|s| s.share).sum();
    assert!((shares - 1.0).abs() <= 0.01);
    let batch = bench_json(&seq, &["--detector", "fast_batch", "--lanes", "8"]);
    assert_eq!(batch.corner_counts(), scalar.corner_counts());
    assert_eq!(batch.detector, "fast_batch");
}

#[test]
fn bench_models_energy_from_power_config() {
    let dir = tempfile::tempdir().unwrap();
    let seq = sequence(dir.path(), 4);
    let power = dir.path().join("p.toml");
    fs::write(&power, "label = \"test\"\nprocessor_w = 4.4\naccelerator_w = 8.8\ntotal_w = 20.4\n").unwrap();
    let r = bench_json(&seq, &["--power-config", power.to_str().unwrap()]);
    let e = r.energy.as_ref().expect("energy present");
    let det = r.stage("feature detection").unwrap().mean_ms;
    assert_eq!(e.detection_mj_per_frame, (8.8 * det * 1000.0).round() / 1000.0);
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/power/fast_ftfast_orin_max.toml");
    assert!(bench_json(&seq, &["--power-config", shipped.to_str().unwrap()]).energy.is_some());
}

#[test]
fn bench_formats() {
    let dir = tempfile::tempdir().unwrap();
    let seq = sequence(dir.path(), 3);
    let out = dir.path().join("r.csv");
    let o = featfront(&[
        "bench",
        seq.to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
        "--repetitions",
        "1",
    ]);
    assert!(o.status.success());
    let map = parse_report_csv(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(map["frames"], "3");
    let md = featfront(&["bench", seq.to_str().unwrap(), "--format", "markdown", "--repetitions", "1"]);
    assert!(stdout(&md).contains("| total |"));
    assert_eq!(featfront(&["bench", seq.to_str().unwrap(), "--format", "xml"]).status.code(), Some(2));
}

fn strip_timings(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.retain(|k, _| {
                !(k.ends_with("_ms") || k.contains("share") || k.starts_with("fps") || k.ends_with("mj_per_frame"))
            });
            m.values_mut().for_each(strip_timings);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

#[test]
fn bench_is_deterministic_apart_from_timings() {
    let dir = tempfile::tempdir().unwrap();
    let seq = sequence(dir.path(), 5);
    let run = |tag: &str| {
        let (json, csv) = (dir.path().join(format!("{tag}.json")), dir.path().join(format!("{tag}.csv")));
        let o = featfront(&[
            "bench",
            seq.to_str().unwrap(),
            "--repetitions",
            "1",
            "--out",
            json.to_str().unwrap(),
            "--corners-out",
            csv.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        let mut v: Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
        strip_timings(&mut v);
        (v, fs::read(csv).unwrap())
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a.1, b.1);
    assert_eq!(a.0, b.0);
    assert!(String::from_utf8(a.1).unwrap().starts_with("frame,x,y,score,level\n"));
}

fn compare(input: &Path, a: &str, b: &str) -> Value {
    let o = featfront(&["compare", input.to_str().unwrap(), "--detector-a", a, "--detector-b", b, "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn compare_reports_agreement() {
    let dir = tempfile::tempdir().unwrap();
    let seq = sequence(dir.path(), 4);
    let v = compare(&seq, "fast", "fast_batch");
    for f in v["frames"].as_array().unwrap() {
        assert_eq!((f["precision"].as_f64(), f["recall"].as_f64()), (Some(1.0), Some(1.0)));
    }
    let same = compare(&golden("frame.pgm"), "harris", "harris");
    assert_eq!(same["aggregate"]["precision"], 1.0);
    assert_eq!(same["aggregate"]["mean_offset"], 0.0);
    let fx = compare(&seq, "harris", "harris_fixed");
    assert!(fx["aggregate"]["precision"].as_f64().unwrap() >= 0.98);
    assert!(fx["aggregate"]["recall"].as_f64().unwrap() >= 0.98);
    let csv = featfront(&["compare", seq.to_str().unwrap(), "--detector-a", "fast", "--detector-b", "harris"]);
    let text = stdout(&csv);
    assert!(text.starts_with("frame,reference,candidate,matched,precision,recall,mean_offset\n"));
    assert!(text.lines().last().unwrap().starts_with("all,"));
}

#[test]
fn pyramid_and_synth_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pyr");
    let o =
        featfront(&["pyramid", golden("frame.pgm").to_str().unwrap(), "--levels", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(load_pgm(out.join("level_2.pgm")).unwrap().width(), 24);
    assert_eq!(stdout(&o).lines().count(), 3);

    let root = dir.path().join("syn");
    let o = featfront(&[
        "synth",
        root.to_str().unwrap(),
        "--frames",
        "3",
        "--width",
        "64",
        "--height",
        "48",
        "--seed",
        "4",
    ]);
    assert!(o.status.success());
    let again = dir.path().join("syn2");
    featfront(&["synth", again.to_str().unwrap(), "--frames", "3", "--width", "64", "--height", "48", "--seed", "4"]);
    let index = fs::read_to_string(root.join("mav0/cam0/data.csv")).unwrap();
    assert_eq!(index.lines().count(), 4);
    for line in index.lines().skip(1) {
        let name = line.split(',').nth(1).unwrap();
        let p = |r: &Path| fs::read(r.join("mav0/cam0/data").join(name)).unwrap();
        assert_eq!(p(&root), p(&again));
    }
}
