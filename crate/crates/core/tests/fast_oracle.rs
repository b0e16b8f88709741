mod common;

use featfront::fast::{detect_fast, detect_fast_batch, fast_score, segment_test, FastConfig, SUPPORTED_LANES};
use featfront::{Corner, Image};
use featfront_oracle::fast::oracle_fast;

use common::{corpus, detections};

fn bright_dot() -> Image {
    let mut img = Image::filled(17, 17, 50).unwrap();
    img.set(8, 8, 200);
    img
}

#[test]
fn matches_oracle_on_seeded_corpus() {
    let cfg = FastConfig::default();
    for (i, img) in corpus(64, 200).iter().enumerate() {
        let got = detect_fast(img, &cfg).unwrap();
        assert_eq!(detections(&got), oracle_fast(img, 9, 10, 3), "image {i}");
    }
}

#[test]
fn matches_oracle_for_other_configs() {
    let configs = [
        FastConfig { threshold: 25, ..FastConfig::default() },
        FastConfig { arc_length: 12, threshold: 5, nms_window: 5 },
        FastConfig { nms_window: 1, ..FastConfig::default() },
    ];
    for (i, img) in corpus(48, 30).iter().enumerate() {
        for cfg in configs {
            let expected = oracle_fast(img, cfg.arc_length as usize, cfg.threshold, cfg.nms_window);
            assert_eq!(detections(&detect_fast(img, &cfg).unwrap()), expected, "image {i} {cfg:?}");
            for n in SUPPORTED_LANES {
                assert_eq!(detections(&detect_fast_batch(img, &cfg, n).unwrap()), expected, "image {i} n={n}");
            }
        }
    }
}

#[test]
fn constructed_cases() {
    let cfg = FastConfig::default();
    assert_eq!(detect_fast(&bright_dot(), &cfg).unwrap(), vec![Corner::new(8, 8, 149.0, 0)]);
    assert!(detect_fast(&Image::filled(32, 32, 0).unwrap(), &cfg).unwrap().is_empty());
}

#[test]
fn score_is_highest_passing_threshold() {
    let cfg = FastConfig::default();
    for img in corpus(64, 60) {
        for c in detect_fast(&img, &cfg).unwrap() {
            let (x, y, s) = (c.x as usize, c.y as usize, c.score as u8);
            assert_eq!(fast_score(&img, x, y, &cfg).unwrap(), s);
            assert!(segment_test(&img, x, y, s, 9).unwrap());
            assert!(s == 254 || !segment_test(&img, x, y, s + 1, 9).unwrap());
        }
    }
}
