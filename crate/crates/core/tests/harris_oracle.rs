mod common;

use featfront::harris::{detect_harris, harris_response, structure_tensor, HarrisConfig};
use featfront::image::{build_pyramid, gaussian_blur, sobel_gradients};
use featfront::Image;
use featfront_oracle::filter::{oracle_blur, oracle_downsample, sobel_at};
use featfront_oracle::harris::{oracle_harris, oracle_tensor};

use common::{corpus, detections};

#[test]
fn matches_oracle_on_seeded_corpus() {
    for (i, img) in corpus(32, 200).iter().enumerate() {
        for threshold in [1.0e21, 1.0e18, 0.0] {
            let cfg = HarrisConfig { response_threshold: threshold, ..HarrisConfig::default() };
            let expected = oracle_harris(img, 0.04, threshold, 7, 7, 2);
            assert_eq!(detections(&detect_harris(img, &cfg).unwrap()), expected, "image {i} thr {threshold}");
        }
    }
}

#[test]
fn matches_oracle_for_small_kernels_and_odd_windows() {
    for (i, img) in corpus(24, 40).iter().enumerate() {
        for (sobel, block, nms) in [(3, 3, 3), (5, 3, 2), (3, 5, 5)] {
            let cfg = HarrisConfig {
                sobel_size: sobel,
                block_size: block,
                nms_window: nms,
                response_threshold: 1e6,
                ..HarrisConfig::default()
            };
            let expected = oracle_harris(img, 0.04, 1e6, sobel, block, nms);
            assert_eq!(detections(&detect_harris(img, &cfg).unwrap()), expected, "image {i} {sobel}/{block}/{nms}");
        }
    }
}

#[test]
fn tensor_matches_direct_summation() {
    for img in corpus(32, 20) {
        let t = structure_tensor(&sobel_gradients(&img, 7).unwrap(), 7).unwrap();
        for y in 6..26 {
            for x in 6..26 {
                assert_eq!(t.get(x, y).unwrap(), oracle_tensor(&img, 7, 7, x, y));
            }
        }
        assert!(t.get(5, 10).is_none() && t.get(26, 10).is_none());
    }
}

#[test]
fn gradients_match_direct_convolution() {
    for img in corpus(20, 12) {
        for k in [3, 5, 7] {
            let g = sobel_gradients(&img, k).unwrap();
            let r = k / 2;
            for y in r..20 - r {
                for x in r..20 - r {
                    let (gx, gy) = sobel_at(&img, k, x, y);
                    assert_eq!((g.gx(x, y) as i64, g.gy(x, y) as i64), (gx, gy));
                }
            }
        }
    }
}

#[test]
fn blur_and_pyramid_match_oracles() {
    for img in corpus(21, 12) {
        for (k, sigma) in [(3, 0.8), (5, 1.0), (7, 2.0)] {
            assert_eq!(gaussian_blur(&img, k, sigma).unwrap(), oracle_blur(&img, k, sigma));
        }
        let p = build_pyramid(&img, 3).unwrap();
        for l in 1..3 {
            let want = oracle_downsample(p.level(l - 1));
            let got: Vec<Vec<u8>> = (0..p.level(l).height()).map(|y| p.level(l).row(y).to_vec()).collect();
            assert_eq!(got, want);
        }
    }
}

#[test]
fn constant_image_has_zero_response() {
    let img = Image::filled(32, 32, 140).unwrap();
    let t = structure_tensor(&sobel_gradients(&img, 7).unwrap(), 7).unwrap();
    assert!(harris_response(&t, 0.04).values().iter().all(|&r| r == 0.0));
    assert!(detect_harris(&img, &HarrisConfig { response_threshold: 0.0, ..HarrisConfig::default() })
        .unwrap()
        .is_empty());
}

#[test]
fn step_edge_is_negative_and_undetected() {
    let img = Image::from_fn(32, 32, |x, _| if x < 16 { 30 } else { 200 }).unwrap();
    let t = structure_tensor(&sobel_gradients(&img, 7).unwrap(), 7).unwrap();
    let r = harris_response(&t, 0.04);
    for y in 6..26 {
        for x in 13..19 {
            assert!(r.get(x, y).unwrap() < 0.0, "({x}, {y})");
        }
    }
    assert!(r.values().iter().all(|&v| v <= 0.0));
    assert!(detect_harris(&img, &HarrisConfig { response_threshold: 0.0, ..HarrisConfig::default() })
        .unwrap()
        .is_empty());
}
