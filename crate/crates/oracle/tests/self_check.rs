use featfront::Image;
use featfront_oracle::fast::{oracle_fast, oracle_segment_test};
use featfront_oracle::filter::{oracle_blur, oracle_downsample, sobel_2d};
use featfront_oracle::flow::oracle_flow;
use featfront_oracle::harris::{oracle_harris, oracle_response_map};
use featfront_oracle::matching::optimal_matches;
use featfront_oracle::{noise_image, Detection};

fn bright_dot() -> Image {
    let mut img = Image::filled(17, 17, 50).unwrap();
    img.set(8, 8, 200);
    img
}

#[test]
fn fast_bright_dot_and_blank() {
    let found = oracle_fast(&bright_dot(), 9, 10, 3);
    assert_eq!(found, vec![Detection { x: 8, y: 8, score: 149.0 }]);
    assert!(oracle_segment_test(&bright_dot(), 8, 8, 149, 9));
    assert!(!oracle_segment_test(&bright_dot(), 8, 8, 150, 9));
    assert!(oracle_fast(&Image::filled(20, 20, 90).unwrap(), 9, 10, 3).is_empty());
}

#[test]
fn sobel_3_is_textbook() {
    let (kx, ky) = sobel_2d(3);
    assert_eq!(kx, vec![vec![-1, 0, 1], vec![-2, 0, 2], vec![-1, 0, 1]]);
    assert_eq!(ky, vec![vec![-1, -2, -1], vec![0, 0, 0], vec![1, 2, 1]]);
    let (kx7, _) = sobel_2d(7);
    assert_eq!(kx7[3], vec![-20, -80, -100, 0, 100, 80, 20]);
}

#[test]
fn harris_constant_and_step() {
    let flat = Image::filled(24, 24, 77).unwrap();
    for row in oracle_response_map(&flat, 0.04, 7, 7) {
        assert!(row.iter().flatten().all(|&r| r == 0.0));
    }
    let step = Image::from_fn(24, 24, |x, _| if x < 12 { 20 } else { 220 }).unwrap();
    let map = oracle_response_map(&step, 0.04, 7, 7);
    assert!(map[12][12].unwrap() < 0.0);
    assert!(oracle_harris(&step, 0.04, 0.0, 7, 7, 2).is_empty());
}

#[test]
fn blur_and_downsample() {
    let flat = Image::filled(9, 9, 123).unwrap();
    assert_eq!(oracle_blur(&flat, 5, 1.0), flat);
    let img = Image::from_fn(4, 2, |x, _| [0, 1, 2, 4][x]).unwrap();
    // (0 + 1 + 0 + 1) / 4 = 0.5 -> 1, (2 + 4 + 2 + 4) / 4 = 3
    assert_eq!(oracle_downsample(&img), vec![vec![1, 3]]);
}

#[test]
fn flow_search() {
    let a = noise_image(40, 40, 3);
    let shifted = Image::from_fn(40, 40, |x, y| a.get(x.saturating_sub(2), y)).unwrap();
    assert_eq!(oracle_flow(&a, &a, (20.0, 20.0), 9, 3.0, 0.5), (0.0, 0.0));
    assert_eq!(oracle_flow(&a, &shifted, (20.0, 20.0), 9, 3.0, 0.5), (2.0, 0.0));
}

#[test]
fn matching_is_optimal() {
    let d = |x, y| Detection { x, y, score: 1.0 };
    // Greedy by distance would pair (10,10)-(11,10) and strand (12,10).
    let a = [d(10, 10), d(12, 10)];
    let b = [d(11, 10), d(9, 10)];
    assert_eq!(optimal_matches(&a, &b, 1.5), 2);
    assert_eq!(optimal_matches(&a, &[], 5.0), 0);
}
