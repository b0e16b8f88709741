mod common;

use featfront::flow::{track_lk, LkParams, TrackStatus};
use featfront::image::build_pyramid;
use featfront::Image;
use featfront_oracle::flow::oracle_flow;

use common::{texture, warp};

fn points() -> Vec<(f32, f32)> {
    (0..5).flat_map(|j| (0..5).map(move |i| (20.0 + 6.0 * i as f32, 20.0 + 6.0 * j as f32))).collect()
}

fn track(prev: &Image, next: &Image, levels: usize) -> Vec<(f32, f32)> {
    let (p, n) = (build_pyramid(prev, levels).unwrap(), build_pyramid(next, levels).unwrap());
    let pts = points();
    track_lk(&p, &n, &pts, &LkParams::default())
        .unwrap()
        .iter()
        .zip(&pts)
        .map(|(t, &(x, y))| {
            assert_eq!(t.status, TrackStatus::Tracked, "({x}, {y})");
            (t.x - x, t.y - y)
        })
        .collect()
}

#[test]
fn identical_frames_do_not_move() {
    let img = texture(64, 64, 1);
    for levels in [1, 3] {
        for (dx, dy) in track(&img, &img, levels) {
            assert!(dx.abs() <= 1e-6 && dy.abs() <= 1e-6);
        }
    }
}

#[test]
fn integer_shift_is_recovered() {
    let img = texture(64, 64, 2);
    let next = warp(&img, 2.0, 0.0);
    for levels in [1, 3] {
        for (dx, dy) in track(&img, &next, levels) {
            assert!((dx - 2.0).abs() <= 0.1 && dy.abs() <= 0.1, "({dx}, {dy})");
        }
    }
}

#[test]
fn subpixel_shift_agrees_with_exhaustive_search() {
    for seed in 3..6 {
        let img = texture(64, 64, seed);
        let next = warp(&img, 0.4, -0.7);
        for (&(x, y), (dx, dy)) in points().iter().zip(track(&img, &next, 3)) {
            let (ox, oy) = oracle_flow(&img, &next, (x as f64, y as f64), 21, 1.5, 0.1);
            assert!((ox - 0.4).abs() <= 0.1 + 1e-9 && (oy + 0.7).abs() <= 0.1 + 1e-9, "oracle ({ox}, {oy})");
            assert!((dx as f64 - ox).abs() <= 0.2 && (dy as f64 - oy).abs() <= 0.2, "lk ({dx}, {dy}) vs ({ox}, {oy})");
        }
    }
}

#[test]
fn synthetic_sequence_motion_is_tracked() {
    let f = common::frames(2);
    let (p, n) = (build_pyramid(&f[0], 3).unwrap(), build_pyramid(&f[1], 3).unwrap());
    let pts: Vec<(f32, f32)> = (0..40).map(|i| (60.0 + 15.0 * i as f32, 100.0 + 7.0 * i as f32)).collect();
    let tracks = track_lk(&p, &n, &pts, &LkParams::default()).unwrap();
    // The view moves (+2, +1) per frame, so content moves (-2, -1).
    let good = tracks
        .iter()
        .zip(&pts)
        .filter(|(t, &(x, y))| t.is_tracked() && (t.x - x + 2.0).abs() < 0.2 && (t.y - y + 1.0).abs() < 0.2)
        .count();
    assert!(good >= 36, "{good} of 40");
}
