//! Row-streaming FAST engine evaluating `N` adjacent pixels per step.
//!
//! Rows enter a seven-row ring buffer (`buf`). Once the row three below the
//! row under test has arrived, that row is swept in chunks of `N` lanes: each
//! lane fills its `diff` and `flags` arrays, a tag is set from the flags, and
//! tagged lanes are scored straight from their differences. Scores land in
//! the trailing `buf_nms` ring, and a row retires through NMS as soon as the
//! rows below it within the window have been scored, so suppression runs
//! interleaved with scoring rather than as a separate pass.
//!
//! All arithmetic is integer; the result is identical to
//! [`detect_fast`](super::detect_fast).

use super::{has_arc, FastConfig, FastError, BORDER, CIRCLE};
use crate::corner::Corner;
use crate::image::Image;

pub const SUPPORTED_LANES: [usize; 4] = [1, 4, 8, 16];

const MAX_LANES: usize = 16;

const BUF_ROWS: usize = 2 * BORDER + 1;

const FLAG_NONE: u8 = 0;
const FLAG_BRIGHT: u8 = 1;
const FLAG_DARK: u8 = 2;

/// Working set of the streaming engine.
#[derive(Clone, Debug)]
pub struct FastBatchState {
    n_lanes: usize,
    width: usize,
    cfg: FastConfig,
    /// Ring of the last seven image rows; row `y` lives in slot `y % 7`.
    buf: Vec<u8>,
    /// Ring of candidate scores for the NMS window; row `y` lives in slot `y % nms_window`.
    buf_nms: Vec<u8>,
    /// `I_Pi - I_P`, indexed `[circle pixel][lane]`.
    diff: [[i16; MAX_LANES]; 16],
    /// Per-lane brighter / darker flags, one bit per circle pixel.
    bright: [u16; MAX_LANES],
    dark: [u16; MAX_LANES],
    /// Per-lane corner tag.
    tag: [bool; MAX_LANES],
    rows_in: usize,
}

impl FastBatchState {
    pub fn new(width: usize, cfg: FastConfig, n_lanes: usize) -> Result<Self, FastError> {
        if !SUPPORTED_LANES.contains(&n_lanes) {
            return Err(FastError::UnsupportedLaneCount(n_lanes));
        }
        cfg.validate()?;
        Ok(Self {
            n_lanes,
            width,
            cfg,
            buf: vec![0; BUF_ROWS * width],
            buf_nms: vec![0; cfg.nms_window * width],
            diff: [[0; MAX_LANES]; 16],
            bright: [0; MAX_LANES],
            dark: [0; MAX_LANES],
            tag: [false; MAX_LANES],
            rows_in: 0,
        })
    }

    pub fn n_lanes(&self) -> usize {
        self.n_lanes
    }

    /// Circle differences of `lane` from the last evaluated chunk.
    pub fn diff(&self, lane: usize) -> [i16; 16] {
        std::array::from_fn(|i| self.diff[i][lane])
    }

    /// Brighter / darker / neither flag of each circle pixel of `lane`.
    pub fn flags(&self, lane: usize) -> [u8; 16] {
        std::array::from_fn(|i| {
            if self.bright[lane] >> i & 1 == 1 {
                FLAG_BRIGHT
            } else if self.dark[lane] >> i & 1 == 1 {
                FLAG_DARK
            } else {
                FLAG_NONE
            }
        })
    }

    pub fn tag(&self, lane: usize) -> bool {
        self.tag[lane]
    }

    /// Rows pushed so far.
    pub fn rows_in(&self) -> usize {
        self.rows_in
    }

    /// Index of the row the buffer is centred on, once seven rows are held.
    pub fn centre_row(&self) -> Option<usize> {
        (self.rows_in >= BUF_ROWS).then(|| self.rows_in - 1 - BORDER)
    }

    /// Rows currently held in `buf`, oldest first.
    pub fn buffered_rows(&self) -> std::ops::Range<usize> {
        self.rows_in.saturating_sub(BUF_ROWS)..self.rows_in
    }

    #[inline]
    fn nms_row(&self, y: usize) -> &[u8] {
        let slot = y % self.cfg.nms_window;
        &self.buf_nms[slot * self.width..(slot + 1) * self.width]
    }

    fn nms_row_mut(&mut self, y: usize) -> &mut [u8] {
        let slot = y % self.cfg.nms_window;
        &mut self.buf_nms[slot * self.width..(slot + 1) * self.width]
    }

    /// Appends an image row to the ring buffer.
    pub fn push_row(&mut self, row: &[u8]) {
        assert_eq!(row.len(), self.width, "row width mismatch");
        let slot = self.rows_in % BUF_ROWS;
        self.buf[slot * self.width..(slot + 1) * self.width].copy_from_slice(row);
        self.rows_in += 1;
    }

    /// Evaluates lanes `x0 .. x0 + n_lanes` of the centre row. Lanes past
    /// `limit` are left untagged. Returns the number of active lanes.
    fn evaluate_lanes(&mut self, yc: usize, x0: usize, limit: usize) -> usize {
        let active = self.n_lanes.min(limit - x0);
        if active == self.n_lanes {
            match active {
                1 => self.evaluate_full::<1>(yc, x0),
                4 => self.evaluate_full::<4>(yc, x0),
                8 => self.evaluate_full::<8>(yc, x0),
                _ => self.evaluate_full::<16>(yc, x0),
            }
        } else {
            self.evaluate_partial(yc, x0, active);
        }
        for lane in 0..active {
            self.tag[lane] =
                has_arc(self.bright[lane], self.cfg.arc_length) || has_arc(self.dark[lane], self.cfg.arc_length);
        }
        self.tag[active..self.n_lanes].fill(false);
        active
    }

    /// Buffer offset of each circle pixel relative to the lane's column.
    fn taps(&self, yc: usize) -> [isize; 16] {
        std::array::from_fn(|i| {
            let (dx, dy) = CIRCLE[i];
            let slot = (yc as isize + dy) as usize % BUF_ROWS;
            (slot * self.width) as isize + dx
        })
    }

    /// Fixed-width chunk; the lane loops have a compile-time trip count.
    fn evaluate_full<const N: usize>(&mut self, yc: usize, x0: usize) {
        let t = self.cfg.threshold as i16;
        let taps = self.taps(yc);
        let c0 = (yc % BUF_ROWS) * self.width + x0;
        let centre: [u8; N] = self.buf[c0..c0 + N].try_into().expect("N lanes");
        let mut bright = [0u16; N];
        let mut dark = [0u16; N];
        for (i, &tap) in taps.iter().enumerate() {
            let start = (tap + x0 as isize) as usize;
            let ring: [u8; N] = self.buf[start..start + N].try_into().expect("N lanes");
            let diff = &mut self.diff[i];
            for lane in 0..N {
                let d = ring[lane] as i16 - centre[lane] as i16;
                diff[lane] = d;
                bright[lane] |= ((d > t) as u16) << i;
                dark[lane] |= ((d < -t) as u16) << i;
            }
        }
        self.bright[..N].copy_from_slice(&bright);
        self.dark[..N].copy_from_slice(&dark);
    }

    fn evaluate_partial(&mut self, yc: usize, x0: usize, active: usize) {
        let t = self.cfg.threshold as i16;
        let taps = self.taps(yc);
        let c0 = (yc % BUF_ROWS) * self.width + x0;
        self.bright[..active].fill(0);
        self.dark[..active].fill(0);
        for (i, &tap) in taps.iter().enumerate() {
            let start = (tap + x0 as isize) as usize;
            for lane in 0..active {
                let d = self.buf[start + lane] as i16 - self.buf[c0 + lane] as i16;
                self.diff[i][lane] = d;
                self.bright[lane] |= ((d > t) as u16) << i;
                self.dark[lane] |= ((d < -t) as u16) << i;
            }
        }
    }

    /// Maximum threshold for a tagged lane: the best arc's smallest margin, minus one.
    fn lane_score(&self, lane: usize) -> u8 {
        let mut ring = [0i16; 32];
        for i in 0..16 {
            ring[i] = self.diff[i][lane];
            ring[i + 16] = ring[i];
        }
        // Running min / max over the arc starting at each ring position.
        let mut lo: [i16; 16] = std::array::from_fn(|s| ring[s]);
        let mut hi = lo;
        for k in 1..self.cfg.arc_length as usize {
            for s in 0..16 {
                lo[s] = lo[s].min(ring[s + k]);
                hi[s] = hi[s].max(ring[s + k]);
            }
        }
        let best = (0..16).map(|s| lo[s].max(-hi[s])).max().expect("16 starts");
        (best - 1) as u8
    }

    /// Scores the centre row and stores it in the NMS ring.
    ///
    /// Returns `(x, score)` for every candidate in the row.
    pub fn process_centre_row(&mut self) -> Vec<(usize, u8)> {
        let yc = self.centre_row().expect("seven rows must be buffered");
        let row_start = (yc % self.cfg.nms_window) * self.width;
        self.nms_row_mut(yc).fill(0);
        let mut found = Vec::new();
        let limit = self.width - BORDER;
        let mut x0 = BORDER;
        while x0 < limit {
            let active = self.evaluate_lanes(yc, x0, limit);
            for lane in 0..active {
                if self.tag[lane] {
                    let s = self.lane_score(lane);
                    self.buf_nms[row_start + x0 + lane] = s;
                    found.push((x0 + lane, s));
                }
            }
            x0 += self.n_lanes;
        }
        found
    }

    /// Records an all-zero score row (border rows and flush padding).
    fn clear_score_row(&mut self, y: usize) {
        self.nms_row_mut(y).fill(0);
    }

    /// Suppresses row `y`; rows `y - r ..= y + r` must be in the ring.
    fn retire_row(&self, y: usize, height: usize, out: &mut Vec<Corner>) {
        let r = self.cfg.nms_window / 2;
        let w = self.width;
        let own_row = self.nms_row(y);
        let y0 = y.saturating_sub(r);
        let y1 = (y + r).min(height - 1);
        for (x, &own) in own_row.iter().enumerate().take(w - BORDER).skip(BORDER) {
            if own == 0 {
                continue;
            }
            let (x0, x1) = (x.saturating_sub(r), (x + r).min(w - 1));
            let beaten = (y0..=y1).any(|ny| self.nms_row(ny)[x0..=x1].iter().any(|&s| s > own));
            if !beaten {
                out.push(Corner::new(x as u32, y as u32, own as f64, 0));
            }
        }
    }
}

/// Streaming FAST with `n_lanes` pixels evaluated per step.
pub fn detect_fast_batch(img: &Image, cfg: &FastConfig, n_lanes: usize) -> Result<Vec<Corner>, FastError> {
    let mut state = FastBatchState::new(img.width(), *cfg, n_lanes)?;
    if img.width() < BUF_ROWS || img.height() < BUF_ROWS {
        return Err(FastError::ImageTooSmall { width: img.width(), height: img.height() });
    }
    let h = img.height();
    let r = cfg.nms_window / 2;
    let mut out = Vec::new();

    // Score rows shallower than the border are never candidates.
    for y in 0..BORDER.min(h) {
        state.clear_score_row(y);
    }
    let last_centre = h - 1 - BORDER;
    for y_in in 0..h {
        state.push_row(img.row(y_in));
        let Some(yc) = state.centre_row() else { continue };
        state.process_centre_row();
        if yc >= BORDER + r {
            state.retire_row(yc - r, h, &mut out);
        }
    }
    // Drain: the last `r` rows retire against zeroed padding rows.
    for pad in 1..=r {
        let y = last_centre + pad;
        state.clear_score_row(y);
        if let Some(retiring) = y.checked_sub(r).filter(|&ry| ry >= BORDER) {
            state.retire_row(retiring, h, &mut out);
        }
    }
    // Windows larger than the interior never reach `yc >= BORDER + r`.
    debug_assert!(out.windows(2).all(|p| (p[0].y, p[0].x) < (p[1].y, p[1].x)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{detect_fast, fast_score, segment_test};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(w: usize, h: usize, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Image::from_fn(w, h, |_, _| rng.gen()).unwrap()
    }

    #[test]
    fn rejects_unsupported_lanes() {
        let img = Image::filled(16, 16, 0).unwrap();
        for n in [0, 2, 3, 5, 32] {
            assert_eq!(detect_fast_batch(&img, &FastConfig::default(), n), Err(FastError::UnsupportedLaneCount(n)));
        }
    }

    #[test]
    fn bright_dot_all_lane_counts() {
        let mut img = Image::filled(17, 17, 50).unwrap();
        img.set(8, 8, 200);
        for n in SUPPORTED_LANES {
            assert_eq!(detect_fast_batch(&img, &FastConfig::default(), n).unwrap(), vec![Corner::new(8, 8, 149.0, 0)]);
        }
    }

    #[test]
    fn single_lane_trace_matches_scalar() {
        let img = random_image(40, 24, 9);
        let cfg = FastConfig::default();
        let mut state = FastBatchState::new(img.width(), cfg, 1).unwrap();
        for y_in in 0..img.height() {
            state.push_row(img.row(y_in));
            let Some(yc) = state.centre_row() else { continue };
            assert_eq!(state.buffered_rows(), yc - 3..yc + 4);
            let row = state.process_centre_row();
            let expected: Vec<(usize, u8)> = (BORDER..img.width() - BORDER)
                .filter(|&x| segment_test(&img, x, yc, cfg.threshold, cfg.arc_length).unwrap())
                .map(|x| (x, fast_score(&img, x, yc, &cfg).unwrap()))
                .collect();
            assert_eq!(row, expected, "row {yc}");
        }
    }

    #[test]
    fn flags_follow_strict_threshold() {
        let img = random_image(20, 20, 3);
        let cfg = FastConfig::default();
        let mut state = FastBatchState::new(img.width(), cfg, 8).unwrap();
        for y in 0..7 {
            state.push_row(img.row(y));
        }
        state.process_centre_row();
        // Last chunk holds lanes for x = 11..14 only; check its first lane.
        for lane in 0..3 {
            for i in 0..16 {
                let d = state.diff(lane)[i];
                let f = state.flags(lane)[i];
                let expect = if d > 10 {
                    FLAG_BRIGHT
                } else if d < -10 {
                    FLAG_DARK
                } else {
                    FLAG_NONE
                };
                assert_eq!(f, expect);
            }
        }
    }

    #[test]
    fn matches_scalar_for_wide_windows_and_arcs() {
        for seed in 0..6 {
            let img = random_image(37, 29, seed);
            for cfg in [
                FastConfig { threshold: 20, ..FastConfig::default() },
                FastConfig { nms_window: 5, ..FastConfig::default() },
                FastConfig { nms_window: 1, ..FastConfig::default() },
                FastConfig { arc_length: 12, threshold: 5, nms_window: 7 },
                FastConfig { nms_window: 41, threshold: 15, ..FastConfig::default() },
            ] {
                let scalar = detect_fast(&img, &cfg).unwrap();
                for n in SUPPORTED_LANES {
                    assert_eq!(detect_fast_batch(&img, &cfg, n).unwrap(), scalar, "{cfg:?} n={n}");
                }
            }
        }
    }

    #[test]
    fn minimum_size_image() {
        let img = random_image(7, 7, 11);
        let scalar = detect_fast(&img, &FastConfig::default()).unwrap();
        assert_eq!(detect_fast_batch(&img, &FastConfig::default(), 4).unwrap(), scalar);
    }
}
