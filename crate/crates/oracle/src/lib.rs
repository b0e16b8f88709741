//! Brute-force reference implementations used only by tests.
//!
//! Nothing here calls into the production modules except for reading pixels
//! through [`featfront::Image`]. Every routine favours literal, loop-by-loop
//! evaluation over speed; inputs are expected to be small.

pub mod fast;
pub mod filter;
pub mod flow;
pub mod harris;
pub mod matching;

/// A detection as reported by the oracles: pixel position and score.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detection {
    pub x: u32,
    pub y: u32,
    pub score: f64,
}

/// Seeded uniform-noise image, for building oracle cases.
pub fn noise_image(width: usize, height: usize, seed: u64) -> featfront::Image {
    // SplitMix64, kept local so cases do not depend on any RNG crate.
    let mut state = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut next = move || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    let data = (0..width * height).map(|_| (next() >> 56) as u8).collect();
    featfront::Image::new(width, height, data).expect("non-empty")
}
