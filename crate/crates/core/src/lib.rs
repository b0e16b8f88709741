//! Sparse-feature front-end for visual odometry and SLAM pipelines.
//!
//! The crate covers the localization front-end end to end: image
//! pre-processing ([`image`]), FAST and Harris corner detection in exact and
//! reduced-precision tiers ([`fast`], [`harris`]), pyramidal Lucas-Kanade
//! tracking ([`flow`]) and a profiling harness that breaks run time down per
//! stage and converts it into speedups and modeled energy per frame
//! ([`bench`]).

pub mod bench;
pub mod cli;
pub mod corner;
pub mod detector;
pub mod fast;
pub mod flow;
pub mod harris;
pub mod image;

pub use corner::Corner;
pub use image::{Image, ImageError};
