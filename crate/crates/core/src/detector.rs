//! Uniform entry point over the four detector tiers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corner::Corner;
use crate::fast::{detect_fast, detect_fast_batch, FastConfig, FastError};
use crate::harris::{detect_harris, detect_harris_fixed, FixedPointFormat, HarrisConfig, HarrisError};
use crate::image::{Image, Pyramid};

#[derive(Debug, Error)]
pub enum DetectError {
    #[error(transparent)]
    Fast(#[from] FastError),
    #[error(transparent)]
    Harris(#[from] HarrisError),
    #[error("unknown detector {0:?} (expected fast, fast_batch, harris or harris_fixed)")]
    UnknownDetector(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    #[default]
    Fast,
    FastBatch,
    Harris,
    HarrisFixed,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 4] = [Self::Fast, Self::FastBatch, Self::Harris, Self::HarrisFixed];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fast => "fast",
            Self::FastBatch => "fast_batch",
            Self::Harris => "harris",
            Self::HarrisFixed => "harris_fixed",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorKind {
    type Err = DetectError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| DetectError::UnknownDetector(s.to_string()))
    }
}

/// Detector choice plus the parameters of every tier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSettings {
    pub detector: DetectorKind,
    pub fast: FastConfig,
    pub harris: HarrisConfig,
    pub fixed_format: FixedPointFormat,
    /// Pixels per step for `fast_batch`.
    pub lanes: usize,
}

impl Default for DetectorSettings {
    fn default() -> Self {
        Self {
            detector: DetectorKind::Fast,
            fast: FastConfig::default(),
            harris: HarrisConfig::default(),
            fixed_format: FixedPointFormat::default(),
            lanes: 8,
        }
    }
}

impl DetectorSettings {
    pub fn with_kind(detector: DetectorKind) -> Self {
        Self { detector, ..Self::default() }
    }

    pub fn detect(&self, img: &Image) -> Result<Vec<Corner>, DetectError> {
        Ok(match self.detector {
            DetectorKind::Fast => detect_fast(img, &self.fast)?,
            DetectorKind::FastBatch => detect_fast_batch(img, &self.fast, self.lanes)?,
            DetectorKind::Harris => detect_harris(img, &self.harris)?,
            DetectorKind::HarrisFixed => detect_harris_fixed(img, &self.harris, self.fixed_format)?,
        })
    }

    /// Detects on every pyramid level large enough for the detector. Corners
    /// keep level-local coordinates and carry their level index.
    pub fn detect_pyramid(&self, pyr: &Pyramid) -> Result<Vec<Corner>, DetectError> {
        let min_side = self.min_side();
        let mut all = Vec::new();
        for (l, level) in pyr.levels().iter().enumerate() {
            if level.width() < min_side || level.height() < min_side {
                continue;
            }
            all.extend(self.detect(level)?.into_iter().map(|c| Corner { level: l as u32, ..c }));
        }
        Ok(all)
    }

    /// Smallest image side the selected detector accepts.
    pub fn min_side(&self) -> usize {
        match self.detector {
            DetectorKind::Fast | DetectorKind::FastBatch => 7,
            DetectorKind::Harris | DetectorKind::HarrisFixed => self.harris.sobel_size + self.harris.block_size - 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for k in DetectorKind::ALL {
            assert_eq!(k.as_str().parse::<DetectorKind>().unwrap(), k);
        }
        assert!("orb".parse::<DetectorKind>().is_err());
    }

    #[test]
    fn settings_from_toml() {
        let s: DetectorSettings = toml::from_str(
            "detector = \"harris_fixed\"\nlanes = 4\n[fast]\nthreshold = 20\n[fixed_format]\nfraction_bits = 10\n",
        )
        .unwrap();
        assert_eq!(s.detector, DetectorKind::HarrisFixed);
        assert_eq!(s.fast.threshold, 20);
        assert_eq!(s.fast.arc_length, 9);
        assert_eq!(s.fixed_format.fraction_bits, 10);
        assert_eq!(s.fixed_format.integer_bits, 16);
        assert!(toml::from_str::<DetectorSettings>("bogus = 1").is_err());
    }
}
