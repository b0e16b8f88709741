use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::detector::DetectorSettings;
use crate::flow::LkParams;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlurConfig {
    pub enabled: bool,
    pub ksize: usize,
    pub sigma: f64,
}

impl Default for BlurConfig {
    fn default() -> Self {
        Self { enabled: false, ksize: 5, sigma: 1.0 }
    }
}

/// One front-end configuration: optional blur, pyramid, detector, tracker.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub detection: DetectorSettings,
    pub blur: BlurConfig,
    /// Pyramid depth shared by detection and tracking.
    pub pyramid_levels: usize,
    pub flow: LkParams,
    /// Strongest corners of the previous frame handed to the tracker.
    pub max_tracks: usize,
    /// Each stage runs this many times per frame; the median is reported.
    pub repetitions: usize,
    /// Leading frames processed but excluded from the steady-state figures.
    pub warmup: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            detection: DetectorSettings::default(),
            blur: BlurConfig::default(),
            pyramid_levels: 3,
            flow: LkParams::default(),
            max_tracks: 300,
            repetitions: 3,
            warmup: 5,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.repetitions == 0 {
            return Err(BenchError::InvalidConfig("repetitions must be >= 1".into()));
        }
        if self.pyramid_levels == 0 {
            return Err(BenchError::InvalidConfig("pyramid_levels must be >= 1".into()));
        }
        if self.blur.enabled && self.blur.ksize.is_multiple_of(2) {
            return Err(BenchError::InvalidConfig(format!("blur ksize {} must be odd", self.blur.ksize)));
        }
        self.flow.validate()?;
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, BenchError> {
        let cfg: Self = toml::from_str(text).map_err(|e| BenchError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }
}

/// User-supplied power figures in watts. Energy is always modeled as
/// power × measured time, never measured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerModel {
    #[serde(default)]
    pub label: String,
    pub processor_w: f64,
    pub accelerator_w: f64,
    pub total_w: f64,
}

impl PowerModel {
    pub fn validate(&self) -> Result<(), BenchError> {
        let all = [self.processor_w, self.accelerator_w, self.total_w];
        if all.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(BenchError::InvalidConfig("power figures must be finite and >= 0".into()));
        }
        if self.total_w < self.processor_w.max(self.accelerator_w) {
            return Err(BenchError::InvalidConfig(format!(
                "total_w {} is below processor_w {} or accelerator_w {}",
                self.total_w, self.processor_w, self.accelerator_w
            )));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, BenchError> {
        let model: Self = toml::from_str(text).map_err(|e| BenchError::InvalidConfig(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::DetectorKind;

    #[test]
    fn pipeline_toml() {
        let cfg = PipelineConfig::from_toml_str(
            "repetitions = 1\nwarmup = 0\n[detection]\ndetector = \"fast_batch\"\nlanes = 16\n[blur]\nenabled = true\n[flow]\nwindow = 15\n",
        )
        .unwrap();
        assert_eq!(cfg.detection.detector, DetectorKind::FastBatch);
        assert_eq!(cfg.detection.lanes, 16);
        assert!(cfg.blur.enabled);
        assert_eq!(cfg.blur.ksize, 5);
        assert_eq!(cfg.flow.window, 15);
        assert_eq!(cfg.pyramid_levels, 3);
        assert!(PipelineConfig::from_toml_str("repetitions = 0").is_err());
        assert!(PipelineConfig::from_toml_str("[flow]\nwindow = 4").is_err());
        assert!(PipelineConfig::from_toml_str("unknown = 3").is_err());
    }

    #[test]
    fn power_model_invariants() {
        let m = PowerModel::from_toml_str("processor_w = 4.4\naccelerator_w = 8.8\ntotal_w = 20.4").unwrap();
        assert_eq!(m.accelerator_w, 8.8);
        assert!(PowerModel::from_toml_str("processor_w = 4.4\naccelerator_w = 8.8\ntotal_w = 5").is_err());
        assert!(PowerModel::from_toml_str("processor_w = -1\naccelerator_w = 0\ntotal_w = 5").is_err());
    }

    #[test]
    fn shipped_reference_configs_parse() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
        let power: Vec<_> = fs::read_dir(dir.join("power")).unwrap().map(|e| e.unwrap().path()).collect();
        assert!(power.len() >= 7);
        for p in power {
            PowerModel::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        }
        assert_eq!(PipelineConfig::load(dir.join("pipeline.toml")).unwrap(), PipelineConfig::default());
    }
}
