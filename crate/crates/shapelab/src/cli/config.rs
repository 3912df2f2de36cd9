//! Run configuration: a TOML file with strict keys, overridable by flags.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::RenderSettings;
use crate::model::{AugmentConfig, MlpConfig, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderConfig {
    pub image_size: usize,
    pub supersample: usize,
    pub subdivision: u32,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig { image_size: 36, supersample: 2, subdivision: 4 }
    }
}

impl RenderConfig {
    pub fn settings(&self) -> RenderSettings {
        RenderSettings {
            image_size: self.image_size,
            supersample: self.supersample,
            subdivision: self.subdivision,
            ..RenderSettings::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub size: usize,
    pub train_backgrounds: Vec<usize>,
    pub eval_backgrounds: Vec<usize>,
    /// Number of independent stimulus seed streams in the training sweep;
    /// probing always uses a held-out stream.
    pub train_seed_streams: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            size: 20,
            train_backgrounds: vec![0, 1, 2, 3, 4, 5, 6, 7],
            eval_backgrounds: vec![8, 9],
            train_seed_streams: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RotationConfig {
    pub train_objects: usize,
    pub eval_objects: usize,
    pub views_per_object: usize,
    pub epochs: usize,
}

impl Default for RotationConfig {
    fn default() -> Self {
        RotationConfig { train_objects: 40, eval_objects: 12, views_per_object: 6, epochs: 40 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LightingConfig {
    pub setups: usize,
    pub sweep_size: usize,
    pub background: usize,
}

impl Default for LightingConfig {
    fn default() -> Self {
        LightingConfig { setups: 100, sweep_size: 8, background: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CueConfig {
    pub sweep_size: usize,
    pub background: usize,
}

impl Default for CueConfig {
    fn default() -> Self {
        CueConfig { sweep_size: 8, background: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CamConfig {
    pub image_size: usize,
    pub channels: usize,
    pub steps: usize,
    pub samples: usize,
}

impl Default for CamConfig {
    fn default() -> Self {
        CamConfig { image_size: 16, channels: 8, steps: 150, samples: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub render: RenderConfig,
    pub train: TrainConfig,
    pub augment: AugmentConfig,
    pub sweep: SweepConfig,
    pub rotation: RotationConfig,
    pub lighting: LightingConfig,
    pub cues: CueConfig,
    pub cam: CamConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn mlp_config(&self) -> MlpConfig {
        MlpConfig {
            input_dim: self.augment.crop * self.augment.crop * 3,
            ..MlpConfig::default()
        }
    }

    /// Serialize and write the fully resolved config next to run outputs.
    pub fn write_resolved(&self, out_dir: &Path) -> Result<()> {
        let text =
            toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(out_dir.join("resolved_config.toml"), text)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.render.image_size < self.augment.crop {
            return Err(Error::Config("render image_size smaller than augment crop".into()));
        }
        if self.sweep.size < 2 {
            return Err(Error::Config("sweep size must be at least 2".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_roundtrips() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let text = toml::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err: std::result::Result<RunConfig, _> = toml::from_str("nonsense = 3\n");
        assert!(err.is_err());
        let err: std::result::Result<RunConfig, _> =
            toml::from_str("[render]\nimage_size = 36\nbogus = 1\n");
        assert!(err.is_err());
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg: RunConfig = toml::from_str("seed = 9\n[sweep]\nsize = 5\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.sweep.size, 5);
        assert_eq!(cfg.render.image_size, 36);
    }
}
