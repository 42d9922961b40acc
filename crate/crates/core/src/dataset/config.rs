//! Generation config file (TOML).
//!
//! ```toml
//! inputs = ["photos/**/*.png"]   # globs, relative to this file
//! patch_size = 156
//! downscale_factor = 2
//! pairs_per_image = 1
//! workers = 4                    # optional, defaults to all cores
//! bank = "builtin"               # or a bank directory
//! curve_count = 200              # optional, keep the first N curves
//! profile_count = 11             # optional, keep the first N profiles
//! exposure = "standard"          # preset name or { e_lo = .., e_hi = .. }
//! wb_reference_channel = "blue"  # "blue" (w_b = 1) or "green" (w_g = 1)
//! decoupled = false              # independent unprocessing draw
//! target = "source"              # or "rerendered"
//! bit_depth = 8                  # 8 or 16
//!
//! [noise]
//! lambda_s_min = 1e-4
//! lambda_s_max = 1.2e-2
//! a_r = 2.18
//! b_r = 1.20
//! sigma_r = 0.26
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bank::AssetBank;
use crate::degrade::{ExposureRange, NoiseModel};
use crate::error::{Error, Result};
use crate::forward_isp::WbReference;
use crate::pair::TargetMode;
use crate::sampler::SamplerConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExposureSetting {
    Preset(String),
    Range(ExposureRange),
}

impl ExposureSetting {
    pub fn resolve(&self) -> Result<ExposureRange> {
        let range = match self {
            ExposureSetting::Preset(name) => ExposureRange::preset(name)?,
            ExposureSetting::Range(r) => *r,
        };
        range.validate()?;
        Ok(range)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerationConfig {
    pub inputs: Vec<String>,
    pub patch_size: usize,
    pub downscale_factor: usize,
    pub pairs_per_image: usize,
    /// Runtime knob only; never part of the manifest.
    #[serde(skip_serializing)]
    pub workers: Option<usize>,
    pub bank: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve_count: Option<usize>,
    pub exposure: ExposureSetting,
    pub noise: NoiseModel,
    pub wb_reference_channel: WbReference,
    pub decoupled: bool,
    pub target: TargetMode,
    pub bit_depth: u8,
}

pub const BUILTIN_BANK: &str = "builtin";

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            patch_size: 156,
            downscale_factor: 2,
            pairs_per_image: 1,
            workers: None,
            bank: BUILTIN_BANK.into(),
            profile_count: None,
            curve_count: None,
            exposure: ExposureSetting::Preset("standard".into()),
            noise: NoiseModel::default(),
            wb_reference_channel: WbReference::Blue,
            decoupled: false,
            target: TargetMode::Source,
            bit_depth: 8,
        }
    }
}

impl GenerationConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file, resolving relative input globs and bank path
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |s: &str| -> String {
            if Path::new(s).is_absolute() {
                s.to_string()
            } else {
                base.join(s).to_string_lossy().into_owned()
            }
        };
        self.inputs = self.inputs.iter().map(|s| join(s)).collect();
        if self.bank != BUILTIN_BANK {
            self.bank = join(&self.bank);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_size == 0 || !self.patch_size.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "patch_size must be even and positive, got {}",
                self.patch_size
            )));
        }
        if self.pairs_per_image == 0 {
            return Err(Error::Config("pairs_per_image must be at least 1".into()));
        }
        if !self.downscale_factor.is_power_of_two() {
            return Err(Error::Config(format!(
                "downscale_factor must be a power of two, got {}",
                self.downscale_factor
            )));
        }
        if !matches!(self.bit_depth, 8 | 16) {
            return Err(Error::Config(format!(
                "bit_depth must be 8 or 16, got {}",
                self.bit_depth
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        self.sampler()?.validate()
    }

    pub fn sampler(&self) -> Result<SamplerConfig> {
        Ok(SamplerConfig {
            exposure: self.exposure.resolve()?,
            noise: self.noise,
            wb_reference_channel: self.wb_reference_channel,
            decoupled: self.decoupled,
        })
    }

    pub fn load_bank(&self) -> Result<AssetBank> {
        let full = if self.bank == BUILTIN_BANK {
            AssetBank::builtin()
        } else {
            AssetBank::load(&PathBuf::from(&self.bank))?
        };
        if self.profile_count.is_none() && self.curve_count.is_none() {
            return Ok(full);
        }
        full.truncated(self.profile_count, self.curve_count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty_file() {
        let cfg = GenerationConfig::from_toml("").unwrap();
        assert_eq!(cfg.patch_size, 156);
        assert_eq!(cfg.downscale_factor, 2);
        assert_eq!(cfg.sampler().unwrap().exposure, ExposureRange::STANDARD);
    }

    #[test]
    fn exposure_forms() {
        let cfg = GenerationConfig::from_toml("exposure = \"extreme\"").unwrap();
        assert_eq!(cfg.sampler().unwrap().exposure, ExposureRange::EXTREME);
        let cfg = GenerationConfig::from_toml("exposure = { e_lo = 0.5, e_hi = 0.5 }").unwrap();
        assert_eq!(
            cfg.sampler().unwrap().exposure,
            ExposureRange::constant(0.5)
        );
        assert!(GenerationConfig::from_toml("exposure = \"bright\"").is_err());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(GenerationConfig::from_toml("patch_size = 155").is_err());
        assert!(GenerationConfig::from_toml("pairs_per_image = 0").is_err());
        assert!(GenerationConfig::from_toml("bit_depth = 12").is_err());
        assert!(GenerationConfig::from_toml("downscale_factor = 3").is_err());
        assert!(GenerationConfig::from_toml("colour = 1").is_err());
        assert!(GenerationConfig::from_toml("[noise]\nlambda_s_min = -1.0").is_err());
    }

    #[test]
    fn relative_paths_follow_config_dir() {
        let mut cfg =
            GenerationConfig::from_toml("inputs = [\"a/*.png\"]\nbank = \"assets\"").unwrap();
        cfg.resolve_paths(Path::new("/data/run"));
        assert_eq!(cfg.inputs, vec!["/data/run/a/*.png".to_string()]);
        assert_eq!(cfg.bank, "/data/run/assets");
    }

    #[test]
    fn shipped_default_config_parses() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("config/default.toml");
        let cfg = GenerationConfig::load(&path).unwrap();
        assert_eq!(cfg.noise, NoiseModel::default());
        assert_eq!(cfg.load_bank().unwrap().hash(), AssetBank::builtin().hash());
    }
}
