//! One low-light / normal-light pair from one crop.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bank::AssetBank;
use crate::dataset::config::GenerationConfig;
use crate::degrade::degrade;
use crate::error::{Error, Result};
use crate::forward_isp::process;
use crate::image::{ColorState, PlanarImage};
use crate::reverse_isp::unprocess;
use crate::sampler::{sample_pair_params, SampledParams, SamplerConfig};

/// What the normal-light half of a pair is.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetMode {
    /// The source crop, untouched.
    #[default]
    Source,
    /// The crop unprocessed and rendered again without degradation.
    Rerendered,
}

/// `low = process(degrade(unprocess(crop)))`, with the target chosen by
/// `target`. All randomness comes from `params`.
pub fn synthesize(
    crop: &PlanarImage,
    params: &SampledParams,
    bank: &AssetBank,
    target: TargetMode,
) -> Result<(PlanarImage, PlanarImage)> {
    crop.expect_state("synthesize", ColorState::SrgbNonlinear)?;
    let forward = params.isp.forward(bank)?;
    let reverse = params.reverse_draw().reverse(bank)?;
    let raw = unprocess(crop, &reverse)?;
    let mut rng = params.noise_rng();
    let dark = degrade(&raw, params.e, params.lambda_s, params.lambda_r, &mut rng)?;
    let low = process(&dark, &forward)?;
    let normal = match target {
        TargetMode::Source => crop.clone(),
        TargetMode::Rerendered => process(&raw, &forward)?,
    };
    Ok((low, normal))
}

/// In-process pair source for data loaders. Immutable after construction,
/// so one handle may serve concurrent callers.
#[derive(Debug, Clone)]
pub struct Generator {
    bank: AssetBank,
    sampler: SamplerConfig,
    target: TargetMode,
    seed: u64,
}

/// One synthesized pair as interleaved `HxWx3` buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct PairArrays {
    pub low: Vec<f32>,
    pub normal: Vec<f32>,
    pub params: SampledParams,
}

impl Generator {
    pub fn new(config: &GenerationConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            bank: config.load_bank()?,
            sampler: config.sampler()?,
            target: config.target,
            seed,
        })
    }

    pub fn from_config_path(path: &Path, seed: u64) -> Result<Self> {
        Self::new(&GenerationConfig::load(path)?, seed)
    }

    pub fn bank(&self) -> &AssetBank {
        &self.bank
    }

    pub fn params(&self, index: u64) -> SampledParams {
        sample_pair_params(&self.bank, &self.sampler, self.seed, index)
    }

    /// Pair `index` from `image` (`HxWx3`, values in `[0, 1]`). Matches
    /// the pair the batch generator writes for the same crop and index.
    pub fn synthesize_pair(
        &self,
        image: &[f32],
        height: usize,
        width: usize,
        index: u64,
    ) -> Result<PairArrays> {
        if let Some(v) = image.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParam(format!(
                "image sample {v} outside [0, 1]"
            )));
        }
        let crop = PlanarImage::from_interleaved(height, width, image, ColorState::SrgbNonlinear)?;
        let params = self.params(index);
        let (low, normal) = synthesize(&crop, &params, &self.bank, self.target)?;
        Ok(PairArrays {
            low: low.to_interleaved(),
            normal: normal.to_interleaved(),
            params,
        })
    }
}
