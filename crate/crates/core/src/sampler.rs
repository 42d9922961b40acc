//! Per-pair random draws. A [`SampledParams`] is both the source of every
//! random choice in a pair and the record needed to replay it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bank::AssetBank;
use crate::degrade::{sample_noise_gains, ExposureRange, NoiseModel};
use crate::error::Result;
use crate::forward_isp::{sample_wb_gains, ForwardParams, WbGains, WbReference};
use crate::reverse_isp::ReverseParams;

/// Stream ids carved out of each pair's child seed.
pub(crate) const STREAM_PARAMS: u64 = 0;
pub(crate) const STREAM_NOISE: u64 = 1;
pub(crate) const STREAM_CROP: u64 = 2;

/// The ISP choices of one rendering direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IspDraw {
    pub wb_gains: WbGains,
    pub profile_id: String,
    pub blend_g: f64,
    pub tone_curve_id: usize,
}

impl IspDraw {
    pub fn forward(&self, bank: &AssetBank) -> Result<ForwardParams> {
        Ok(ForwardParams {
            wb_gains: self.wb_gains,
            profile: bank.profile(&self.profile_id)?.clone(),
            blend_g: self.blend_g,
            tone_curve: bank.curve(self.tone_curve_id)?.clone(),
        })
    }

    pub fn reverse(&self, bank: &AssetBank) -> Result<ReverseParams> {
        self.forward(bank).map(ReverseParams::from)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledParams {
    /// Exposure reduction in stops.
    pub e: f64,
    pub lambda_s: f64,
    pub lambda_r: f64,
    /// Rendering of the low-light image.
    #[serde(flatten)]
    pub isp: IspDraw,
    /// Separate draw for unprocessing; `None` reuses `isp`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unprocess_isp: Option<IspDraw>,
    /// Child seed; the noise stream is derived from it.
    pub seed: u64,
}

impl SampledParams {
    pub fn reverse_draw(&self) -> &IspDraw {
        self.unprocess_isp.as_ref().unwrap_or(&self.isp)
    }

    pub fn noise_rng(&self) -> ChaCha8Rng {
        stream_rng(self.seed, STREAM_NOISE)
    }
}

/// Distribution settings for [`sample_params`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    pub exposure: ExposureRange,
    pub noise: NoiseModel,
    pub wb_reference_channel: WbReference,
    /// Draw unprocessing parameters independently of the rendering ones.
    pub decoupled: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            exposure: ExposureRange::STANDARD,
            noise: NoiseModel::default(),
            wb_reference_channel: WbReference::Blue,
            decoupled: false,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        self.exposure.validate()?;
        self.noise.validate()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of pair `pair_index` under `master_seed`. Depends on nothing else.
pub fn derive_seed(master_seed: u64, pair_index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(pair_index))
}

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn sample_isp<R: Rng + ?Sized>(bank: &AssetBank, config: &SamplerConfig, rng: &mut R) -> IspDraw {
    let wb_gains = sample_wb_gains(rng, config.wb_reference_channel);
    let profile = &bank.profiles()[rng.random_range(0..bank.profiles().len())];
    let blend_g = rng.random::<f64>();
    let tone_curve_id = rng.random_range(0..bank.curves().len());
    IspDraw {
        wb_gains,
        profile_id: profile.id.clone(),
        blend_g,
        tone_curve_id,
    }
}

/// One full draw. `seed` is recorded as the pair's child seed.
pub fn sample_params<R: Rng + ?Sized>(
    bank: &AssetBank,
    config: &SamplerConfig,
    rng: &mut R,
    seed: u64,
) -> SampledParams {
    let e = config.exposure.sample(rng);
    let (lambda_s, lambda_r) = sample_noise_gains(&config.noise, rng);
    let isp = sample_isp(bank, config, rng);
    let unprocess_isp = config.decoupled.then(|| sample_isp(bank, config, rng));
    SampledParams {
        e,
        lambda_s,
        lambda_r,
        isp,
        unprocess_isp,
        seed,
    }
}

/// Draws the parameters of pair `pair_index` from its derived seed.
pub fn sample_pair_params(
    bank: &AssetBank,
    config: &SamplerConfig,
    master_seed: u64,
    pair_index: u64,
) -> SampledParams {
    let seed = derive_seed(master_seed, pair_index);
    let mut rng = stream_rng(seed, STREAM_PARAMS);
    sample_params(bank, config, &mut rng, seed)
}
