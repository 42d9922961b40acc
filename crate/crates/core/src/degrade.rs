//! Low-light degradation in the RAW domain: exposure reduction followed by
//! heteroscedastic Gaussian sensor noise.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{clip01, BayerImage};

/// Shot/read noise gain distribution. All gains are variances in
/// normalized `[0, 1]` intensity units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseModel {
    pub lambda_s_min: f64,
    pub lambda_s_max: f64,
    /// Slope of log read gain against log shot gain.
    pub a_r: f64,
    /// Intercept of the same fit.
    pub b_r: f64,
    /// Standard deviation of log read gain around the fit.
    pub sigma_r: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            lambda_s_min: 1e-4,
            lambda_s_max: 1.2e-2,
            a_r: 2.18,
            b_r: 1.20,
            sigma_r: 0.26,
        }
    }
}

impl NoiseModel {
    /// `lambda_s_min = lambda_s_max = 0` turns noise off.
    pub const NONE: NoiseModel = NoiseModel {
        lambda_s_min: 0.0,
        lambda_s_max: 0.0,
        a_r: 2.18,
        b_r: 1.20,
        sigma_r: 0.26,
    };

    pub fn is_silent(&self) -> bool {
        self.lambda_s_max == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let ok = (self.lambda_s_min > 0.0 || self.lambda_s_min == 0.0 && self.is_silent())
            && self.lambda_s_max >= self.lambda_s_min
            && self.lambda_s_max.is_finite()
            && self.a_r.is_finite()
            && self.b_r.is_finite()
            && self.sigma_r >= 0.0
            && self.sigma_r.is_finite();
        if !ok {
            return Err(Error::InvalidParam(format!("invalid noise model {self:?}")));
        }
        Ok(())
    }
}

/// Exposure reduction range in stops. `lo == hi` pins the exposure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExposureRange {
    pub e_lo: f64,
    pub e_hi: f64,
}

impl ExposureRange {
    /// `e ~ U(0, 4) - 0.5`.
    pub const STANDARD: ExposureRange = ExposureRange {
        e_lo: -0.5,
        e_hi: 3.5,
    };
    /// Divisor in `[1, 2^20]`.
    pub const EXTREME: ExposureRange = ExposureRange {
        e_lo: 0.0,
        e_hi: 20.0,
    };

    pub fn constant(e: f64) -> Self {
        Self { e_lo: e, e_hi: e }
    }

    /// Named presets: `standard`, `extreme`, and `range5` .. `range20`
    /// for divisors up to `2^5`, `2^10`, `2^15`, `2^20`.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "standard" => Ok(Self::STANDARD),
            "extreme" | "range20" => Ok(Self::EXTREME),
            "range5" => Ok(Self {
                e_lo: 0.0,
                e_hi: 5.0,
            }),
            "range10" => Ok(Self {
                e_lo: 0.0,
                e_hi: 10.0,
            }),
            "range15" => Ok(Self {
                e_lo: 0.0,
                e_hi: 15.0,
            }),
            other => Err(Error::Config(format!("unknown exposure preset `{other}`"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_lo.is_finite() && self.e_hi.is_finite() && self.e_hi >= self.e_lo) {
            return Err(Error::InvalidParam(format!(
                "invalid exposure range {self:?}"
            )));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.e_lo + (self.e_hi - self.e_lo) * rng.random::<f64>()
    }
}

/// Divides every sample by `2^e`. No clipping.
pub fn reduce_exposure(raw: &BayerImage, e: f64) -> Result<BayerImage> {
    if !e.is_finite() {
        return Err(Error::InvalidParam(format!("exposure {e} is not finite")));
    }
    let scale = (-e).exp2();
    Ok(raw.map_samples(|v| (v as f64 * scale) as f32))
}

/// Draws `(lambda_s, lambda_r)`: log shot gain uniform over the model's
/// range, log read gain normal around the linear fit. A silent model
/// returns zeros but consumes the same draws.
pub fn sample_noise_gains<R: Rng + ?Sized>(model: &NoiseModel, rng: &mut R) -> (f64, f64) {
    let u: f64 = rng.random();
    let z: f64 = rng.sample(StandardNormal);
    if model.is_silent() {
        return (0.0, 0.0);
    }
    let (lo, hi) = (model.lambda_s_min.ln(), model.lambda_s_max.ln());
    let log_s = lo + (hi - lo) * u;
    let log_r = model.a_r * log_s + model.b_r + model.sigma_r * z;
    (log_s.exp(), log_r.exp())
}

/// Samples `N(y, lambda_r + lambda_s * y)` at every site without clipping.
pub fn add_noise_unclipped<R: Rng + ?Sized>(
    raw: &BayerImage,
    lambda_s: f64,
    lambda_r: f64,
    rng: &mut R,
) -> Result<BayerImage> {
    if !(lambda_s >= 0.0 && lambda_r >= 0.0) {
        return Err(Error::InvalidGain(lambda_s.min(lambda_r)));
    }
    let mut out = raw.clone();
    if lambda_s == 0.0 && lambda_r == 0.0 {
        return Ok(out);
    }
    for v in out.data_mut() {
        let mean = *v as f64;
        let sd = (lambda_r + lambda_s * mean.max(0.0)).sqrt();
        let z: f64 = rng.sample(StandardNormal);
        *v = (mean + sd * z) as f32;
    }
    Ok(out)
}

/// Heteroscedastic Gaussian noise, clipped to `[0, 1]`.
pub fn add_noise<R: Rng + ?Sized>(
    raw: &BayerImage,
    lambda_s: f64,
    lambda_r: f64,
    rng: &mut R,
) -> Result<BayerImage> {
    clip01(&add_noise_unclipped(raw, lambda_s, lambda_r, rng)?)
}

/// Exposure reduction, then noise, then a clip.
pub fn degrade<R: Rng + ?Sized>(
    raw: &BayerImage,
    e: f64,
    lambda_s: f64,
    lambda_r: f64,
    rng: &mut R,
) -> Result<BayerImage> {
    let dark = reduce_exposure(raw, e)?;
    add_noise(&dark, lambda_s, lambda_r, rng)
}
