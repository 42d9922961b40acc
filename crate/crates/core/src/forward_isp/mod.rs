//! RAW to sRGB rendering: demosaic, white balance, color space transform,
//! tone mapping and gamma.

mod demosaic;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use demosaic::demosaic;

use crate::color::{check_blend, CameraProfile};
use crate::error::{Error, Result};
use crate::image::{clip01, BayerImage, ColorState, PlanarImage};
use crate::tone_curve::ToneCurve;

/// Samples above this level get a gain that eases toward 1 at white.
pub const HIGHLIGHT_THRESHOLD: f64 = 0.9;

/// Upper end of the linear segment of the sRGB transfer function.
pub const GAMMA_LINEAR_CUTOFF: f64 = 0.0031308;
pub const GAMMA_EXPONENT: f64 = 2.4;
pub const GAMMA_OFFSET: f64 = 0.055;

/// Per-channel white balance gains `(w_r, w_g, w_b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WbGains(pub [f64; 3]);

impl WbGains {
    pub const UNIT: WbGains = WbGains([1.0; 3]);

    pub fn validate(&self) -> Result<()> {
        match self.0.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            Some(&w) => Err(Error::InvalidGain(w)),
            None => Ok(()),
        }
    }
}

/// Which channel keeps a unit white balance gain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WbReference {
    /// Red and green are randomized, blue is fixed at 1.
    #[default]
    Blue,
    /// Red and blue are randomized, green is fixed at 1.
    Green,
}

/// Draws gains `1.2 + 2 U(0,1)` for the two non-reference channels.
pub fn sample_wb_gains<R: Rng + ?Sized>(rng: &mut R, reference: WbReference) -> WbGains {
    let mut draw = || 1.2 + 2.0 * rng.random::<f64>();
    match reference {
        WbReference::Blue => {
            let (r, g) = (draw(), draw());
            WbGains([r, g, 1.0])
        }
        WbReference::Green => {
            let (r, b) = (draw(), draw());
            WbGains([r, 1.0, b])
        }
    }
}

#[inline]
fn highlight_weight(y: f64) -> f64 {
    let s = ((y - HIGHLIGHT_THRESHOLD).max(0.0) / (1.0 - HIGHLIGHT_THRESHOLD)).min(1.0);
    s * s
}

/// Applies gain `w` to a linear sample in `[0, 1]`, easing the gain to 1 as
/// the output approaches white. Exact inverse of [`unapply_gain`].
#[inline]
pub(crate) fn apply_gain(x: f64, w: f64) -> f64 {
    let y = w * x;
    if w <= 1.0 || y <= HIGHLIGHT_THRESHOLD {
        return y;
    }
    // Solve y = x * ((1 - a(y)) w + a(y)) for y in (tau, 1], with
    // a = s^2 and y = tau + s (1 - tau). Rationalized root of
    // x (w - 1) s^2 + (1 - tau) s + (tau - x w) = 0.
    let tau = HIGHLIGHT_THRESHOLD;
    let excess = y - tau;
    let a = x * (w - 1.0);
    let b = 1.0 - tau;
    let s = 2.0 * excess / (b + (b * b + 4.0 * a * excess).sqrt());
    tau + s.min(1.0) * b
}

/// Divides by gain `w`, with the effective divisor blending to 1 for
/// samples near white.
#[inline]
pub(crate) fn unapply_gain(y: f64, w: f64) -> f64 {
    if w <= 1.0 {
        return y / w;
    }
    let alpha = highlight_weight(y);
    y / ((1.0 - alpha) * w + alpha)
}

/// Highlight-preserving channel gains, clipped to `[0, 1]`.
pub fn white_balance(img: &PlanarImage, gains: WbGains) -> Result<PlanarImage> {
    img.expect_state("white_balance", ColorState::CameraRgb)?;
    gains.validate()?;
    img.check_finite()?;
    Ok(img.map_channels(|c, v| {
        let x = (v as f64).clamp(0.0, 1.0);
        (apply_gain(x, gains.0[c]) as f32).clamp(0.0, 1.0)
    }))
}

/// Multiplies every pixel by `g * ccm_low + (1 - g) * ccm_high`.
pub fn cst(img: &PlanarImage, profile: &CameraProfile, blend_g: f64) -> Result<PlanarImage> {
    img.expect_state("cst", ColorState::CameraRgb)?;
    check_blend(blend_g)?;
    let m = profile.blend(blend_g);
    Ok(img
        .map_pixels(|p| m.apply(p))
        .with_state(ColorState::CieXyz))
}

/// Per-channel piecewise-linear lookup through `curve`.
pub fn tone_map(img: &PlanarImage, curve: &ToneCurve) -> Result<PlanarImage> {
    img.expect_state("tone_map", ColorState::CieXyz)?;
    Ok(img
        .map_channels(|c, v| curve.eval(c, v))
        .with_state(ColorState::SrgbLinear))
}

#[inline]
pub fn gamma_encode(x: f64) -> f64 {
    if x <= GAMMA_LINEAR_CUTOFF {
        12.92 * x
    } else {
        (1.0 + GAMMA_OFFSET) * x.powf(1.0 / GAMMA_EXPONENT) - GAMMA_OFFSET
    }
}

/// sRGB transfer function.
pub fn gamma_correct(img: &PlanarImage) -> Result<PlanarImage> {
    img.expect_state("gamma_correct", ColorState::SrgbLinear)?;
    Ok(img
        .map_samples(|v| gamma_encode((v as f64).clamp(0.0, 1.0)) as f32)
        .with_state(ColorState::SrgbNonlinear))
}

/// Everything the forward pipeline needs for one rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardParams {
    pub wb_gains: WbGains,
    pub profile: CameraProfile,
    pub blend_g: f64,
    pub tone_curve: ToneCurve,
}

impl ForwardParams {
    pub fn identity() -> Self {
        Self {
            wb_gains: WbGains::UNIT,
            profile: CameraProfile::identity("identity"),
            blend_g: 0.0,
            tone_curve: ToneCurve::identity(256),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.wb_gains.validate()?;
        check_blend(self.blend_g)
    }
}

/// Renders a mosaic to display sRGB in `[0, 1]`.
pub fn process(raw: &BayerImage, params: &ForwardParams) -> Result<PlanarImage> {
    params.validate()?;
    let rgb = demosaic(raw);
    let balanced = white_balance(&rgb, params.wb_gains)?;
    let xyz = cst(&balanced, &params.profile, params.blend_g)?;
    let xyz = clip01(&xyz)?;
    let toned = tone_map(&xyz, &params.tone_curve)?;
    gamma_correct(&toned)
}
