//! Per-channel tone curves sampled on a uniform grid over `[0, 1]`.
//!
//! A curve is the pair (b, t): knots `b_i = i / (n - 1)` and values `t_i`.
//! Evaluation is piecewise-linear between knots, and inversion undoes that
//! interpolation exactly, segment by segment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ToneCurveFile", into = "ToneCurveFile")]
pub struct ToneCurve {
    samples: [Vec<f32>; 3],
}

/// On-disk layout: `{"n": 256, "r": [...], "g": [...], "b": [...]}`.
#[derive(Serialize, Deserialize)]
struct ToneCurveFile {
    n: usize,
    r: Vec<f32>,
    g: Vec<f32>,
    b: Vec<f32>,
}

impl TryFrom<ToneCurveFile> for ToneCurve {
    type Error = Error;

    fn try_from(f: ToneCurveFile) -> Result<Self> {
        if [&f.r, &f.g, &f.b].iter().any(|c| c.len() != f.n) {
            return Err(Error::InvalidParam(format!(
                "tone curve declares n={} but channel lengths are {}/{}/{}",
                f.n,
                f.r.len(),
                f.g.len(),
                f.b.len()
            )));
        }
        ToneCurve::new([f.r, f.g, f.b])
    }
}

impl From<ToneCurve> for ToneCurveFile {
    fn from(c: ToneCurve) -> Self {
        let [r, g, b] = c.samples;
        ToneCurveFile {
            n: r.len(),
            r,
            g,
            b,
        }
    }
}

impl ToneCurve {
    /// Validates length, range and strict monotonicity of every channel.
    pub fn new(samples: [Vec<f32>; 3]) -> Result<Self> {
        let n = samples[0].len();
        if n < MIN_SAMPLES || samples.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidParam(format!(
                "tone curve needs {MIN_SAMPLES}+ samples per channel, all equal in length"
            )));
        }
        for (channel, t) in samples.iter().enumerate() {
            if t.iter().any(|v| !v.is_finite()) || t[0] < 0.0 || t[n - 1] > 1.0 {
                return Err(Error::InvalidParam(format!(
                    "tone curve channel {channel} must stay within [0, 1]"
                )));
            }
            if let Some(index) = t.windows(2).position(|w| w[1] <= w[0]) {
                return Err(Error::NonMonotoneCurve {
                    channel,
                    index: index + 1,
                });
            }
        }
        Ok(Self { samples })
    }

    /// Same function `f` sampled into all three channels.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let t: Vec<f32> = (0..n)
            .map(|i| f(i as f64 / (n - 1) as f64) as f32)
            .collect();
        Self::new([t.clone(), t.clone(), t])
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |x| x).expect("identity curve is valid")
    }

    pub fn len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        &self.samples[c]
    }

    /// Linear interpolation of channel `c` at `x`, clamping `x` into `[0, 1]`.
    #[inline]
    pub fn eval(&self, c: usize, x: f32) -> f32 {
        let t = &self.samples[c];
        let last = t.len() - 1;
        let pos = x.clamp(0.0, 1.0) as f64 * last as f64;
        let i = (pos.floor() as usize).min(last - 1);
        let frac = pos - i as f64;
        let (t0, t1) = (t[i] as f64, t[i + 1] as f64);
        (t0 + (t1 - t0) * frac) as f32
    }

    /// Inverse of [`eval`](Self::eval) for channel `c`. Values below `t[0]`
    /// map to 0 and values above `t[n-1]` map to 1.
    #[inline]
    pub fn invert(&self, c: usize, y: f32) -> f32 {
        let t = &self.samples[c];
        let last = t.len() - 1;
        if y <= t[0] {
            return 0.0;
        }
        if y >= t[last] {
            return 1.0;
        }
        // first knot strictly above y; t[0] < y < t[last] so 1 <= hi <= last
        let hi = t.partition_point(|&v| v <= y);
        let i = hi - 1;
        let (t0, t1) = (t[i] as f64, t[hi] as f64);
        let frac = (y as f64 - t0) / (t1 - t0);
        ((i as f64 + frac) / last as f64) as f32
    }
}
