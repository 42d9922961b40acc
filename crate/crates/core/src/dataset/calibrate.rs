//! Picks an exposure range that makes synthetic data as dark as a set of
//! real low-light references.
//!
//! Each source is pushed through the neutral pipeline (identity camera,
//! no noise) at exposure reduction `e`, and the mean luma of the result is
//! taken. The suggested `e_lo` brings the 95th percentile of synthetic
//! mean luma down to the references' 95th percentile, and `e_hi` brings
//! the 5th percentile down to theirs.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::io::{ingest, list_images};
use crate::degrade::{reduce_exposure, ExposureRange};
use crate::error::{Error, Result};
use crate::forward_isp::{process, ForwardParams};
use crate::image::{rgb_to_y, BayerImage, PlanarImage};
use crate::reverse_isp::{unprocess, ReverseParams};

pub const HISTOGRAM_BINS: usize = 256;

const BISECTION_STEPS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationBounds {
    pub e_min: f64,
    pub e_max: f64,
}

impl Default for CalibrationBounds {
    fn default() -> Self {
        Self {
            e_min: ExposureRange::STANDARD.e_lo,
            e_max: ExposureRange::EXTREME.e_hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    /// Pooled luma histogram of the references, bin `round(255 * y)`.
    pub histogram: Vec<u64>,
    pub reference_mean_y_p5: f64,
    pub reference_mean_y_p95: f64,
    pub suggested: ExposureRange,
}

fn mean(v: &[f32]) -> f64 {
    v.iter().map(|&x| x as f64).sum::<f64>() / v.len() as f64
}

/// Linear interpolation between order statistics.
fn percentile(values: &[f64], p: f64) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let pos = p / 100.0 * (s.len() - 1) as f64;
    let i = pos.floor() as usize;
    let t = pos - i as f64;
    match s.get(i + 1) {
        Some(&b) => s[i] + t * (b - s[i]),
        None => s[i],
    }
}

pub fn luma_histogram<'a>(images: impl IntoIterator<Item = &'a [f32]>) -> Vec<u64> {
    let mut hist = vec![0u64; HISTOGRAM_BINS];
    for y in images.into_iter().flatten() {
        let bin = (y.clamp(0.0, 1.0) * 255.0).round() as usize;
        hist[bin] += 1;
    }
    hist
}

/// Sources held as linear mosaics so each evaluation only re-renders.
struct NeutralSources {
    raws: Vec<BayerImage>,
    forward: ForwardParams,
}

impl NeutralSources {
    fn new(sources: &[PlanarImage]) -> Result<Self> {
        let reverse = ReverseParams::identity();
        let raws = sources
            .par_iter()
            .map(|s| unprocess(&even(s)?, &reverse))
            .collect::<Result<_>>()?;
        Ok(Self {
            raws,
            forward: ForwardParams::identity(),
        })
    }

    /// `p`-th percentile over sources of mean luma at exposure reduction `e`.
    fn mean_y_percentile(&self, e: f64, p: f64) -> Result<f64> {
        let means: Vec<f64> = self
            .raws
            .par_iter()
            .map(|raw| {
                let dark = reduce_exposure(raw, e)?;
                Ok(mean(&rgb_to_y(&process(&dark, &self.forward)?)?.data))
            })
            .collect::<Result<_>>()?;
        Ok(percentile(&means, p))
    }

    /// Smallest-magnitude `e` in `bounds` at which the percentile reaches
    /// `target`; clamps to the bounds when it is out of reach.
    fn solve(&self, p: f64, target: f64, bounds: CalibrationBounds) -> Result<f64> {
        let (mut lo, mut hi) = (bounds.e_min, bounds.e_max);
        if self.mean_y_percentile(lo, p)? <= target {
            return Ok(lo);
        }
        if self.mean_y_percentile(hi, p)? > target {
            return Ok(hi);
        }
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if self.mean_y_percentile(mid, p)? > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Crops to even dimensions so the image can be mosaicked.
fn even(img: &PlanarImage) -> Result<PlanarImage> {
    let (h, w) = (img.height() & !1, img.width() & !1);
    if (h, w) == (img.height(), img.width()) {
        return Ok(img.clone());
    }
    img.crop(0, 0, w, h)
}

pub fn calibrate(
    references: &[PlanarImage],
    sources: &[PlanarImage],
    bounds: CalibrationBounds,
) -> Result<Calibration> {
    if references.is_empty() {
        return Err(Error::NoInputs("no reference images".into()));
    }
    if sources.is_empty() {
        return Err(Error::NoInputs("no source images".into()));
    }
    if !(bounds.e_min.is_finite() && bounds.e_max.is_finite() && bounds.e_max >= bounds.e_min) {
        return Err(Error::InvalidParam(format!(
            "calibration bounds [{}, {}]",
            bounds.e_min, bounds.e_max
        )));
    }
    let lumas: Vec<Vec<f32>> = references
        .iter()
        .map(|r| rgb_to_y(r).map(|l| l.data))
        .collect::<Result<_>>()?;
    let histogram = luma_histogram(lumas.iter().map(Vec::as_slice));
    let ref_means: Vec<f64> = lumas.iter().map(|l| mean(l)).collect();
    let r5 = percentile(&ref_means, 5.0);
    let r95 = percentile(&ref_means, 95.0);

    let neutral = NeutralSources::new(sources)?;
    let a = neutral.solve(95.0, r95, bounds)?;
    let b = neutral.solve(5.0, r5, bounds)?;
    Ok(Calibration {
        histogram,
        reference_mean_y_p5: r5,
        reference_mean_y_p95: r95,
        suggested: ExposureRange {
            e_lo: a.min(b),
            e_hi: a.max(b),
        },
    })
}

pub fn calibrate_dirs(
    refs: &Path,
    sources: &Path,
    bounds: CalibrationBounds,
) -> Result<Calibration> {
    let load = |dir: &Path| -> Result<Vec<PlanarImage>> {
        let files = list_images(dir)?;
        if files.is_empty() {
            return Err(Error::NoInputs(dir.display().to_string()));
        }
        files.iter().map(|p| ingest(p)).collect()
    };
    calibrate(&load(refs)?, &load(sources)?, bounds)
}
