//! Exposure-adjustment curves: the monotone map that carries the luma
//! distribution of a low-light image onto that of its normal-light pair.
//! A steeper curve means a darker input.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dataset::io::{ingest, list_images};
use crate::error::{Error, Result};
use crate::image::rgb_to_y;

/// Points at which every curve is reported, `x = i / 255`.
pub const CURVE_POINTS: usize = 256;

/// Quantile levels used to pair the two distributions.
const QUANTILES: usize = 1024;

/// Linear interpolation between order statistics of a sorted sample.
fn quantile(sorted: &[f32], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let t = pos - i as f64;
    let a = sorted[i] as f64;
    match sorted.get(i + 1) {
        Some(&b) => a + t * (b as f64 - a),
        None => a,
    }
}

/// Histogram-matching curve from `low` luma to `gt` luma, sampled at
/// [`CURVE_POINTS`] evenly spaced inputs on `[0, 1]`.
///
/// Matched quantile pairs `(Q_low(p), Q_gt(p))` form a piecewise-linear
/// map; equal `Q_low` values are merged by averaging their targets. The
/// map is anchored at `(0, 0)` and `(1, 1)` where the data do not reach
/// the ends, so it is monotone with `c(0) >= 0` and `c(1) <= 1`.
pub fn matching_curve(low: &[f32], gt: &[f32]) -> Result<Vec<f64>> {
    if low.is_empty() || gt.is_empty() {
        return Err(Error::InvalidParam("empty luma sample".into()));
    }
    let sort = |v: &[f32]| {
        let mut s: Vec<f32> = v.iter().map(|x| x.clamp(0.0, 1.0)).collect();
        s.sort_by(f32::total_cmp);
        s
    };
    let (low, gt) = (sort(low), sort(gt));

    let mut knots: Vec<(f64, f64, usize)> = Vec::with_capacity(QUANTILES + 2);
    for k in 0..QUANTILES {
        let p = k as f64 / (QUANTILES - 1) as f64;
        let (x, y) = (quantile(&low, p), quantile(&gt, p));
        match knots.last_mut() {
            Some((lx, ly, n)) if *lx == x => {
                *ly += y;
                *n += 1;
            }
            _ => knots.push((x, y, 1)),
        }
    }
    let mut pts: Vec<(f64, f64)> = knots
        .into_iter()
        .map(|(x, y, n)| (x, y / n as f64))
        .collect();
    if pts[0].0 > 0.0 {
        pts.insert(0, (0.0, 0.0));
    }
    if pts[pts.len() - 1].0 < 1.0 {
        pts.push((1.0, 1.0));
    }

    Ok((0..CURVE_POINTS)
        .map(|i| {
            let x = i as f64 / (CURVE_POINTS - 1) as f64;
            let j = pts.partition_point(|p| p.0 <= x);
            if j == 0 {
                return pts[0].1;
            }
            if j == pts.len() {
                return pts[j - 1].1;
            }
            let ((x0, y0), (x1, y1)) = (pts[j - 1], pts[j]);
            y0 + (x - x0) / (x1 - x0) * (y1 - y0)
        })
        .collect())
}

/// Mean slope of a sampled curve over `[0, x]`, i.e. `c(x) / x`.
///
/// Dark inputs occupy only the first few codes, so the curve is steep there
/// and nearly flat beyond the data; the chord from the origin reflects how
/// far the input has to be lifted, where a local derivative would not.
pub fn chord_slope(curve: &[f64], x: f64) -> f64 {
    let pos = x * (curve.len() - 1) as f64;
    let i = (pos.floor() as usize).min(curve.len() - 2);
    let t = pos - i as f64;
    let y = curve[i] + t * (curve[i + 1] - curve[i]);
    y / x
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairCurve {
    pub pair: String,
    pub curve: Vec<f64>,
}

fn by_name(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    Ok(list_images(dir)?
        .into_iter()
        .filter_map(|p| {
            let name = p.file_name()?.to_str()?.to_string();
            Some((name, p))
        })
        .collect())
}

fn luma(path: &Path) -> Result<Vec<f32>> {
    Ok(rgb_to_y(&ingest(path)?)?.data)
}

/// One curve per file name present in both directories.
pub fn compare_exposure_curves(low_dir: &Path, gt_dir: &Path) -> Result<Vec<PairCurve>> {
    let low = by_name(low_dir)?;
    let gt = by_name(gt_dir)?;
    if let Some(name) = low
        .keys()
        .find(|k| !gt.contains_key(*k))
        .or_else(|| gt.keys().find(|k| !low.contains_key(*k)))
    {
        return Err(Error::Unpaired(name.clone()));
    }
    if low.is_empty() {
        return Err(Error::NoInputs(low_dir.display().to_string()));
    }
    low.iter()
        .map(|(name, path)| {
            let curve = matching_curve(&luma(path)?, &luma(&gt[name])?)?;
            let pair = Path::new(name)
                .file_stem()
                .map_or(name.clone(), |s| s.to_string_lossy().into_owned());
            Ok(PairCurve { pair, curve })
        })
        .collect()
}

/// Wide CSV: `pair,c0,...,c255`, one row per pair.
pub fn curves_csv(curves: &[PairCurve]) -> String {
    let mut out = String::from("pair");
    for i in 0..CURVE_POINTS {
        let _ = write!(out, ",c{i}");
    }
    out.push('\n');
    for c in curves {
        out.push_str(&c.pair);
        for v in &c.curve {
            let _ = write!(out, ",{v:.6}");
        }
        out.push('\n');
    }
    out
}

pub fn write_curves_csv(curves: &[PairCurve], path: &Path) -> Result<()> {
    fs::write(path, curves_csv(curves)).map_err(|e| Error::io(path, e))
}
