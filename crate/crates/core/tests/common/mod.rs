#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use lowlight_isp::image::{BayerImage, ColorState, PlanarImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as isize;
    let k: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.into_iter().map(|v| v / s).collect()
}

fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Uniform noise blurred with a Gaussian of `sigma`, each channel stretched
/// to `[0.1, 0.9]`.
pub fn smooth_image(seed: u64, h: usize, w: usize, sigma: f64) -> PlanarImage {
    blurred_noise(seed, h, w, sigma, true)
}

/// Uniform noise blurred with a Gaussian of `sigma`; with `stretch`, each
/// channel is then rescaled to span `[0.1, 0.9]`.
pub fn blurred_noise(seed: u64, h: usize, w: usize, sigma: f64, stretch: bool) -> PlanarImage {
    let mut r = rng(seed);
    let k = gaussian_kernel(sigma);
    let rad = (k.len() / 2) as isize;
    let mut data = Vec::with_capacity(3 * h * w);
    for _ in 0..3 {
        let noise: Vec<f64> = (0..h * w).map(|_| r.random::<f64>()).collect();
        let mut tmp = vec![0.0; h * w];
        for y in 0..h {
            for x in 0..w {
                tmp[y * w + x] = k
                    .iter()
                    .enumerate()
                    .map(|(j, kv)| {
                        kv * noise[y * w + clamp_index(x as isize + j as isize - rad, w)]
                    })
                    .sum();
            }
        }
        let mut out = vec![0.0; h * w];
        for y in 0..h {
            for x in 0..w {
                out[y * w + x] = k
                    .iter()
                    .enumerate()
                    .map(|(j, kv)| kv * tmp[clamp_index(y as isize + j as isize - rad, h) * w + x])
                    .sum();
            }
        }
        let lo = out.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = out.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if stretch {
            data.extend(
                out.iter()
                    .map(|v| (0.1 + 0.8 * (v - lo) / (hi - lo)) as f32),
            );
        } else {
            data.extend(out.iter().map(|&v| v as f32));
        }
    }
    PlanarImage::new(h, w, data, ColorState::SrgbNonlinear).unwrap()
}

pub fn save_png8(img: &PlanarImage, path: &Path) {
    let raw: Vec<u8> = img
        .to_interleaved()
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    image::RgbImage::from_raw(img.width() as u32, img.height() as u32, raw)
        .unwrap()
        .save(path)
        .unwrap();
}

/// Writes `n` smooth `size x size` PNG sources into `dir`.
pub fn write_sources(dir: &Path, n: usize, size: usize, seed: u64) -> Vec<PathBuf> {
    fs::create_dir_all(dir).unwrap();
    (0..n)
        .map(|i| {
            let p = dir.join(format!("src_{i:03}.png"));
            save_png8(&smooth_image(seed + i as u64, size, size, 6.0), &p);
            p
        })
        .collect()
}

/// Writes a TOML config reading every PNG in `sources`.
pub fn write_config(dir: &Path, sources: &Path, extra: &str) -> PathBuf {
    let path = dir.join("config.toml");
    let text = format!("inputs = [\"{}/*.png\"]\n{extra}\n", sources.display());
    fs::write(&path, text).unwrap();
    path
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) {
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            collect_files(root, &p, out);
        } else {
            out.push(p.strip_prefix(root).unwrap().to_path_buf());
        }
    }
}

/// SHA-256 over every relative path and file content, in path order.
pub fn tree_hash(root: &Path) -> String {
    let mut files = Vec::new();
    collect_files(root, root, &mut files);
    files.sort();
    let mut h = Sha256::new();
    for rel in files {
        h.update(rel.to_string_lossy().as_bytes());
        h.update([0]);
        h.update(fs::read(root.join(&rel)).unwrap());
    }
    format!("{:x}", h.finalize())
}

pub fn random_bayer(seed: u64, h: usize, w: usize) -> BayerImage {
    let mut r = rng(seed);
    BayerImage::new(h, w, (0..h * w).map(|_| r.random::<f32>()).collect()).unwrap()
}

const G_AT_RB: [[f64; 5]; 5] = [
    [0.0, 0.0, -1.0, 0.0, 0.0],
    [0.0, 0.0, 2.0, 0.0, 0.0],
    [-1.0, 2.0, 4.0, 2.0, -1.0],
    [0.0, 0.0, 2.0, 0.0, 0.0],
    [0.0, 0.0, -1.0, 0.0, 0.0],
];

/// Chroma at a green site whose row neighbours carry that chroma.
const C_AT_G_ROW: [[f64; 5]; 5] = [
    [0.0, 0.0, 0.5, 0.0, 0.0],
    [0.0, -1.0, 0.0, -1.0, 0.0],
    [-1.0, 4.0, 5.0, 4.0, -1.0],
    [0.0, -1.0, 0.0, -1.0, 0.0],
    [0.0, 0.0, 0.5, 0.0, 0.0],
];

const C_AT_OPPOSITE: [[f64; 5]; 5] = [
    [0.0, 0.0, -1.5, 0.0, 0.0],
    [0.0, 2.0, 0.0, 2.0, 0.0],
    [-1.5, 0.0, 6.0, 0.0, -1.5],
    [0.0, 2.0, 0.0, 2.0, 0.0],
    [0.0, 0.0, -1.5, 0.0, 0.0],
];

fn transpose(k: &[[f64; 5]; 5]) -> [[f64; 5]; 5] {
    let mut t = [[0.0; 5]; 5];
    for i in 0..5 {
        for j in 0..5 {
            t[j][i] = k[i][j];
        }
    }
    t
}

/// Mirror padding without repeating the edge sample.
fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    (if m < n as isize { m } else { period - m }) as usize
}

/// Brute-force RGGB Malvar demosaic: explicit padding, then a full 5x5
/// convolution with the kernel chosen by site type. Returns `[r, g, b]`
/// per pixel in row-major order.
pub fn malvar_oracle(raw: &BayerImage) -> Vec<[f64; 3]> {
    let (h, w) = (raw.height(), raw.width());
    let pw = w + 4;
    let mut padded = vec![0.0f64; (h + 4) * pw];
    for y in 0..h + 4 {
        for x in 0..pw {
            let sy = reflect(y as isize - 2, h);
            let sx = reflect(x as isize - 2, w);
            padded[y * pw + x] = raw.get(sy, sx) as f64;
        }
    }
    let conv = |y: usize, x: usize, k: &[[f64; 5]; 5]| -> f64 {
        let mut s = 0.0;
        for (i, row) in k.iter().enumerate() {
            for (j, kv) in row.iter().enumerate() {
                s += kv * padded[(y + i) * pw + x + j];
            }
        }
        s / 8.0
    };
    let c_at_g_col = transpose(&C_AT_G_ROW);
    let mut out = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            let v = raw.get(y, x) as f64;
            let px = match (y % 2, x % 2) {
                (0, 0) => [v, conv(y, x, &G_AT_RB), conv(y, x, &C_AT_OPPOSITE)],
                (0, 1) => [conv(y, x, &C_AT_G_ROW), v, conv(y, x, &c_at_g_col)],
                (1, 0) => [conv(y, x, &c_at_g_col), v, conv(y, x, &C_AT_G_ROW)],
                _ => [conv(y, x, &C_AT_OPPOSITE), conv(y, x, &G_AT_RB), v],
            };
            out.push(px);
        }
    }
    out
}

/// Asymptotic one-sample Kolmogorov-Smirnov p-value against `U(0, 1)`.
pub fn ks_uniform_p(samples: &[f64]) -> (f64, f64) {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let d = s
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let lo = u - i as f64 / n;
            let hi = (i + 1) as f64 / n - u;
            lo.max(hi)
        })
        .fold(0.0, f64::max);
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    let p: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp()
        })
        .sum();
    (d, p.clamp(0.0, 1.0))
}

/// Pearson chi-square p-value of `counts` against a uniform expectation.
pub fn chi_square_uniform_p(counts: &[u64]) -> (f64, f64) {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    (stat, 1.0 - dist.cdf(stat))
}

/// PSNR and mean absolute error over the interior, `border` pixels in.
pub fn interior_error(a: &PlanarImage, b: &PlanarImage, border: usize) -> (f64, f64) {
    let (h, w) = (a.height(), a.width());
    let (mut se, mut ae, mut n) = (0.0f64, 0.0f64, 0usize);
    for y in border..h - border {
        for x in border..w - border {
            let (pa, pb) = (a.pixel(y, x), b.pixel(y, x));
            for c in 0..3 {
                let d = (pa[c] - pb[c]) as f64;
                se += d * d;
                ae += d.abs();
                n += 1;
            }
        }
    }
    let mse = se / n as f64;
    (10.0 * (1.0 / mse).log10(), ae / n as f64)
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
