//! Camera profiles and tone curves the sampler draws from.
//!
//! On disk a bank is a directory:
//!
//! ```text
//! bank.json            {"hash": "...", "profiles": 11, "curves": 200}
//! profiles/*.json      {"id": ..., "ccm_low": [[..],[..],[..]], "ccm_high": ...}
//! curves/*.json        {"n": 256, "r": [...], "g": [...], "b": [...]}
//! ```
//!
//! Files are read in lexicographic order. The bank hash is a SHA-256 over
//! every file's relative path and bytes, so any edit to an asset changes it.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::color::{CameraProfile, Mat3};
use crate::error::{Error, Result};
use crate::tone_curve::ToneCurve;

pub const BUILTIN_CURVE_SAMPLES: usize = 256;
pub const BUILTIN_CURVE_COUNT: usize = 200;

#[derive(Debug, Clone)]
pub struct AssetBank {
    profiles: Vec<CameraProfile>,
    curves: Vec<ToneCurve>,
    profile_digests: Vec<(String, [u8; 32])>,
    curve_digests: Vec<(String, [u8; 32])>,
    hash: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct BankIndex {
    hash: String,
    profiles: usize,
    curves: usize,
}

fn file_digest(rel: &str, bytes: &[u8]) -> (String, [u8; 32]) {
    (rel.to_string(), Sha256::digest(bytes).into())
}

fn bank_hash<'a>(entries: impl Iterator<Item = &'a (String, [u8; 32])>) -> String {
    let mut h = Sha256::new();
    for (rel, digest) in entries {
        h.update((rel.len() as u64).to_le_bytes());
        h.update(rel.as_bytes());
        h.update(digest);
    }
    hex::encode(h.finalize())
}

impl AssetBank {
    /// Parses a bank from `(relative path, bytes)` pairs. Paths must start
    /// with `profiles/` or `curves/`; anything else is ignored.
    pub fn from_files(mut files: Vec<(String, Vec<u8>)>) -> Result<Self> {
        files.sort_by(|a, b| a.0.cmp(&b.0));
        let mut profiles = Vec::new();
        let mut curves = Vec::new();
        let mut profile_digests = Vec::new();
        let mut curve_digests = Vec::new();
        for (rel, bytes) in &files {
            if rel.starts_with("profiles/") {
                let p = CameraProfile::from_json(bytes)
                    .map_err(|e| Error::Config(format!("{rel}: {e}")))?;
                profiles.push(p);
                profile_digests.push(file_digest(rel, bytes));
            } else if rel.starts_with("curves/") {
                let c: ToneCurve = serde_json::from_slice(bytes)
                    .map_err(|e| Error::Config(format!("{rel}: {e}")))?;
                curves.push(c);
                curve_digests.push(file_digest(rel, bytes));
            }
        }
        Self::assemble(profiles, curves, profile_digests, curve_digests)
    }

    fn assemble(
        profiles: Vec<CameraProfile>,
        curves: Vec<ToneCurve>,
        profile_digests: Vec<(String, [u8; 32])>,
        curve_digests: Vec<(String, [u8; 32])>,
    ) -> Result<Self> {
        if profiles.is_empty() {
            return Err(Error::EmptyBank("camera profiles"));
        }
        if curves.is_empty() {
            return Err(Error::EmptyBank("tone curves"));
        }
        for (i, p) in profiles.iter().enumerate() {
            if profiles[..i].iter().any(|q| q.id == p.id) {
                return Err(Error::Config(format!("duplicate profile id `{}`", p.id)));
            }
        }
        let hash = bank_hash(profile_digests.iter().chain(&curve_digests));
        Ok(Self {
            profiles,
            curves,
            profile_digests,
            curve_digests,
            hash,
        })
    }

    /// Loads a bank directory. A `bank.json` whose hash disagrees with the
    /// files is rejected.
    pub fn load(dir: &Path) -> Result<Self> {
        let mut files = Vec::new();
        for sub in ["profiles", "curves"] {
            let d = dir.join(sub);
            let entries = fs::read_dir(&d).map_err(|e| Error::io(&d, e))?;
            for entry in entries {
                let entry = entry.map_err(|e| Error::io(&d, e))?;
                let path = entry.path();
                if path.extension().is_some_and(|x| x == "json") {
                    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
                    let name = entry.file_name().to_string_lossy().into_owned();
                    files.push((format!("{sub}/{name}"), bytes));
                }
            }
        }
        let bank = Self::from_files(files)?;
        let index_path = dir.join("bank.json");
        if index_path.exists() {
            let bytes = fs::read(&index_path).map_err(|e| Error::io(&index_path, e))?;
            let index: BankIndex = serde_json::from_slice(&bytes)?;
            if index.hash != bank.hash {
                return Err(Error::BankVersion {
                    expected: index.hash,
                    found: bank.hash,
                });
            }
        }
        Ok(bank)
    }

    /// The shipped default bank: 11 profiles and 200 curves.
    pub fn builtin() -> Self {
        Self::from_files(builtin_files()).expect("built-in assets are valid")
    }

    /// Writes the built-in assets and index into `dir`.
    pub fn write_builtin(dir: &Path) -> Result<String> {
        let files = builtin_files();
        for (rel, bytes) in &files {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        }
        let bank = Self::from_files(files)?;
        let index = BankIndex {
            hash: bank.hash.clone(),
            profiles: bank.profiles.len(),
            curves: bank.curves.len(),
        };
        let path = dir.join("bank.json");
        let mut bytes = serde_json::to_vec_pretty(&index)?;
        bytes.push(b'\n');
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        Ok(bank.hash)
    }

    /// Keeps the first `profiles` profiles and `curves` curves; the hash
    /// covers only what is kept.
    pub fn truncated(&self, profiles: Option<usize>, curves: Option<usize>) -> Result<Self> {
        let np = profiles
            .unwrap_or(self.profiles.len())
            .min(self.profiles.len());
        let nc = curves.unwrap_or(self.curves.len()).min(self.curves.len());
        Self::assemble(
            self.profiles[..np].to_vec(),
            self.curves[..nc].to_vec(),
            self.profile_digests[..np].to_vec(),
            self.curve_digests[..nc].to_vec(),
        )
    }

    /// Bank built from in-memory assets, hashed by their JSON encoding.
    pub fn from_assets(profiles: Vec<CameraProfile>, curves: Vec<ToneCurve>) -> Result<Self> {
        let mut files = Vec::new();
        for (i, p) in profiles.iter().enumerate() {
            files.push((
                format!("profiles/{i:02}_{}.json", p.id),
                serde_json::to_vec(p)?,
            ));
        }
        for (i, c) in curves.iter().enumerate() {
            files.push((format!("curves/{i:03}.json"), serde_json::to_vec(c)?));
        }
        Self::from_files(files)
    }

    pub fn profiles(&self) -> &[CameraProfile] {
        &self.profiles
    }

    pub fn curves(&self) -> &[ToneCurve] {
        &self.curves
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn profile(&self, id: &str) -> Result<&CameraProfile> {
        self.profiles
            .iter()
            .find(|p| p.id == id)
            .ok_or_else(|| Error::UnknownProfile(id.to_string()))
    }

    pub fn curve(&self, index: usize) -> Result<&ToneCurve> {
        self.curves.get(index).ok_or(Error::UnknownCurve(index))
    }
}

// Linear sRGB (D65) to CIE XYZ.
const SRGB_TO_XYZ: Mat3 = Mat3([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
]);

const BRADFORD: Mat3 = Mat3([
    [0.8951, 0.2664, -0.1614],
    [-0.7502, 1.7135, 0.0367],
    [0.0389, -0.0685, 1.0296],
]);

const WHITE_D65: [f64; 3] = [0.95047, 1.0, 1.08883];
// Planckian locus at 2500K: x = 0.4770, y = 0.4137.
const WHITE_2500K: [f64; 3] = [0.4770 / 0.4137, 1.0, (1.0 - 0.4770 - 0.4137) / 0.4137];

/// XYZ (D65) to camera matrices, scaled by 10^4 in the usual dcraw layout.
/// Values follow the public adobe_coeff-style tables; they serve as
/// realistic sensor responses, not as calibration of any specific unit.
const CAMERA_XYZ: [(&str, [i32; 9]); 11] = [
    (
        "canon_eos_5d_mark_ii",
        [4716, 603, -830, -7798, 15474, 2480, -1496, 1937, 6651],
    ),
    (
        "canon_eos_5d_mark_iii",
        [6722, -635, -963, -4287, 12460, 2028, -908, 2162, 5668],
    ),
    (
        "canon_eos_6d",
        [7034, -804, -1014, -4420, 12564, 2058, -851, 1994, 5758],
    ),
    (
        "canon_eos_7d",
        [6844, -996, -856, -3876, 11761, 2396, -593, 1772, 6198],
    ),
    (
        "nikon_d700",
        [8139, -2171, -663, -8747, 16541, 2295, -1925, 2008, 8093],
    ),
    (
        "nikon_d800",
        [7866, -2108, -555, -4869, 12483, 2681, -1176, 2069, 7501],
    ),
    (
        "nikon_d7000",
        [8198, -2239, -724, -4871, 12389, 2798, -1043, 2050, 7181],
    ),
    (
        "olympus_e_m5",
        [8380, -2630, -639, -2887, 10725, 2496, -627, 1427, 5438],
    ),
    (
        "olympus_e_m1",
        [7687, -1984, -606, -4327, 11928, 2721, -1381, 2339, 6452],
    ),
    (
        "mobile_a",
        [10234, -2969, -2266, -5625, 16328, -469, -703, 2188, 6406],
    ),
    (
        "mobile_b",
        [6596, -2079, -562, -4782, 13016, 1933, -970, 1581, 5181],
    ),
];

fn chromatic_adaptation(from: [f64; 3], to: [f64; 3]) -> Mat3 {
    let src = BRADFORD.apply64(from);
    let dst = BRADFORD.apply64(to);
    let scale = Mat3([
        [dst[0] / src[0], 0.0, 0.0],
        [0.0, dst[1] / src[1], 0.0],
        [0.0, 0.0, dst[2] / src[2]],
    ]);
    BRADFORD
        .inverse()
        .expect("Bradford matrix is invertible")
        .mul(&scale)
        .mul(&BRADFORD)
}

/// Camera RGB to linear sRGB for a scene lit by `white`.
fn camera_ccm(xyz_to_cam: &Mat3, white: [f64; 3]) -> Mat3 {
    let adapt = chromatic_adaptation(WHITE_D65, white);
    let rgb_to_cam = xyz_to_cam
        .mul(&adapt)
        .mul(&SRGB_TO_XYZ)
        .normalize_rows()
        .expect("camera matrix rows are non-degenerate");
    rgb_to_cam.inverse().expect("camera matrix is invertible")
}

fn builtin_profiles() -> Vec<CameraProfile> {
    CAMERA_XYZ
        .iter()
        .map(|(id, m)| {
            let xyz_to_cam = Mat3([
                [m[0] as f64 / 1e4, m[1] as f64 / 1e4, m[2] as f64 / 1e4],
                [m[3] as f64 / 1e4, m[4] as f64 / 1e4, m[5] as f64 / 1e4],
                [m[6] as f64 / 1e4, m[7] as f64 / 1e4, m[8] as f64 / 1e4],
            ]);
            let low = camera_ccm(&xyz_to_cam, WHITE_2500K);
            let high = camera_ccm(&xyz_to_cam, WHITE_D65);
            CameraProfile::new(*id, low, high).expect("built-in profile is valid")
        })
        .collect()
}

/// `u^a / (u^a + (1 - u)^a)` with `u = x^p`: contrast `a`, brightness `p`.
fn s_curve(x: f64, contrast: f64, brightness: f64) -> f64 {
    let u = x.powf(brightness);
    let num = u.powf(contrast);
    let den = num + (1.0 - u).powf(contrast);
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn builtin_curves() -> Vec<ToneCurve> {
    // additive recurrence on the plastic number spreads the parameter
    // pairs evenly over the unit square
    const A1: f64 = 0.754_877_666_246_693;
    const A2: f64 = 0.569_840_290_998_053;
    (0..BUILTIN_CURVE_COUNT)
        .map(|i| {
            let k = i as f64 + 0.5;
            let contrast = 1.0 + 1.0 * (k * A1).fract();
            let brightness = 0.8 + 0.45 * (k * A2).fract();
            let tilt = 0.06 * ((k * (A1 + A2)).fract() - 0.5);
            let channel = |c: f64| -> Vec<f32> {
                let a = contrast * (1.0 + tilt * c);
                (0..BUILTIN_CURVE_SAMPLES)
                    .map(|j| {
                        let x = j as f64 / (BUILTIN_CURVE_SAMPLES - 1) as f64;
                        s_curve(x, a, brightness) as f32
                    })
                    .collect()
            };
            ToneCurve::new([channel(1.0), channel(0.0), channel(-1.0)])
                .expect("built-in curve is strictly increasing")
        })
        .collect()
}

fn builtin_files() -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for (i, p) in builtin_profiles().iter().enumerate() {
        let mut bytes = serde_json::to_vec_pretty(p).expect("profile serializes");
        bytes.push(b'\n');
        files.push((format!("profiles/{i:02}_{}.json", p.id), bytes));
    }
    for (i, c) in builtin_curves().iter().enumerate() {
        let mut bytes = serde_json::to_vec(c).expect("curve serializes");
        bytes.push(b'\n');
        files.push((format!("curves/{i:03}.json"), bytes));
    }
    files
}

impl Mat3 {
    fn apply64(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }
}
