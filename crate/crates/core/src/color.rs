//! 3x3 color matrices and camera calibration profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Profiles whose blended matrix has a smaller absolute determinant are
/// treated as singular.
pub const SINGULAR_DET: f64 = 1e-8;

/// Row-major 3x3 matrix applied to column vectors: `out[i] = sum_j m[i][j] * v[j]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Adjugate inverse; `None` when `|det| <= SINGULAR_DET`.
    pub fn inverse(&self) -> Option<Mat3> {
        let d = self.det();
        if !d.is_finite() || d.abs() <= SINGULAR_DET {
            return None;
        }
        let m = &self.0;
        let inv_d = 1.0 / d;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
            m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
        };
        Some(Mat3([
            [
                cof(1, 2, 1, 2) * inv_d,
                -cof(0, 2, 1, 2) * inv_d,
                cof(0, 1, 1, 2) * inv_d,
            ],
            [
                -cof(1, 2, 0, 2) * inv_d,
                cof(0, 2, 0, 2) * inv_d,
                -cof(0, 1, 0, 2) * inv_d,
            ],
            [
                cof(1, 2, 0, 1) * inv_d,
                -cof(0, 2, 0, 1) * inv_d,
                cof(0, 1, 0, 1) * inv_d,
            ],
        ]))
    }

    pub fn mul(&self, rhs: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Mat3(out)
    }

    #[inline]
    pub fn apply(&self, v: [f32; 3]) -> [f32; 3] {
        let m = &self.0;
        let (r, g, b) = (v[0] as f64, v[1] as f64, v[2] as f64);
        [
            (m[0][0] * r + m[0][1] * g + m[0][2] * b) as f32,
            (m[1][0] * r + m[1][1] * g + m[1][2] * b) as f32,
            (m[2][0] * r + m[2][1] * g + m[2][2] * b) as f32,
        ]
    }

    /// `g * a + (1 - g) * b`, entry by entry.
    pub fn lerp(a: &Mat3, b: &Mat3, g: f64) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = g * a.0[i][j] + (1.0 - g) * b.0[i][j];
            }
        }
        Mat3(out)
    }

    /// Scales each row so it sums to one. Fails on a zero-sum row.
    pub fn normalize_rows(&self) -> Result<Mat3> {
        let mut out = self.0;
        for (i, row) in out.iter_mut().enumerate() {
            let s: f64 = row.iter().sum();
            if !s.is_finite() || s.abs() < 1e-12 {
                return Err(Error::InvalidParam(format!("matrix row {i} sums to zero")));
            }
            for v in row.iter_mut() {
                *v /= s;
            }
        }
        Ok(Mat3(out))
    }
}

/// Factory calibration of one camera: a color correction matrix for a warm
/// (2500K) and a daylight (6500K) illuminant. Both map camera RGB to the
/// output space and are row-normalized on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraProfile {
    pub id: String,
    pub ccm_low: Mat3,
    pub ccm_high: Mat3,
}

impl CameraProfile {
    pub fn new(id: impl Into<String>, ccm_low: Mat3, ccm_high: Mat3) -> Result<Self> {
        let id = id.into();
        let profile = Self {
            ccm_low: ccm_low.normalize_rows()?,
            ccm_high: ccm_high.normalize_rows()?,
            id,
        };
        for (name, m) in [
            ("ccm_low", &profile.ccm_low),
            ("ccm_high", &profile.ccm_high),
        ] {
            if m.det().abs() <= SINGULAR_DET {
                return Err(Error::InvalidParam(format!(
                    "profile `{}`: {name} is singular",
                    profile.id
                )));
            }
        }
        Ok(profile)
    }

    pub fn identity(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            ccm_low: Mat3::IDENTITY,
            ccm_high: Mat3::IDENTITY,
        }
    }

    /// `g * ccm_low + (1 - g) * ccm_high`.
    pub fn blend(&self, g: f64) -> Mat3 {
        Mat3::lerp(&self.ccm_low, &self.ccm_high, g)
    }

    /// Parses a profile file and row-normalizes its matrices.
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let raw: CameraProfile = serde_json::from_slice(bytes)?;
        CameraProfile::new(raw.id, raw.ccm_low, raw.ccm_high)
    }
}

pub(crate) fn check_blend(g: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&g) {
        return Err(Error::InvalidParam(format!(
            "blend weight {g} outside [0, 1]"
        )));
    }
    Ok(())
}
