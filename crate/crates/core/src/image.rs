//! Image containers shared by every pipeline stage.
//!
//! Samples are `f32` normalized so that 1.0 is full scale. A [`PlanarImage`]
//! carries the color state it is in; stages check it on entry and stamp the
//! new one on exit so that out-of-order composition is an error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which space the samples of a [`PlanarImage`] live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColorState {
    /// Display-referred sRGB with the transfer function applied.
    SrgbNonlinear,
    /// Tone-mapped linear intensities, before gamma.
    SrgbLinear,
    /// Output of the color space transform, before tone mapping.
    CieXyz,
    /// Demosaiced sensor RGB.
    CameraRgb,
}

/// Three planes of `height * width` samples, stored plane-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarImage {
    height: usize,
    width: usize,
    data: Vec<f32>,
    state: ColorState,
}

impl PlanarImage {
    pub fn new(height: usize, width: usize, data: Vec<f32>, state: ColorState) -> Result<Self> {
        if data.len() != 3 * height * width {
            return Err(Error::ShapeMismatch {
                height,
                width,
                channels: 3,
                len: data.len(),
            });
        }
        Ok(Self {
            height,
            width,
            data,
            state,
        })
    }

    pub fn filled(height: usize, width: usize, rgb: [f32; 3], state: ColorState) -> Self {
        let n = height * width;
        let mut data = Vec::with_capacity(3 * n);
        for v in rgb {
            data.extend(std::iter::repeat_n(v, n));
        }
        Self {
            height,
            width,
            data,
            state,
        }
    }

    /// Builds an image from an interleaved `HxWx3` buffer.
    pub fn from_interleaved(
        height: usize,
        width: usize,
        hwc: &[f32],
        state: ColorState,
    ) -> Result<Self> {
        if hwc.len() != 3 * height * width {
            return Err(Error::ShapeMismatch {
                height,
                width,
                channels: 3,
                len: hwc.len(),
            });
        }
        let n = height * width;
        let mut data = vec![0.0; 3 * n];
        for (i, px) in hwc.chunks_exact(3).enumerate() {
            data[i] = px[0];
            data[n + i] = px[1];
            data[2 * n + i] = px[2];
        }
        Ok(Self {
            height,
            width,
            data,
            state,
        })
    }

    pub fn to_interleaved(&self) -> Vec<f32> {
        let n = self.height * self.width;
        let mut out = Vec::with_capacity(3 * n);
        for i in 0..n {
            out.push(self.data[i]);
            out.push(self.data[n + i]);
            out.push(self.data[2 * n + i]);
        }
        out
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn state(&self) -> ColorState {
        self.state
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn plane(&self, c: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn pixel(&self, y: usize, x: usize) -> [f32; 3] {
        let n = self.height * self.width;
        let i = y * self.width + x;
        [self.data[i], self.data[n + i], self.data[2 * n + i]]
    }

    pub(crate) fn expect_state(&self, op: &'static str, expected: ColorState) -> Result<()> {
        if self.state != expected {
            return Err(Error::StateMismatch {
                op,
                expected,
                found: self.state,
            });
        }
        Ok(())
    }

    pub(crate) fn with_state(mut self, state: ColorState) -> Self {
        self.state = state;
        self
    }

    /// Applies `f` to every sample of every plane.
    pub(crate) fn map_samples(&self, f: impl Fn(f32) -> f32) -> Self {
        Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
            state: self.state,
        }
    }

    /// Applies `f(channel, sample)` to every sample.
    pub(crate) fn map_channels(&self, f: impl Fn(usize, f32) -> f32) -> Self {
        let n = self.height * self.width;
        Self {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .enumerate()
                .map(|(i, &v)| f(i / n.max(1), v))
                .collect(),
            state: self.state,
        }
    }

    /// Applies `f` to every RGB triple.
    pub(crate) fn map_pixels(&self, f: impl Fn([f32; 3]) -> [f32; 3]) -> Self {
        let n = self.height * self.width;
        let mut data = vec![0.0; 3 * n];
        for i in 0..n {
            let out = f([self.data[i], self.data[n + i], self.data[2 * n + i]]);
            data[i] = out[0];
            data[n + i] = out[1];
            data[2 * n + i] = out[2];
        }
        Self {
            height: self.height,
            width: self.width,
            data,
            state: self.state,
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        check_finite(&self.data, self.height * self.width)
    }

    /// Extracts a `size_h x size_w` window whose top-left corner is `(x, y)`.
    pub fn crop(&self, x: usize, y: usize, size_w: usize, size_h: usize) -> Result<Self> {
        if x + size_w > self.width || y + size_h > self.height {
            return Err(Error::InvalidParam(format!(
                "crop {size_w}x{size_h} at ({x},{y}) exceeds {}x{} image",
                self.width, self.height
            )));
        }
        let n = self.height * self.width;
        let mut data = Vec::with_capacity(3 * size_w * size_h);
        for c in 0..3 {
            for row in y..y + size_h {
                let start = c * n + row * self.width + x;
                data.extend_from_slice(&self.data[start..start + size_w]);
            }
        }
        Ok(Self {
            height: size_h,
            width: size_w,
            data,
            state: self.state,
        })
    }
}

/// A single-plane RGGB mosaic: `(0,0)=R, (0,1)=G, (1,0)=G, (1,1)=B`.
#[derive(Debug, Clone, PartialEq)]
pub struct BayerImage {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

/// Color of the filter at a mosaic site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cfa {
    Red,
    /// Green on a red row.
    GreenR,
    /// Green on a blue row.
    GreenB,
    Blue,
}

impl Cfa {
    #[inline]
    pub fn at(y: usize, x: usize) -> Self {
        match (y & 1, x & 1) {
            (0, 0) => Cfa::Red,
            (0, 1) => Cfa::GreenR,
            (1, 0) => Cfa::GreenB,
            _ => Cfa::Blue,
        }
    }

    /// Plane index of the sample this site measures.
    pub fn channel(self) -> usize {
        match self {
            Cfa::Red => 0,
            Cfa::GreenR | Cfa::GreenB => 1,
            Cfa::Blue => 2,
        }
    }
}

impl BayerImage {
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if !height.is_multiple_of(2) || !width.is_multiple_of(2) {
            return Err(Error::OddDimensions { height, width });
        }
        if data.len() != height * width {
            return Err(Error::ShapeMismatch {
                height,
                width,
                channels: 1,
                len: data.len(),
            });
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, y: usize, x: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub(crate) fn map_samples(&self, f: impl Fn(f32) -> f32) -> Self {
        Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn check_finite(&self) -> Result<()> {
        check_finite(&self.data, self.data.len().max(1))
    }
}

/// Single-plane luma image.
#[derive(Debug, Clone, PartialEq)]
pub struct LumaImage {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

fn check_finite(data: &[f32], plane_len: usize) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite {
            plane: i / plane_len,
            index: i % plane_len,
        }),
        None => Ok(()),
    }
}

/// Images whose samples can be clamped to `[0, 1]`.
pub trait Clip01: Sized {
    fn clip01(&self) -> Result<Self>;
}

impl Clip01 for PlanarImage {
    fn clip01(&self) -> Result<Self> {
        self.check_finite()?;
        Ok(self.map_samples(|v| v.clamp(0.0, 1.0)))
    }
}

impl Clip01 for BayerImage {
    fn clip01(&self) -> Result<Self> {
        self.check_finite()?;
        Ok(self.map_samples(|v| v.clamp(0.0, 1.0)))
    }
}

/// Clamps every sample into `[0, 1]`, rejecting NaN and infinities.
pub fn clip01<T: Clip01>(img: &T) -> Result<T> {
    img.clip01()
}

pub const LUMA_WEIGHTS: [f32; 3] = [0.299, 0.587, 0.114];

/// BT.601 full-range luma of a display-referred image.
pub fn rgb_to_y(img: &PlanarImage) -> Result<LumaImage> {
    img.expect_state("rgb_to_y", ColorState::SrgbNonlinear)?;
    let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
    let data = r
        .iter()
        .zip(g)
        .zip(b)
        .map(|((&r, &g), &b)| LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b)
        .collect();
    Ok(LumaImage {
        height: img.height(),
        width: img.width(),
        data,
    })
}
