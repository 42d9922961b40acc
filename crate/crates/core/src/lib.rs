//! Synthetic low-light image pairs from ordinary sRGB photographs.
//!
//! A normal-light image is unprocessed into a linear RAW mosaic with a
//! randomized camera model, darkened and given sensor noise, then rendered
//! back to sRGB through the same kind of randomized camera pipeline.

pub mod bank;
pub mod color;
pub mod dataset;
pub mod degrade;
pub mod error;
pub mod forward_isp;
pub mod image;
pub mod pair;
pub mod reverse_isp;
pub mod sampler;
pub mod tone_curve;

pub use bank::AssetBank;
pub use color::{CameraProfile, Mat3};
pub use degrade::{ExposureRange, NoiseModel};
pub use error::{Error, Result};
pub use forward_isp::{process, ForwardParams, WbGains};
pub use image::{BayerImage, ColorState, PlanarImage};
pub use pair::{synthesize, Generator, PairArrays, TargetMode};
pub use reverse_isp::{unprocess, ReverseParams};
pub use sampler::{sample_pair_params, SampledParams, SamplerConfig};
pub use tone_curve::ToneCurve;
