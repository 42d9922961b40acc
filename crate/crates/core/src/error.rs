use std::path::PathBuf;

use crate::image::ColorState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite sample in plane {plane} at index {index}")]
    NonFinite { plane: usize, index: usize },

    #[error("{op} expects a {expected:?} image, got {found:?}")]
    StateMismatch {
        op: &'static str,
        expected: ColorState,
        found: ColorState,
    },

    #[error("dimensions {height}x{width} must both be even")]
    OddDimensions { height: usize, width: usize },

    #[error("buffer of length {len} does not match {height}x{width}x{channels}")]
    ShapeMismatch {
        height: usize,
        width: usize,
        channels: usize,
        len: usize,
    },

    #[error("blended CCM of profile `{profile}` at g={blend_g} is singular (det={det:e})")]
    SingularMatrix {
        profile: String,
        blend_g: f64,
        det: f64,
    },

    #[error("gain must be positive and finite, got {0}")]
    InvalidGain(f64),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("tone curve channel {channel} is not strictly increasing at index {index}")]
    NonMonotoneCurve { channel: usize, index: usize },

    #[error("asset bank has no {0}")]
    EmptyBank(&'static str),

    #[error("unknown camera profile `{0}`")]
    UnknownProfile(String),

    #[error("tone curve index {0} is out of range")]
    UnknownCurve(usize),

    #[error("asset bank hash mismatch: expected {expected}, found {found}")]
    BankVersion { expected: String, found: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: 3 channels required, found {channels}")]
    Channels { path: PathBuf, channels: u8 },

    #[error("{path}: unsupported bit depth ({detail})")]
    BitDepth { path: PathBuf, detail: String },

    #[error("{path}: image is {width}x{height}, smaller than the {patch}x{patch} patch")]
    TooSmall {
        path: PathBuf,
        width: usize,
        height: usize,
        patch: usize,
    },

    #[error("no counterpart for `{0}` in the paired directory")]
    Unpaired(String),

    #[error("no images found: {0}")]
    NoInputs(String),

    #[error("config: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("manifest: {0}")]
    Manifest(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
