//! Corpus ingestion, batch pair generation and dataset inspection tools.

pub mod calibrate;
pub mod config;
pub mod curves;
pub mod generate;
pub mod io;
pub mod manifest;

pub use calibrate::{calibrate, calibrate_dirs, Calibration, CalibrationBounds};
pub use config::{ExposureSetting, GenerationConfig};
pub use curves::{chord_slope, compare_exposure_curves, matching_curve, PairCurve};
pub use generate::{generate, replay, GenerateReport, ReplayReport};
pub use manifest::{Manifest, ManifestHeader, PairManifestEntry};
