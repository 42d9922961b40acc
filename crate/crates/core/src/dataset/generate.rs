//! Batch pair generation and single-pair replay.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use log::{info, warn};
use rand::Rng;
use rayon::prelude::*;

use crate::bank::AssetBank;
use crate::dataset::config::GenerationConfig;
use crate::dataset::io::{downscale, ingest, is_image, write_png};
use crate::dataset::manifest::{
    pair_id, Manifest, ManifestHeader, OrderedAppender, PairManifestEntry, TOOL_VERSION,
};
use crate::error::{Error, Result};
use crate::image::PlanarImage;
use crate::pair::synthesize;
use crate::sampler::{sample_pair_params, stream_rng, SamplerConfig, STREAM_CROP};

pub const MANIFEST_NAME: &str = "manifest.jsonl";

/// One pair in every this many is replayed and compared after a run.
const SPOT_CHECK_EVERY: u64 = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerateReport {
    pub sources: usize,
    pub failed_sources: usize,
    pub pairs: usize,
    pub manifest: PathBuf,
}

/// Expands the config's input globs into a sorted, de-duplicated list.
pub fn expand_inputs(config: &GenerationConfig) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for pattern in &config.inputs {
        let matches = glob::glob(pattern)
            .map_err(|e| Error::Config(format!("bad input glob `{pattern}`: {e}")))?;
        for m in matches {
            match m {
                Ok(p) if p.is_file() && is_image(&p) => paths.push(p),
                Ok(_) => {}
                Err(e) => warn!("skipping unreadable path: {e}"),
            }
        }
    }
    paths.sort();
    paths.dedup();
    if paths.is_empty() {
        return Err(Error::NoInputs(config.inputs.join(", ")));
    }
    Ok(paths)
}

fn crop_origin(seed: u64, width: usize, height: usize, patch: usize) -> (usize, usize) {
    let mut rng = stream_rng(seed, STREAM_CROP);
    let x = rng.random_range(0..=width - patch);
    let y = rng.random_range(0..=height - patch);
    (x, y)
}

fn load_source(path: &Path, config: &GenerationConfig) -> Result<PlanarImage> {
    let img = downscale(&ingest(path)?, config.downscale_factor);
    if img.width() < config.patch_size || img.height() < config.patch_size {
        return Err(Error::TooSmall {
            path: path.to_path_buf(),
            width: img.width(),
            height: img.height(),
            patch: config.patch_size,
        });
    }
    Ok(img)
}

struct Context<'a> {
    config: &'a GenerationConfig,
    sampler: SamplerConfig,
    bank: &'a AssetBank,
    seed: u64,
    out: &'a Path,
}

impl Context<'_> {
    fn make_entry(&self, source: &Path, img: &PlanarImage, index: u64) -> PairManifestEntry {
        let params = sample_pair_params(self.bank, &self.sampler, self.seed, index);
        let patch = self.config.patch_size;
        let crop_origin = crop_origin(params.seed, img.width(), img.height(), patch);
        let id = pair_id(index);
        PairManifestEntry {
            low_path: PathBuf::from("low").join(format!("{id}.png")),
            normal_path: PathBuf::from("normal").join(format!("{id}.png")),
            pair_id: id,
            pair_index: index,
            source_path: source.to_path_buf(),
            downscaled_size: (img.width(), img.height()),
            crop_origin,
            crop_size: patch,
            params,
            bank_hash: self.bank.hash().to_string(),
        }
    }
}

/// Renders the pair described by `entry` from the downscaled source and
/// writes both images under `out`.
fn render_entry(
    img: &PlanarImage,
    entry: &PairManifestEntry,
    config: &GenerationConfig,
    bank: &AssetBank,
    out: &Path,
) -> Result<()> {
    let (x, y) = entry.crop_origin;
    let crop = img.crop(x, y, entry.crop_size, entry.crop_size)?;
    let (low, normal) = synthesize(&crop, &entry.params, bank, config.target)?;
    write_png(&low, &out.join(&entry.low_path), config.bit_depth)?;
    write_png(&normal, &out.join(&entry.normal_path), config.bit_depth)
}

/// Generates every pair for every source under `out`. Sources that fail are
/// logged and skipped; the call fails only if all of them do.
pub fn generate(
    config: &GenerationConfig,
    seed: u64,
    out: &Path,
    workers: Option<usize>,
) -> Result<GenerateReport> {
    config.validate()?;
    let bank = config.load_bank()?;
    let sources = expand_inputs(config)?;
    for sub in ["low", "normal"] {
        let d = out.join(sub);
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    let header = ManifestHeader {
        tool_version: TOOL_VERSION.to_string(),
        master_seed: seed,
        bank_hash: bank.hash().to_string(),
        config: config.clone(),
    };
    let manifest_path = out.join(MANIFEST_NAME);
    let mut appender = OrderedAppender::create(&manifest_path, &header)?;

    let ctx = Context {
        config,
        sampler: config.sampler()?,
        bank: &bank,
        seed,
        out,
    };
    let per_image = config.pairs_per_image as u64;
    let threads = workers.or(config.workers).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let (tx, rx) = mpsc::channel::<(u64, Option<PairManifestEntry>)>();
    let failed = std::thread::scope(|scope| -> Result<usize> {
        let writer = scope.spawn(move || -> Result<OrderedAppender> {
            for (index, entry) in rx {
                appender.submit(index, entry)?;
            }
            Ok(appender)
        });

        let failed = pool.install(|| {
            sources
                .par_iter()
                .enumerate()
                .map_with(tx, |tx, (s, path)| {
                    let first = s as u64 * per_image;
                    let img = match load_source(path, config) {
                        Ok(img) => img,
                        Err(e) => {
                            warn!("skipping source: {e}");
                            for i in first..first + per_image {
                                let _ = tx.send((i, None));
                            }
                            return 1usize;
                        }
                    };
                    (first..first + per_image).into_par_iter().for_each_with(
                        tx.clone(),
                        |tx, index| {
                            let entry = ctx.make_entry(path, &img, index);
                            let result = render_entry(&img, &entry, config, &bank, ctx.out);
                            let slot = match result {
                                Ok(()) => Some(entry),
                                Err(e) => {
                                    warn!("pair {index} from {}: {e}", path.display());
                                    None
                                }
                            };
                            let _ = tx.send((index, slot));
                        },
                    );
                    0
                })
                .sum::<usize>()
        });

        let appender = writer
            .join()
            .map_err(|_| Error::Manifest("manifest writer panicked".into()))??;
        let pairs = appender.finish()?;
        info!("wrote {pairs} pairs to {}", out.display());
        Ok(failed)
    })?;

    if failed == sources.len() {
        return Err(Error::NoInputs(format!(
            "all {} sources failed; see log",
            sources.len()
        )));
    }

    let manifest = Manifest::read(&manifest_path)?;
    spot_check(&manifest, out)?;
    Ok(GenerateReport {
        sources: sources.len(),
        failed_sources: failed,
        pairs: manifest.entries.len(),
        manifest: manifest_path,
    })
}

fn spot_check(manifest: &Manifest, out: &Path) -> Result<()> {
    let scratch = out.join(".spot-check");
    let sampled: Vec<&PairManifestEntry> = manifest
        .entries
        .iter()
        .filter(|e| e.pair_index % SPOT_CHECK_EVERY == 0)
        .collect();
    let result = sampled.iter().try_for_each(|entry| {
        let report = replay_entry(manifest, entry, out, &scratch)?;
        if report.matches_original == Some(false) {
            return Err(Error::Manifest(format!(
                "spot replay of pair {} differs from the written files",
                entry.pair_id
            )));
        }
        Ok(())
    });
    let _ = fs::remove_dir_all(&scratch);
    result
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayReport {
    pub low_path: PathBuf,
    pub normal_path: PathBuf,
    /// `None` when the original files are not present to compare against.
    pub matches_original: Option<bool>,
}

fn replay_entry(
    manifest: &Manifest,
    entry: &PairManifestEntry,
    original_root: &Path,
    out: &Path,
) -> Result<ReplayReport> {
    let config = &manifest.header.config;
    let bank = config.load_bank()?;
    if bank.hash() != entry.bank_hash {
        return Err(Error::BankVersion {
            expected: entry.bank_hash.clone(),
            found: bank.hash().to_string(),
        });
    }
    let img = downscale(&ingest(&entry.source_path)?, config.downscale_factor);
    if (img.width(), img.height()) != entry.downscaled_size {
        return Err(Error::Manifest(format!(
            "source {} is now {}x{}, manifest recorded {:?}",
            entry.source_path.display(),
            img.width(),
            img.height(),
            entry.downscaled_size
        )));
    }
    render_entry(&img, entry, config, &bank, out)?;

    let low_path = out.join(&entry.low_path);
    let normal_path = out.join(&entry.normal_path);
    let orig_low = original_root.join(&entry.low_path);
    let orig_normal = original_root.join(&entry.normal_path);
    let matches_original = if orig_low.exists() && orig_normal.exists() {
        let same = |a: &Path, b: &Path| -> Result<bool> {
            Ok(fs::read(a).map_err(|e| Error::io(a, e))?
                == fs::read(b).map_err(|e| Error::io(b, e))?)
        };
        Some(same(&low_path, &orig_low)? && same(&normal_path, &orig_normal)?)
    } else {
        None
    };
    Ok(ReplayReport {
        low_path,
        normal_path,
        matches_original,
    })
}

/// Regenerates one pair from its manifest record into `out` (default: a
/// `replay` directory next to the manifest) and compares it with the
/// originally written files.
pub fn replay(manifest_path: &Path, pair_id: &str, out: Option<&Path>) -> Result<ReplayReport> {
    let manifest = Manifest::read(manifest_path)?;
    let entry = manifest.entry(pair_id)?;
    let root = manifest_path.parent().unwrap_or(Path::new("."));
    let default_out = root.join("replay");
    replay_entry(&manifest, entry, root, out.unwrap_or(&default_out))
}
