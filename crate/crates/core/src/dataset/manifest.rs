//! JSON-lines manifest: one header record, then one record per pair in
//! pair-index order.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::config::GenerationConfig;
use crate::error::{Error, Result};
use crate::sampler::SampledParams;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub tool_version: String,
    pub master_seed: u64,
    pub bank_hash: String,
    pub config: GenerationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairManifestEntry {
    pub pair_id: String,
    pub pair_index: u64,
    pub source_path: PathBuf,
    /// Size of the source after downscaling, `(width, height)`.
    pub downscaled_size: (usize, usize),
    /// Top-left corner `(x, y)` of the crop in the downscaled source.
    pub crop_origin: (usize, usize),
    pub crop_size: usize,
    pub params: SampledParams,
    /// Relative to the output directory.
    pub low_path: PathBuf,
    pub normal_path: PathBuf,
    pub bank_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
pub enum ManifestRecord {
    Header(Box<ManifestHeader>),
    Pair(Box<PairManifestEntry>),
}

pub fn pair_id(index: u64) -> String {
    format!("{index:07}")
}

#[derive(Debug, Clone)]
pub struct Manifest {
    pub header: ManifestHeader,
    pub entries: Vec<PairManifestEntry>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut header = None;
        let mut entries = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<ManifestRecord>(&line) {
                Ok(ManifestRecord::Header(h)) if n == 0 => header = Some(*h),
                Ok(ManifestRecord::Header(_)) => {
                    return Err(Error::Manifest(format!("line {}: second header", n + 1)))
                }
                Ok(ManifestRecord::Pair(e)) => entries.push(*e),
                Err(e) => return Err(Error::Manifest(format!("line {}: {e}", n + 1))),
            }
        }
        let header = header.ok_or_else(|| Error::Manifest("missing header record".into()))?;
        Ok(Self { header, entries })
    }

    pub fn entry(&self, pair_id: &str) -> Result<&PairManifestEntry> {
        self.entries
            .iter()
            .find(|e| e.pair_id == pair_id)
            .ok_or_else(|| Error::Manifest(format!("no pair `{pair_id}`")))
    }
}

/// Writes records in pair-index order no matter the order they arrive in.
/// Every index in `0..total` must be either submitted or skipped. The file
/// is written under a temporary name and renamed on [`finish`](Self::finish).
pub struct OrderedAppender {
    file: File,
    tmp_path: PathBuf,
    final_path: PathBuf,
    next: u64,
    pending: BTreeMap<u64, Option<PairManifestEntry>>,
    written: usize,
}

impl OrderedAppender {
    pub fn create(path: &Path, header: &ManifestHeader) -> Result<Self> {
        let tmp_path = path.with_extension("jsonl.partial");
        let file = File::create(&tmp_path).map_err(|e| Error::io(&tmp_path, e))?;
        let mut appender = Self {
            file,
            tmp_path,
            final_path: path.to_path_buf(),
            next: 0,
            pending: BTreeMap::new(),
            written: 0,
        };
        appender.write_line(&ManifestRecord::Header(Box::new(header.clone())))?;
        Ok(appender)
    }

    fn write_line(&mut self, record: &ManifestRecord) -> Result<()> {
        let mut line = serde_json::to_vec(record)?;
        line.push(b'\n');
        self.file
            .write_all(&line)
            .map_err(|e| Error::io(&self.tmp_path, e))
    }

    /// `None` marks an index that produced no pair.
    pub fn submit(&mut self, index: u64, entry: Option<PairManifestEntry>) -> Result<()> {
        self.pending.insert(index, entry);
        while let Some(slot) = self.pending.remove(&self.next) {
            if let Some(e) = slot {
                self.write_line(&ManifestRecord::Pair(Box::new(e)))?;
                self.written += 1;
            }
            self.next += 1;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<usize> {
        if !self.pending.is_empty() {
            return Err(Error::Manifest(format!(
                "index {} never reported; {} records stranded",
                self.next,
                self.pending.len()
            )));
        }
        self.file
            .flush()
            .map_err(|e| Error::io(&self.tmp_path, e))?;
        self.file
            .sync_all()
            .map_err(|e| Error::io(&self.tmp_path, e))?;
        fs::rename(&self.tmp_path, &self.final_path).map_err(|e| Error::io(&self.final_path, e))?;
        Ok(self.written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bank::AssetBank;
    use crate::sampler::{sample_pair_params, SamplerConfig};

    fn entry(i: u64) -> PairManifestEntry {
        let bank = AssetBank::builtin();
        PairManifestEntry {
            pair_id: pair_id(i),
            pair_index: i,
            source_path: "src.png".into(),
            downscaled_size: (200, 200),
            crop_origin: (3, 4),
            crop_size: 156,
            params: sample_pair_params(&bank, &SamplerConfig::default(), 1, i),
            low_path: format!("low/{}.png", pair_id(i)).into(),
            normal_path: format!("normal/{}.png", pair_id(i)).into(),
            bank_hash: bank.hash().into(),
        }
    }

    #[test]
    fn appender_orders_and_skips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        let header = ManifestHeader {
            tool_version: TOOL_VERSION.into(),
            master_seed: 1,
            bank_hash: "h".into(),
            config: GenerationConfig::default(),
        };
        let mut app = OrderedAppender::create(&path, &header).unwrap();
        app.submit(2, Some(entry(2))).unwrap();
        app.submit(1, None).unwrap();
        assert!(!path.exists());
        app.submit(0, Some(entry(0))).unwrap();
        assert_eq!(app.finish().unwrap(), 2);

        let m = Manifest::read(&path).unwrap();
        assert_eq!(m.header, header);
        let idx: Vec<u64> = m.entries.iter().map(|e| e.pair_index).collect();
        assert_eq!(idx, vec![0, 2]);
        assert_eq!(m.entry("0000002").unwrap(), &entry(2));
        assert!(m.entry("0000001").is_err());
    }

    #[test]
    fn unfinished_indices_are_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let header = ManifestHeader {
            tool_version: TOOL_VERSION.into(),
            master_seed: 1,
            bank_hash: "h".into(),
            config: GenerationConfig::default(),
        };
        let mut app = OrderedAppender::create(&dir.path().join("m.jsonl"), &header).unwrap();
        app.submit(1, Some(entry(1))).unwrap();
        assert!(app.finish().is_err());
    }
}
