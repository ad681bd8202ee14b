//! Flat binary window export.
//!
//! Layout, all little-endian and sample-major:
//!
//! | file            | type | shape            |
//! |-----------------|------|------------------|
//! | `windows.f32`   | f32  | `n × 100 × 40`   |
//! | `labels.f32`    | f32  | `n`              |
//! | `regimes.u8`    | u8   | `n` (0 no shock, 1 pre, 2 post) |
//! | `scenarios.u8`  | u8   | `n` (0 ordinary, 1 small, 2 large) |
//! | `splits.u8`     | u8   | `n` (0 train, 1 test_iid, 2 test_small, 3 test_large) |
//! | `trends.u8`     | u8   | `n` (0 down, 1 stationary, 2 up) |
//! | `day_index.u32` | u32  | `n`              |
//! | `start.u32`     | u32  | `n` (first record of the window within its day) |
//!
//! `tensors.json` gives the count, shapes, codes and a SHA-256 per file.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::features::FEATURES;
use super::splits::SplitPlan;
use super::trend::trend_label;
use super::windows::{DaySeries, LOOKBACK};
use super::DatasetError;

pub const TENSORS_FILE: &str = "tensors.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorFile {
    pub dtype: String,
    pub shape: Vec<usize>,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorDescriptor {
    pub format_version: u32,
    pub byte_order: String,
    pub count: usize,
    pub window_shape: [usize; 2],
    pub stride: usize,
    pub horizon: usize,
    pub normalized: bool,
    pub trend_alpha: f64,
    pub codes: BTreeMap<String, Vec<String>>,
    pub files: BTreeMap<String, TensorFile>,
}

struct Sink {
    out: BufWriter<File>,
    hash: Sha256,
    bytes: u64,
}

impl Sink {
    fn create(path: &Path) -> Result<Self, DatasetError> {
        Ok(Self {
            out: BufWriter::new(File::create(path)?),
            hash: Sha256::new(),
            bytes: 0,
        })
    }

    fn put(&mut self, b: &[u8]) -> Result<(), DatasetError> {
        self.out.write_all(b)?;
        self.hash.update(b);
        self.bytes += b.len() as u64;
        Ok(())
    }

    fn finish(mut self, dtype: &str, shape: Vec<usize>) -> Result<TensorFile, DatasetError> {
        self.out.flush()?;
        Ok(TensorFile {
            dtype: dtype.into(),
            shape,
            bytes: self.bytes,
            sha256: hex::encode(self.hash.finalize()),
        })
    }
}

/// Writes every `stride`-th window of each day. `days` must already be in
/// the exported domain (normalized or raw); `raw_mids` gives the
/// unnormalized mids used for trend labels.
pub fn export_tensors(
    dir: &Path,
    days: &[DaySeries],
    raw_mids: &[&[f64]],
    plan: &SplitPlan,
    stride: usize,
    normalized: bool,
    trend_alpha: f64,
) -> Result<TensorDescriptor, DatasetError> {
    if stride == 0 {
        return Err(DatasetError::OutOfRange("export stride must be positive".into()));
    }
    let h = plan.horizon;
    let names = ["windows.f32", "labels.f32", "regimes.u8", "scenarios.u8", "splits.u8", "trends.u8", "day_index.u32", "start.u32"];
    let mut sinks = names
        .iter()
        .map(|n| Sink::create(&dir.join(n)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut count = 0usize;
    let mut buf = Vec::with_capacity(LOOKBACK * FEATURES * 4);
    for ((day, dp), mids) in days.iter().zip(&plan.days).zip(raw_mids) {
        for s in (0..day.window_count(h)).step_by(stride) {
            buf.clear();
            for v in &day.features[s * FEATURES..(s + LOOKBACK) * FEATURES] {
                buf.extend_from_slice(&(*v as f32).to_le_bytes());
            }
            let trend = trend_label(mids, s + LOOKBACK - 1, h, trend_alpha)?;
            sinks[0].put(&buf)?;
            sinks[1].put(&(day.label(s, h) as f32).to_le_bytes())?;
            sinks[2].put(&[day.regime(s).code()])?;
            sinks[3].put(&[day.scenario.code()])?;
            sinks[4].put(&[dp.split_of(s).code()])?;
            sinks[5].put(&[trend.class.code()])?;
            sinks[6].put(&(day.day_index as u32).to_le_bytes())?;
            sinks[7].put(&(s as u32).to_le_bytes())?;
            count += 1;
        }
    }
    let mut files = BTreeMap::new();
    for (name, sink) in names.iter().zip(sinks) {
        let (dtype, shape) = match *name {
            "windows.f32" => ("float32", vec![count, LOOKBACK, FEATURES]),
            n if n.ends_with(".f32") => ("float32", vec![count]),
            n if n.ends_with(".u32") => ("uint32", vec![count]),
            _ => ("uint8", vec![count]),
        };
        files.insert(name.to_string(), sink.finish(dtype, shape)?);
    }
    let codes = [
        ("regime", vec!["no_shock", "pre_shock", "post_shock"]),
        ("scenario", vec!["ordinary", "small", "large"]),
        ("split", vec!["train", "test_iid", "test_small", "test_large"]),
        ("trend", vec!["down", "stationary", "up"]),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.into_iter().map(String::from).collect()))
    .collect();
    let desc = TensorDescriptor {
        format_version: 1,
        byte_order: "little".into(),
        count,
        window_shape: [LOOKBACK, FEATURES],
        stride,
        horizon: h,
        normalized,
        trend_alpha,
        codes,
        files,
    };
    let mut text = serde_json::to_string_pretty(&desc)?;
    text.push('\n');
    std::fs::write(dir.join(TENSORS_FILE), text)?;
    Ok(desc)
}

/// Exported arrays read back into memory, after checking sizes and hashes.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSet {
    pub descriptor: TensorDescriptor,
    pub windows: Vec<f32>,
    pub labels: Vec<f32>,
    pub regimes: Vec<u8>,
    pub scenarios: Vec<u8>,
    pub splits: Vec<u8>,
    pub trends: Vec<u8>,
    pub day_index: Vec<u32>,
    pub start: Vec<u32>,
}

pub fn load_tensors(dir: &Path) -> Result<TensorSet, DatasetError> {
    let descriptor: TensorDescriptor = serde_json::from_str(&std::fs::read_to_string(dir.join(TENSORS_FILE))?)?;
    let read = |name: &str, width: usize| -> Result<Vec<u8>, DatasetError> {
        let meta = descriptor
            .files
            .get(name)
            .ok_or_else(|| DatasetError::Malformed(format!("{name} missing from descriptor")))?;
        let bytes = std::fs::read(dir.join(name))?;
        let expected = meta.shape.iter().product::<usize>() * width;
        if bytes.len() != expected || bytes.len() as u64 != meta.bytes {
            return Err(DatasetError::Malformed(format!("{name}: {} bytes, expected {expected}", bytes.len())));
        }
        if hex::encode(Sha256::digest(&bytes)) != meta.sha256 {
            return Err(DatasetError::Malformed(format!("{name}: checksum mismatch")));
        }
        Ok(bytes)
    };
    let f32s = |b: Vec<u8>| b.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    let u32s = |b: Vec<u8>| b.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect();
    Ok(TensorSet {
        windows: f32s(read("windows.f32", 4)?),
        labels: f32s(read("labels.f32", 4)?),
        regimes: read("regimes.u8", 1)?,
        scenarios: read("scenarios.u8", 1)?,
        splits: read("splits.u8", 1)?,
        trends: read("trends.u8", 1)?,
        day_index: u32s(read("day_index.u32", 4)?),
        start: u32s(read("start.u32", 4)?),
        descriptor,
    })
}
