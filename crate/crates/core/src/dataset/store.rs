use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Scenario;
use crate::kernel::SimTime;
use crate::scenario::{read_manifest, DayStatus};

use super::export::{export_tensors, TensorDescriptor};
use super::features::{read_day_csv, FEATURES};
use super::norm::NormStats;
use super::splits::{make_splits, Split, SplitPlan};
use super::trend::trend_label;
use super::windows::{DaySeries, LOOKBACK};
use super::DatasetError;

pub const DESCRIPTOR_FILE: &str = "dataset.json";
pub const RECORDS_FILE: &str = "records.f64";
pub const TIMES_FILE: &str = "times.u64";

/// Columns per stored record: the features followed by the mid.
pub const RECORD_WIDTH: usize = FEATURES + 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub horizon: usize,
    pub normalize: bool,
    pub trend_alpha: f64,
    /// Window stride of the tensor export; `None` skips the export.
    pub export_stride: Option<usize>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            horizon: 10,
            normalize: true,
            trend_alpha: 2e-5,
            export_stride: Some(10),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredDay {
    pub day_index: usize,
    pub scenario: Scenario,
    pub t_s: Option<u64>,
    pub magnitude: Option<f64>,
    pub records: usize,
    /// First row of this day in the records file.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    pub format_version: u32,
    pub root_seed: u64,
    pub config_fingerprint: String,
    pub horizon: usize,
    pub lookback: usize,
    pub features: usize,
    pub normalized: bool,
    pub norm: NormStats,
    pub trend_alpha: f64,
    /// Window counts per split, then per trend class (down, stationary, up).
    pub split_counts: [usize; 4],
    pub trend_counts: [[usize; 3]; 4],
    pub failed_days: Vec<usize>,
    pub days: Vec<StoredDay>,
    pub splits: SplitPlan,
    pub export: Option<TensorDescriptor>,
}

/// Raw day series plus everything needed to rebuild windows and splits.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub descriptor: DatasetDescriptor,
    pub days: Vec<DaySeries>,
}

impl Dataset {
    /// Day series in the model domain: normalized when the dataset was built
    /// with normalization, raw otherwise.
    pub fn model_days(&self) -> Vec<DaySeries> {
        self.days
            .iter()
            .map(|d| {
                let mut d = d.clone();
                self.descriptor.norm.apply_day(&mut d);
                d
            })
            .collect()
    }

    pub fn plan(&self) -> &SplitPlan {
        &self.descriptor.splits
    }
}

/// Reads the generated day files in `input` and writes the dataset to `out`.
pub fn build_dataset(input: &Path, out: &Path, opts: BuildOptions) -> Result<DatasetDescriptor, DatasetError> {
    if opts.horizon == 0 {
        return Err(DatasetError::OutOfRange("horizon must be at least one record".into()));
    }
    let manifest = read_manifest(input).map_err(|e| DatasetError::Malformed(e.to_string()))?;
    let ok: Vec<_> = manifest.days.iter().filter(|d| d.status == DayStatus::Ok).collect();
    let failed_days = manifest
        .days
        .iter()
        .filter(|d| d.status != DayStatus::Ok)
        .map(|d| d.day_index)
        .collect();
    let days = ok
        .par_iter()
        .map(|e| -> Result<DaySeries, DatasetError> {
            let file = e
                .file
                .as_ref()
                .ok_or_else(|| DatasetError::Malformed(format!("day {} has no file", e.day_index)))?;
            let records = read_day_csv(&input.join(file))?;
            Ok(DaySeries::from_records(e.day_index, e.scenario, e.t_s.map(SimTime), &records))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let h = opts.horizon;
    let plan = make_splits(&days, h, manifest.root_seed)?;
    let norm = if opts.normalize {
        let train: Vec<&DaySeries> = days
            .iter()
            .zip(&plan.days)
            .filter(|(_, p)| !p.ranges(Split::Train).is_empty())
            .map(|(d, _)| d)
            .collect();
        NormStats::fit(&train, h)?
    } else {
        NormStats::identity()
    };

    let mut trend_counts = [[0usize; 3]; 4];
    for (d, p) in days.iter().zip(&plan.days) {
        for s in 0..d.window_count(h) {
            let t = trend_label(&d.mids, s + LOOKBACK - 1, h, opts.trend_alpha)?;
            trend_counts[p.split_of(s).code() as usize][t.class.code() as usize] += 1;
        }
    }

    fs::create_dir_all(out)?;
    let mut stored = Vec::with_capacity(days.len());
    let mut rec = BufWriter::new(fs::File::create(out.join(RECORDS_FILE))?);
    let mut times = BufWriter::new(fs::File::create(out.join(TIMES_FILE))?);
    let mut offset = 0;
    for (d, entry) in days.iter().zip(&ok) {
        for i in 0..d.len() {
            for v in d.row(i).iter().chain(std::iter::once(&d.mids[i])) {
                rec.write_all(&v.to_le_bytes())?;
            }
            times.write_all(&d.times[i].as_nanos().to_le_bytes())?;
        }
        stored.push(StoredDay {
            day_index: d.day_index,
            scenario: d.scenario,
            t_s: d.t_s.map(SimTime::as_nanos),
            magnitude: entry.magnitude,
            records: d.len(),
            offset,
        });
        offset += d.len();
    }
    rec.flush()?;
    times.flush()?;

    let export = match opts.export_stride {
        None => None,
        Some(stride) => {
            let model: Vec<DaySeries> = days
                .iter()
                .map(|d| {
                    let mut d = d.clone();
                    norm.apply_day(&mut d);
                    d
                })
                .collect();
            let raw: Vec<&[f64]> = days.iter().map(|d| d.mids.as_slice()).collect();
            Some(export_tensors(out, &model, &raw, &plan, stride, opts.normalize, opts.trend_alpha)?)
        }
    };

    let desc = DatasetDescriptor {
        format_version: 1,
        root_seed: manifest.root_seed,
        config_fingerprint: manifest.config_fingerprint,
        horizon: h,
        lookback: LOOKBACK,
        features: FEATURES,
        normalized: opts.normalize,
        norm,
        trend_alpha: opts.trend_alpha,
        split_counts: plan.counts(),
        trend_counts,
        failed_days,
        days: stored,
        splits: plan,
        export,
    };
    let mut text = serde_json::to_string_pretty(&desc)?;
    text.push('\n');
    fs::write(out.join(DESCRIPTOR_FILE), text)?;
    Ok(desc)
}

pub fn load_dataset(dir: &Path) -> Result<Dataset, DatasetError> {
    let descriptor: DatasetDescriptor = serde_json::from_str(&fs::read_to_string(dir.join(DESCRIPTOR_FILE))?)?;
    let rec = fs::read(dir.join(RECORDS_FILE))?;
    let times = fs::read(dir.join(TIMES_FILE))?;
    let total: usize = descriptor.days.iter().map(|d| d.records).sum();
    if rec.len() != total * RECORD_WIDTH * 8 || times.len() != total * 8 {
        return Err(DatasetError::Malformed("record files do not match the descriptor".into()));
    }
    let f64_at = |i: usize| f64::from_le_bytes(rec[i * 8..i * 8 + 8].try_into().unwrap());
    let days = descriptor
        .days
        .iter()
        .map(|sd| {
            let mut features = Vec::with_capacity(sd.records * FEATURES);
            let mut mids = Vec::with_capacity(sd.records);
            let mut ts = Vec::with_capacity(sd.records);
            for r in sd.offset..sd.offset + sd.records {
                let base = r * RECORD_WIDTH;
                features.extend((0..FEATURES).map(|c| f64_at(base + c)));
                mids.push(f64_at(base + FEATURES));
                ts.push(SimTime(u64::from_le_bytes(times[r * 8..r * 8 + 8].try_into().unwrap())));
            }
            DaySeries {
                day_index: sd.day_index,
                scenario: sd.scenario,
                t_s: sd.t_s.map(SimTime),
                times: ts,
                features,
                mids,
            }
        })
        .collect();
    Ok(Dataset { descriptor, days })
}
