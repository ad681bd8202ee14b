//! Learning-ready data: feature records, labelled windows, normalization,
//! trend labels, train/test splits and the tensor export.

mod export;
mod features;
mod norm;
mod splits;
mod store;
mod trend;
mod windows;

pub use export::{export_tensors, load_tensors, TensorDescriptor, TensorFile, TensorSet, TENSORS_FILE};
pub use features::{
    csv_header, extract_features, feature_index, feature_names, read_day_csv, read_day_csv_from, write_day_csv,
    write_day_csv_to, FeatureRecord, FEATURES,
};
pub use norm::{NormStats, STD_FLOOR};
pub use splits::{make_splits, DayPlan, DayRole, Split, SplitPlan, HELD_OUT_FRACTION};
pub use store::{
    build_dataset, load_dataset, BuildOptions, Dataset, DatasetDescriptor, StoredDay, DESCRIPTOR_FILE, RECORDS_FILE,
    RECORD_WIDTH, TIMES_FILE,
};
pub use trend::{trend_label, Trend, TrendLabel};
pub use windows::{build_windows, window_count, DaySeries, Regime, WindowSample, LOOKBACK};

use thiserror::Error;

use crate::kernel::SimTime;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("snapshot at {0} ns has a padded best level")]
    PaddedBestLevel(SimTime),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("empty split: {0}")]
    EmptySplit(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
