use std::io::{Read, Write};
use std::path::Path;

use crate::kernel::SimTime;
use crate::lob::{mid_price, LobSnapshot, BOOK_DEPTH};

use super::DatasetError;

/// Values per record: price and volume on each side for ten levels.
pub const FEATURES: usize = 4 * BOOK_DEPTH;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub time: SimTime,
    /// `[pa1, va1, pb1, vb1, ..., pa10, va10, pb10, vb10]`.
    pub values: [f64; FEATURES],
    pub mid: f64,
}

/// Column index of level `level` (1-based) and field 0..4 (pa, va, pb, vb).
pub const fn feature_index(level: usize, field: usize) -> usize {
    4 * (level - 1) + field
}

pub fn feature_names() -> Vec<String> {
    (1..=BOOK_DEPTH)
        .flat_map(|i| [format!("pa{i}"), format!("va{i}"), format!("pb{i}"), format!("vb{i}")])
        .collect()
}

pub fn csv_header() -> Vec<String> {
    let mut h = vec!["time".to_string()];
    h.extend(feature_names());
    h.push("mid".into());
    h
}

pub fn extract_features(s: &LobSnapshot) -> Result<FeatureRecord, DatasetError> {
    let mid = mid_price(s).map_err(|_| DatasetError::PaddedBestLevel(s.time))?;
    if s.asks.len() != BOOK_DEPTH || s.bids.len() != BOOK_DEPTH {
        return Err(DatasetError::Malformed(format!(
            "snapshot at {} has {} ask and {} bid levels",
            s.time,
            s.asks.len(),
            s.bids.len()
        )));
    }
    let mut values = [0.0; FEATURES];
    for (i, (a, b)) in s.asks.iter().zip(&s.bids).enumerate() {
        values[4 * i] = a.price as f64;
        values[4 * i + 1] = a.volume as f64;
        values[4 * i + 2] = b.price as f64;
        values[4 * i + 3] = b.volume as f64;
    }
    Ok(FeatureRecord {
        time: s.time,
        values,
        mid: mid.as_cents(),
    })
}

/// Writes the records of `snapshots` that have two real best levels and
/// returns how many were written.
pub fn write_day_csv_to<W: Write>(out: W, snapshots: &[LobSnapshot]) -> Result<usize, DatasetError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header())?;
    let mut written = 0;
    let mut row: Vec<String> = Vec::with_capacity(FEATURES + 2);
    for s in snapshots {
        let Ok(mid) = mid_price(s) else { continue };
        row.clear();
        row.push(s.time.to_string());
        for (a, b) in s.asks.iter().zip(&s.bids) {
            row.extend([a.price.to_string(), a.volume.to_string(), b.price.to_string(), b.volume.to_string()]);
        }
        row.push(mid.to_string());
        w.write_record(&row)?;
        written += 1;
    }
    w.flush()?;
    Ok(written)
}

pub fn write_day_csv(path: &Path, snapshots: &[LobSnapshot]) -> Result<usize, DatasetError> {
    let f = std::fs::File::create(path)?;
    write_day_csv_to(std::io::BufWriter::new(f), snapshots)
}

pub fn read_day_csv_from<R: Read>(input: R) -> Result<Vec<FeatureRecord>, DatasetError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != csv_header() {
        return Err(DatasetError::Malformed("unexpected day file header".into()));
    }
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let field = |i: usize| -> Result<f64, DatasetError> {
            row[i]
                .parse::<f64>()
                .map_err(|e| DatasetError::Malformed(format!("line {}: {e}", out.len() + 2)))
        };
        let time = row[0]
            .parse::<u64>()
            .map_err(|e| DatasetError::Malformed(format!("line {}: {e}", out.len() + 2)))?;
        let mut values = [0.0; FEATURES];
        for (k, v) in values.iter_mut().enumerate() {
            *v = field(k + 1)?;
        }
        let rec = FeatureRecord {
            time: SimTime(time),
            values,
            mid: field(FEATURES + 1)?,
        };
        if out.last().is_some_and(|p: &FeatureRecord| p.time >= rec.time) {
            return Err(DatasetError::Malformed(format!("times not increasing at line {}", out.len() + 2)));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn read_day_csv(path: &Path) -> Result<Vec<FeatureRecord>, DatasetError> {
    read_day_csv_from(std::io::BufReader::new(std::fs::File::open(path)?))
}
