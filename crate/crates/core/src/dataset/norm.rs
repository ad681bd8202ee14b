use serde::{Deserialize, Serialize};

use super::features::FEATURES;
use super::windows::{DaySeries, LOOKBACK};
use super::DatasetError;

/// Standard deviations below this are replaced by it, so constant columns
/// normalize to zero instead of dividing by zero.
pub const STD_FLOOR: f64 = 1e-8;

/// Per-column z-score parameters fit on training data. The mid column of
/// every record is normalized with the label statistics so that inputs and
/// targets share one scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
    pub y_mean: f64,
    pub y_std: f64,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (mut n, mut sum) = (0usize, 0.0);
    for v in values.clone() {
        n += 1;
        sum += v;
    }
    let mean = sum / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    (mean, var.sqrt().max(STD_FLOOR))
}

impl NormStats {
    /// Leaves every value unchanged.
    pub fn identity() -> Self {
        Self {
            feature_mean: vec![0.0; FEATURES],
            feature_std: vec![1.0; FEATURES],
            y_mean: 0.0,
            y_std: 1.0,
        }
    }

    /// Fits on the rows covered by the windows of `days` and on their labels.
    pub fn fit(days: &[&DaySeries], h: usize) -> Result<Self, DatasetError> {
        let spans: Vec<(&DaySeries, usize)> = days
            .iter()
            .map(|d| (*d, d.window_count(h)))
            .filter(|(_, w)| *w > 0)
            .collect();
        if spans.is_empty() {
            return Err(DatasetError::EmptySplit("no training windows to fit normalization on".into()));
        }
        let rows = spans.iter().flat_map(|(d, w)| (0..w + LOOKBACK - 1).map(move |r| d.row(r)));
        let mut feature_mean = Vec::with_capacity(FEATURES);
        let mut feature_std = Vec::with_capacity(FEATURES);
        for c in 0..FEATURES {
            let (m, s) = mean_std(rows.clone().map(|r| r[c]));
            feature_mean.push(m);
            feature_std.push(s);
        }
        let labels = spans.iter().flat_map(|(d, w)| (0..*w).map(move |s| d.label(s, h)));
        let (y_mean, y_std) = mean_std(labels);
        Ok(Self {
            feature_mean,
            feature_std,
            y_mean,
            y_std,
        })
    }

    pub fn apply_row(&self, row: &mut [f64]) {
        for ((v, m), s) in row.iter_mut().zip(&self.feature_mean).zip(&self.feature_std) {
            *v = (*v - m) / s;
        }
    }

    pub fn invert_row(&self, row: &mut [f64]) {
        for ((v, m), s) in row.iter_mut().zip(&self.feature_mean).zip(&self.feature_std) {
            *v = *v * s + m;
        }
    }

    pub fn apply_y(&self, y: f64) -> f64 {
        (y - self.y_mean) / self.y_std
    }

    pub fn invert_y(&self, z: f64) -> f64 {
        z * self.y_std + self.y_mean
    }

    /// Normalizes every row and mid of `day` in place.
    pub fn apply_day(&self, day: &mut DaySeries) {
        for row in day.features.chunks_exact_mut(FEATURES) {
            self.apply_row(row);
        }
        for m in &mut day.mids {
            *m = self.apply_y(*m);
        }
    }

    pub fn invert_day(&self, day: &mut DaySeries) {
        for row in day.features.chunks_exact_mut(FEATURES) {
            self.invert_row(row);
        }
        for m in &mut day.mids {
            *m = self.invert_y(*m);
        }
    }
}
