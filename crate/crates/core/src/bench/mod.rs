//! Classical baselines and the per-split RMSE evaluation.

mod ridge;

pub use ridge::{fit_ridge, LinearModel, NormalEquations, RidgeShape, TrainBlock};

use std::io::Write;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Scenario;
use crate::dataset::{Dataset, DaySeries, Split, SplitPlan, FEATURES, LOOKBACK};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("length mismatch: {0} predictions, {1} truths")]
    LengthMismatch(usize, usize),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("ridge lambda must be finite and non-negative, got {0}")]
    Lambda(f64),
    #[error(
        "design is rank deficient ({samples} samples, {dim} features) at lambda = 0; use lambda > 0"
    )]
    RankDeficient { samples: usize, dim: usize },
    #[error("shape: {0}")]
    Shape(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub fn rmse(preds: &[f64], truths: &[f64]) -> Result<f64, BenchError> {
    if preds.len() != truths.len() {
        return Err(BenchError::LengthMismatch(preds.len(), truths.len()));
    }
    if preds.is_empty() {
        return Err(BenchError::Empty("rmse of nothing".into()));
    }
    let sse: f64 = preds.iter().zip(truths).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((sse / preds.len() as f64).sqrt())
}

pub const WINDOW_SHAPE: RidgeShape = RidgeShape {
    lags: LOOKBACK,
    width: FEATURES,
};

/// Forecast of the label of the window starting at `start`.
pub trait Forecaster: Sync {
    fn name(&self) -> &'static str;
    fn predict(&self, day: &DaySeries, start: usize) -> f64;
}

/// Predicts the mid of the window's last record.
pub struct Persistence;

pub fn predict_persistence(day: &DaySeries, start: usize) -> f64 {
    day.mids[start + LOOKBACK - 1]
}

impl Forecaster for Persistence {
    fn name(&self) -> &'static str {
        "persistence"
    }

    fn predict(&self, day: &DaySeries, start: usize) -> f64 {
        predict_persistence(day, start)
    }
}

impl Forecaster for LinearModel {
    fn name(&self) -> &'static str {
        "ridge"
    }

    fn predict(&self, day: &DaySeries, start: usize) -> f64 {
        self.predict_at(&day.features, start)
    }
}

/// Fits ridge on every training window of `plan`. `days` must be in the
/// model domain and line up with `plan.days`.
pub fn fit_ridge_on_split(days: &[DaySeries], plan: &SplitPlan, lambda: f64) -> Result<LinearModel, BenchError> {
    let h = plan.horizon;
    let mut ne = NormalEquations::new(WINDOW_SHAPE);
    for (day, dp) in days.iter().zip(&plan.days) {
        for r in dp.ranges(Split::Train) {
            let targets: Vec<f64> = r.clone().map(|s| day.label(s, h)).collect();
            ne.accumulate(&TrainBlock {
                rows: &day.features,
                first: r.start,
                targets: &targets,
            })?;
        }
    }
    ne.solve(lambda)
}

fn predictions(model: &dyn Forecaster, day: &DaySeries, r: Range<usize>, h: usize) -> (Vec<f64>, Vec<f64>) {
    r.into_par_iter().map(|s| (model.predict(day, s), day.label(s, h))).unzip()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub lambda: Option<f64>,
    /// Scale the errors are measured in.
    pub domain: String,
    pub horizon: usize,
    pub rmse_iid: f64,
    pub rmse_small: f64,
    pub rmse_large: f64,
    pub n_train: usize,
    pub n_iid: usize,
    pub n_small: usize,
    pub n_large: usize,
    pub root_seed: u64,
    pub config_fingerprint: String,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String, BenchError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Errors before and after the shock on one shock day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockDayErrors {
    pub day_index: usize,
    pub scenario: Scenario,
    pub magnitude: Option<f64>,
    pub n_before: usize,
    pub rmse_before: Option<f64>,
    pub n_after: usize,
    pub rmse_after: Option<f64>,
}

pub fn evaluate(model: &dyn Forecaster, dataset: &Dataset, days: &[DaySeries]) -> Result<EvalReport, BenchError> {
    let plan = dataset.plan();
    let h = plan.horizon;
    let mut out = [(Vec::new(), Vec::new()), (Vec::new(), Vec::new()), (Vec::new(), Vec::new())];
    for (day, dp) in days.iter().zip(&plan.days) {
        for (k, split) in [Split::TestIid, Split::TestSmall, Split::TestLarge].into_iter().enumerate() {
            for r in dp.ranges(split) {
                let (p, t) = predictions(model, day, r, h);
                out[k].0.extend(p);
                out[k].1.extend(t);
            }
        }
    }
    let names = ["test_iid", "test_small", "test_large"];
    let mut r = [0.0; 3];
    for k in 0..3 {
        if out[k].0.is_empty() {
            return Err(BenchError::Empty(format!("split {} has no windows", names[k])));
        }
        r[k] = rmse(&out[k].0, &out[k].1)?;
    }
    let desc = &dataset.descriptor;
    Ok(EvalReport {
        model: model.name().into(),
        lambda: None,
        domain: if desc.normalized {
            "mid-price z-score, statistics fit on training days".into()
        } else {
            "raw mid-price, cents".into()
        },
        horizon: h,
        rmse_iid: r[0],
        rmse_small: r[1],
        rmse_large: r[2],
        n_train: plan.count(Split::Train),
        n_iid: out[0].0.len(),
        n_small: out[1].0.len(),
        n_large: out[2].0.len(),
        root_seed: desc.root_seed,
        config_fingerprint: desc.config_fingerprint.clone(),
    })
}

pub fn shock_day_errors(model: &dyn Forecaster, dataset: &Dataset, days: &[DaySeries]) -> Result<Vec<ShockDayErrors>, BenchError> {
    let plan = dataset.plan();
    let h = plan.horizon;
    let mut rows = Vec::new();
    for ((day, dp), stored) in days.iter().zip(&plan.days).zip(&dataset.descriptor.days) {
        if !dp.scenario.is_shock() {
            continue;
        }
        let part = |r: Range<usize>| -> Result<(usize, Option<f64>), BenchError> {
            let n = r.len();
            if n == 0 {
                return Ok((0, None));
            }
            let (p, t) = predictions(model, day, r, h);
            Ok((n, Some(rmse(&p, &t)?)))
        };
        let (n_before, rmse_before) = part(0..dp.pre_shock_windows)?;
        let (n_after, rmse_after) = part(dp.pre_shock_windows..dp.windows)?;
        rows.push(ShockDayErrors {
            day_index: dp.day_index,
            scenario: dp.scenario,
            magnitude: stored.magnitude,
            n_before,
            rmse_before,
            n_after,
            rmse_after,
        });
    }
    Ok(rows)
}

pub fn write_plot_csv<W: Write>(mut out: W, rows: &[ShockDayErrors]) -> Result<(), BenchError> {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.9}")).unwrap_or_default();
    writeln!(out, "day_index,scenario,magnitude,n_before,rmse_before,n_after,rmse_after")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.day_index,
            r.scenario,
            opt(r.magnitude),
            r.n_before,
            opt(r.rmse_before),
            r.n_after,
            opt(r.rmse_after)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(rmse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!((rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 12.5f64.sqrt()).abs() < 1e-12);
        assert!(matches!(rmse(&[1.0], &[]), Err(BenchError::LengthMismatch(1, 0))));
        assert!(matches!(rmse(&[], &[]), Err(BenchError::Empty(_))));
    }
}
