use serde::{Deserialize, Serialize};

use crate::config::Scenario;
use crate::kernel::SimTime;

use super::features::{FeatureRecord, FEATURES};

/// Records per input window.
pub const LOOKBACK: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    NoShock,
    PreShock,
    PostShock,
}

impl Regime {
    pub fn code(self) -> u8 {
        match self {
            Regime::NoShock => 0,
            Regime::PreShock => 1,
            Regime::PostShock => 2,
        }
    }
}

/// One day of records stored column-contiguously per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DaySeries {
    pub day_index: usize,
    pub scenario: Scenario,
    pub t_s: Option<SimTime>,
    pub times: Vec<SimTime>,
    /// Row-major `len × FEATURES`.
    pub features: Vec<f64>,
    pub mids: Vec<f64>,
}

impl DaySeries {
    pub fn from_records(day_index: usize, scenario: Scenario, t_s: Option<SimTime>, records: &[FeatureRecord]) -> Self {
        Self {
            day_index,
            scenario,
            t_s,
            times: records.iter().map(|r| r.time).collect(),
            features: records.iter().flat_map(|r| r.values).collect(),
            mids: records.iter().map(|r| r.mid).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * FEATURES..(i + 1) * FEATURES]
    }

    /// Windows with horizon `h`: `len − LOOKBACK − h + 1`, or zero.
    pub fn window_count(&self, h: usize) -> usize {
        window_count(self.len(), h)
    }

    /// Regime of the window starting at row `start`, decided by its last row.
    pub fn regime(&self, start: usize) -> Regime {
        let end = self.times[start + LOOKBACK - 1];
        match self.t_s {
            None => Regime::NoShock,
            Some(t) if end >= t => Regime::PostShock,
            Some(_) => Regime::PreShock,
        }
    }

    /// Number of leading windows that are not post-shock.
    pub fn pre_shock_windows(&self, h: usize) -> usize {
        let n = self.window_count(h);
        match self.t_s {
            None => n,
            Some(t) => self.times[LOOKBACK - 1..LOOKBACK - 1 + n].partition_point(|x| *x < t),
        }
    }

    pub fn label(&self, start: usize, h: usize) -> f64 {
        self.mids[start + LOOKBACK - 1 + h]
    }

    pub fn window(&self, start: usize, h: usize) -> WindowSample {
        let end = start + LOOKBACK - 1;
        WindowSample {
            x: self.features[start * FEATURES..(end + 1) * FEATURES].to_vec(),
            y: self.label(start, h),
            day_index: self.day_index,
            scenario: self.scenario,
            regime: self.regime(start),
            end_time: self.times[end],
        }
    }
}

pub fn window_count(records: usize, h: usize) -> usize {
    (records + 1).saturating_sub(LOOKBACK + h)
}

/// A materialized input window and its label.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    /// Row-major `LOOKBACK × FEATURES`.
    pub x: Vec<f64>,
    pub y: f64,
    pub day_index: usize,
    pub scenario: Scenario,
    pub regime: Regime,
    pub end_time: SimTime,
}

impl WindowSample {
    pub fn last_row(&self) -> &[f64] {
        &self.x[(LOOKBACK - 1) * FEATURES..]
    }
}

/// All stride-1 windows of a day; empty when the day is too short.
pub fn build_windows(day: &DaySeries, h: usize) -> Vec<WindowSample> {
    (0..day.window_count(h)).map(|s| day.window(s, h)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(n: usize, t_s: Option<u64>) -> DaySeries {
        let records: Vec<FeatureRecord> = (0..n)
            .map(|i| FeatureRecord {
                time: SimTime(i as u64 * 10),
                values: [i as f64; FEATURES],
                mid: 1000.0 + i as f64,
            })
            .collect();
        DaySeries::from_records(3, Scenario::Small, t_s.map(SimTime), &records)
    }

    #[test]
    fn window_count_formula() {
        assert_eq!(build_windows(&day(150, None), 10).len(), 41);
        assert_eq!(build_windows(&day(109, None), 10).len(), 0);
        assert_eq!(build_windows(&day(110, None), 10).len(), 1);
        assert_eq!(build_windows(&day(0, None), 10).len(), 0);
    }

    #[test]
    fn labels_are_h_steps_after_last_row() {
        let d = day(150, None);
        for w in build_windows(&d, 10) {
            let last = w.last_row()[0] as usize;
            assert_eq!(w.y, 1000.0 + (last + 10) as f64);
            assert_eq!(w.x.len(), LOOKBACK * FEATURES);
            assert_eq!(w.regime, Regime::NoShock);
        }
    }

    #[test]
    fn shock_boundary() {
        // Window starting at s ends at row s + 99, time 10 (s + 99).
        let d = day(150, Some(10 * 120));
        let ws = build_windows(&d, 10);
        assert_eq!(ws[20].end_time, SimTime(1190));
        assert_eq!(ws[20].regime, Regime::PreShock);
        assert_eq!(ws[21].end_time, SimTime(1200));
        assert_eq!(ws[21].regime, Regime::PostShock);
        assert_eq!(d.pre_shock_windows(10), 21);
        let first_post = ws.iter().position(|w| w.regime == Regime::PostShock).unwrap();
        assert!(ws[first_post..].iter().all(|w| w.regime == Regime::PostShock));
    }
}
