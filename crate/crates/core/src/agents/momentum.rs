use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::lob::Qty;

/// Moving-average crossover trader.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentumAgentCfg {
    /// Short lookback, in the agent's own mid samples.
    #[serde(rename = "T_min")]
    pub t_min: usize,
    #[serde(rename = "T_max")]
    pub t_max: usize,
    /// Wakeup period in seconds.
    #[serde(rename = "T_MOM")]
    pub wake_period: f64,
    pub size_low: Qty,
    pub size_high: Qty,
}

impl Default for MomentumAgentCfg {
    fn default() -> Self {
        Self {
            t_min: 20,
            t_max: 50,
            wake_period: 1.0,
            size_low: 1,
            size_high: 50,
        }
    }
}

impl MomentumAgentCfg {
    pub fn validate(&self) -> Result<(), String> {
        if self.t_min == 0 || self.t_min >= self.t_max || !(self.wake_period > 0.0) || self.size_low == 0 || self.size_low > self.size_high {
            return Err(format!("invalid momentum agent config {self:?}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    Buy,
    Sell,
    None,
}

/// Compares the mean of the last `t_min` values with the mean of the last
/// `t_max`. The comparison is exact: `sum_min * t_max` vs `sum_max * t_min`.
pub fn momentum_signal(history: &[i64], t_min: usize, t_max: usize) -> Signal {
    if t_min == 0 || t_max == 0 || history.len() < t_max || history.len() < t_min {
        return Signal::None;
    }
    let n = history.len();
    let short: i128 = history[n - t_min..].iter().map(|&v| v as i128).sum();
    let long: i128 = history[n - t_max..].iter().map(|&v| v as i128).sum();
    match (short * t_max as i128).cmp(&(long * t_min as i128)) {
        std::cmp::Ordering::Greater => Signal::Buy,
        std::cmp::Ordering::Less => Signal::Sell,
        std::cmp::Ordering::Equal => Signal::None,
    }
}

/// Rolling window of the agent's own mid samples (half cents).
#[derive(Debug, Clone, Default)]
pub struct MomentumAgent {
    history: VecDeque<i64>,
}

impl MomentumAgent {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a sample and returns the current signal.
    pub fn record(&mut self, mid: i64, cfg: &MomentumAgentCfg) -> Signal {
        self.history.push_back(mid);
        while self.history.len() > cfg.t_max {
            self.history.pop_front();
        }
        momentum_signal(self.history.make_contiguous(), cfg.t_min, cfg.t_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_series_is_flat() {
        assert_eq!(momentum_signal(&[7; 60], 20, 50), Signal::None);
    }

    #[test]
    fn trends() {
        let up: Vec<i64> = (1..=50).collect();
        // short MA 40.5 > long MA 25.5
        assert_eq!(momentum_signal(&up, 20, 50), Signal::Buy);
        let down: Vec<i64> = (1..=50).rev().collect();
        assert_eq!(momentum_signal(&down, 20, 50), Signal::Sell);
    }

    #[test]
    fn short_history_is_silent() {
        let up: Vec<i64> = (1..=49).collect();
        assert_eq!(momentum_signal(&up, 20, 50), Signal::None);
    }

    #[test]
    fn agent_keeps_bounded_window() {
        let cfg = MomentumAgentCfg::default();
        let mut a = MomentumAgent::new();
        let mut last = Signal::None;
        for v in 0..200 {
            last = a.record(v, &cfg);
        }
        assert_eq!(a.history.len(), 50);
        assert_eq!(last, Signal::Buy);
    }

    proptest! {
        #[test]
        fn shift_invariance(xs in prop::collection::vec(-1_000_000i64..1_000_000, 50..80), c in -1_000_000i64..1_000_000) {
            let shifted: Vec<i64> = xs.iter().map(|x| x + c).collect();
            prop_assert_eq!(momentum_signal(&xs, 20, 50), momentum_signal(&shifted, 20, 50));
        }
    }
}
