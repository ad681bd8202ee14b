use serde::{Deserialize, Serialize};

use super::DatasetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Down,
    Stationary,
    Up,
}

impl Trend {
    pub fn code(self) -> u8 {
        match self {
            Trend::Down => 0,
            Trend::Stationary => 1,
            Trend::Up => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendLabel {
    pub class: Trend,
    pub alpha: f64,
}

/// Compares the mean of the next `h` mids with `mids[t]`; a relative change
/// beyond `±alpha` is a trend.
pub fn trend_label(mids: &[f64], t: usize, h: usize, alpha: f64) -> Result<TrendLabel, DatasetError> {
    if h == 0 || t + h >= mids.len() {
        return Err(DatasetError::OutOfRange(format!(
            "trend at {t} with horizon {h} over {} mids",
            mids.len()
        )));
    }
    let future = mids[t + 1..=t + h].iter().sum::<f64>() / h as f64;
    let r = (future - mids[t]) / mids[t];
    let class = if r > alpha {
        Trend::Up
    } else if r < -alpha {
        Trend::Down
    } else {
        Trend::Stationary
    };
    Ok(TrendLabel { class, alpha })
}
