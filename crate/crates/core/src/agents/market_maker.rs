use serde::{Deserialize, Serialize};

use crate::lob::{HalfCents, OrderId, Price, Qty};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketMakerCfg {
    /// Wakeup period in seconds.
    #[serde(rename = "T_MM")]
    pub wake_period: f64,
    pub num_levels: usize,
    pub level_size: Qty,
    pub tick_offset: Price,
}

impl Default for MarketMakerCfg {
    fn default() -> Self {
        Self {
            wake_period: 5.0,
            num_levels: 10,
            level_size: 100,
            tick_offset: 1,
        }
    }
}

impl MarketMakerCfg {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.wake_period > 0.0) || self.num_levels == 0 || self.level_size == 0 || self.tick_offset < 1 {
            return Err(format!("invalid market maker config {self:?}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuoteLadder {
    /// Best first.
    pub bids: Vec<(Price, Qty)>,
    pub asks: Vec<(Price, Qty)>,
}

/// Symmetric ladder around `mid`: level `k` bids at `ceil(mid) - k·offset`
/// and asks at `floor(mid) + k·offset`. For an integer mid that is exactly
/// `mid ∓ k·offset`; for a half-cent mid the first level joins the touch.
pub fn mm_quotes(mid: Option<HalfCents>, cfg: &MarketMakerCfg) -> Option<QuoteLadder> {
    let mid = mid?;
    let (hi, lo) = (mid.ceil_cents(), mid.floor_cents());
    let ladder = |f: &dyn Fn(Price) -> Price| -> Vec<(Price, Qty)> {
        (1..=cfg.num_levels as Price)
            .map(|k| f(k * cfg.tick_offset))
            .filter(|p| *p > 0)
            .map(|p| (p, cfg.level_size))
            .collect()
    };
    Some(QuoteLadder {
        bids: ladder(&|d| hi - d),
        asks: ladder(&|d| lo + d),
    })
}

/// Tracks the ids of the quotes placed at the previous wakeup.
#[derive(Debug, Clone, Default)]
pub struct MarketMaker {
    pub live: Vec<OrderId>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_construction() {
        let cfg = MarketMakerCfg { num_levels: 3, ..Default::default() };
        let q = mm_quotes(Some(HalfCents::from_cents(100_000)), &cfg).unwrap();
        assert_eq!(q.bids, vec![(99_999, 100), (99_998, 100), (99_997, 100)]);
        assert_eq!(q.asks, vec![(100_001, 100), (100_002, 100), (100_003, 100)]);
    }

    #[test]
    fn unchanged_mid_gives_identical_ladder() {
        let cfg = MarketMakerCfg::default();
        let m = Some(HalfCents::from_cents(100_000));
        assert_eq!(mm_quotes(m, &cfg), mm_quotes(m, &cfg));
    }

    #[test]
    fn ladder_follows_mid() {
        let cfg = MarketMakerCfg::default();
        let a = mm_quotes(Some(HalfCents::from_cents(100_000)), &cfg).unwrap();
        let b = mm_quotes(Some(HalfCents::from_cents(100_005)), &cfg).unwrap();
        for (x, y) in a.bids.iter().zip(&b.bids).chain(a.asks.iter().zip(&b.asks)) {
            assert_eq!(y.0 - x.0, 5);
        }
    }

    #[test]
    fn never_crosses_itself() {
        let cfg = MarketMakerCfg { tick_offset: 1, ..Default::default() };
        for m in 199_990..200_010 {
            let q = mm_quotes(Some(HalfCents(m)), &cfg).unwrap();
            let max_bid = q.bids.iter().map(|b| b.0).max().unwrap();
            let min_ask = q.asks.iter().map(|a| a.0).min().unwrap();
            assert!(max_bid < min_ask, "mid {m}");
        }
    }

    #[test]
    fn no_mid_skips() {
        assert_eq!(mm_quotes(None, &MarketMakerCfg::default()), None);
    }
}
