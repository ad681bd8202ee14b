use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{LimitOrderIntent, MarketView};
use crate::lob::{Price, Qty, Side};

/// Noise trader: random side, random size, resting near the touch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseAgentCfg {
    /// Length of one interarrival unit in nanoseconds.
    pub tick_ns: u64,
    pub interarrival_low: u64,
    pub interarrival_high: u64,
    pub size_low: Qty,
    pub size_high: Qty,
    /// Half-width of the uniform price perturbation, in ticks.
    pub price_band_ticks: i64,
    /// Cancel the agent's previous order, if still resting, on each wakeup.
    #[serde(default = "yes")]
    pub replace_previous: bool,
}

fn yes() -> bool {
    true
}

impl Default for NoiseAgentCfg {
    fn default() -> Self {
        Self {
            tick_ns: 1_000_000,
            interarrival_low: 1,
            interarrival_high: 100,
            size_low: 1,
            size_high: 100,
            price_band_ticks: 5,
            replace_previous: true,
        }
    }
}

impl NoiseAgentCfg {
    pub fn validate(&self) -> Result<(), String> {
        if self.tick_ns == 0
            || self.interarrival_low == 0
            || self.interarrival_low > self.interarrival_high
            || self.size_low == 0
            || self.size_low > self.size_high
            || self.price_band_ticks < 0
        {
            return Err(format!("invalid noise agent config {self:?}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseAction {
    pub delay_ns: u64,
    pub intent: LimitOrderIntent,
}

/// One noise-agent decision. The price is the same-side best perturbed by a
/// uniform number of ticks in `[-band, band]`; with no same-side quote the
/// order goes one tick outside the last known mid. Noise orders rest, so the
/// price is kept at least one tick away from the opposite best.
pub fn noise_action<R: RngCore + ?Sized>(cfg: &NoiseAgentCfg, view: &MarketView, rng: &mut R) -> NoiseAction {
    let side = if rng.random::<bool>() { Side::Bid } else { Side::Ask };
    let size = rng.random_range(cfg.size_low..=cfg.size_high);
    let mut price = match view.best(side) {
        Some(best) => {
            let band = cfg.price_band_ticks;
            best.price + rng.random_range(-band..=band)
        }
        None => match side {
            Side::Bid => view.last_mid.floor_cents() - 1,
            Side::Ask => view.last_mid.ceil_cents() + 1,
        },
    };
    if let Some(opp) = view.best(side.opposite()) {
        price = match side {
            Side::Bid => price.min(opp.price - 1),
            Side::Ask => price.max(opp.price + 1),
        };
    }
    let delay_ns = cfg.tick_ns * rng.random_range(cfg.interarrival_low..=cfg.interarrival_high);
    NoiseAction {
        delay_ns,
        intent: LimitOrderIntent {
            side,
            price: price.max(1 as Price),
            size,
        },
    }
}
