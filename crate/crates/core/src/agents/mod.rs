//! Background trading agents.
//!
//! Each agent type is split into a config, a handful of pure decision
//! functions, and a small state struct that the market simulation drives from
//! kernel wakeups. Agents read the book through a [`MarketView`] taken at the
//! wakeup instant; the exchange has no processing latency.

mod market_maker;
mod momentum;
mod noise;
mod value;

pub use market_maker::{mm_quotes, MarketMaker, MarketMakerCfg, QuoteLadder};
pub use momentum::{momentum_signal, MomentumAgent, MomentumAgentCfg, Signal};
pub use noise::{noise_action, NoiseAction, NoiseAgentCfg};
pub use value::{value_belief_update, value_decide, Belief, ValueAgent, ValueAgentCfg};

use thiserror::Error;

use crate::lob::{HalfCents, LevelView, Price, Qty, Side};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("negative time step {0}")]
    NegativeStep(f64),
    #[error("negative variance {0}")]
    NegativeVariance(f64),
}

/// What an agent can see of the book at a wakeup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarketView {
    pub best_bid: Option<LevelView>,
    pub best_ask: Option<LevelView>,
    /// Most recent two-sided mid, or the day's opening reference.
    pub last_mid: HalfCents,
}

impl MarketView {
    pub fn mid(&self) -> Option<HalfCents> {
        Some(HalfCents::mid_of(self.best_bid?.price, self.best_ask?.price))
    }

    pub fn best(&self, side: Side) -> Option<LevelView> {
        match side {
            Side::Bid => self.best_bid,
            Side::Ask => self.best_ask,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LimitOrderIntent {
    pub side: Side,
    pub price: Price,
    pub size: Qty,
}
