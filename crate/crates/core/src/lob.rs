//! Price-time priority limit order book.
//!
//! Prices are integer cents with a one-cent tick. Each side is a sorted map
//! from price to a FIFO queue of resting orders. Incoming orders match against
//! the opposite side best price first and oldest first within a level; trades
//! print at the resting order's price.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::SimTime;

pub type Price = i64;
pub type Qty = u64;
pub type OrderId = u64;
pub type AgentId = u32;

/// Levels per side in recorded snapshots.
pub const BOOK_DEPTH: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bid,
    Ask,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Bid => Side::Ask,
            Side::Ask => Side::Bid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    Limit { price: Price },
    Market,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    pub id: OrderId,
    pub agent_id: AgentId,
    pub side: Side,
    pub kind: OrderKind,
    pub size: Qty,
    pub entry_time: SimTime,
}

impl Order {
    pub fn limit(id: OrderId, agent_id: AgentId, side: Side, price: Price, size: Qty, t: SimTime) -> Self {
        Order {
            id,
            agent_id,
            side,
            kind: OrderKind::Limit { price },
            size,
            entry_time: t,
        }
    }

    pub fn market(id: OrderId, agent_id: AgentId, side: Side, size: Qty, t: SimTime) -> Self {
        Order {
            id,
            agent_id,
            side,
            kind: OrderKind::Market,
            size,
            entry_time: t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestingOrder {
    pub id: OrderId,
    pub agent_id: AgentId,
    /// Remaining size.
    pub size: Qty,
    pub entry_time: SimTime,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BookLevel {
    pub price: Price,
    pub queue: VecDeque<RestingOrder>,
    pub total_volume: Qty,
}

impl BookLevel {
    fn new(price: Price) -> Self {
        Self {
            price,
            queue: VecDeque::new(),
            total_volume: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fill {
    pub taker_order_id: OrderId,
    pub maker_order_id: OrderId,
    pub taker_agent_id: AgentId,
    pub maker_agent_id: AgentId,
    pub price: Price,
    pub size: Qty,
    pub time: SimTime,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LimitOutcome {
    pub fills: Vec<Fill>,
    /// Size left resting at the limit price.
    pub rested: Qty,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LobError {
    #[error("order id {0} already used today")]
    DuplicateOrderId(OrderId),
    #[error("order {0} has zero size")]
    ZeroSize(OrderId),
    #[error("order {id} has non-positive limit price {price}")]
    NonPositivePrice { id: OrderId, price: Price },
    #[error("order {0} has the wrong kind for this entry point")]
    WrongKind(OrderId),
    #[error("{0:?} side of the book is empty")]
    EmptySide(Side),
    #[error("best level is padded")]
    PaddedBestLevel,
}

/// Aggregated price level as seen in a snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelView {
    pub price: Price,
    pub volume: Qty,
}

/// Top-of-book view: asks ascending, bids descending. Levels past the real
/// depth are padded one tick further out per level with zero volume.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LobSnapshot {
    pub time: SimTime,
    pub asks: Vec<LevelView>,
    pub bids: Vec<LevelView>,
}

impl LobSnapshot {
    pub fn depth(&self) -> usize {
        self.asks.len().min(self.bids.len())
    }

    pub fn mid(&self) -> Result<HalfCents, LobError> {
        mid_price(self)
    }
}

/// A price in half-cent units, exact for the mean of two cent prices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfCents(pub i64);

impl HalfCents {
    pub fn from_cents(c: Price) -> Self {
        HalfCents(2 * c)
    }

    pub fn mid_of(bid: Price, ask: Price) -> Self {
        HalfCents(bid + ask)
    }

    pub fn as_cents(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn floor_cents(self) -> Price {
        self.0.div_euclid(2)
    }

    pub fn ceil_cents(self) -> Price {
        -(-self.0).div_euclid(2)
    }
}

impl fmt::Display for HalfCents {
    /// Cents with exactly one decimal, e.g. `99999.5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.floor_cents();
        let frac = if self.0.rem_euclid(2) == 1 { 5 } else { 0 };
        write!(f, "{whole}.{frac}")
    }
}

/// `(best ask + best bid) / 2`. Both best levels must be real.
pub fn mid_price(snapshot: &LobSnapshot) -> Result<HalfCents, LobError> {
    match (snapshot.asks.first(), snapshot.bids.first()) {
        (Some(a), Some(b)) if a.volume > 0 && b.volume > 0 => Ok(HalfCents::mid_of(b.price, a.price)),
        _ => Err(LobError::PaddedBestLevel),
    }
}

#[derive(Debug, Clone, Default)]
pub struct OrderBook {
    bids: BTreeMap<Price, BookLevel>,
    asks: BTreeMap<Price, BookLevel>,
    index: HashMap<OrderId, (Side, Price)>,
    seen: HashSet<OrderId>,
}

impl OrderBook {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn best_bid(&self) -> Option<LevelView> {
        self.bids.values().next_back().map(|l| LevelView {
            price: l.price,
            volume: l.total_volume,
        })
    }

    pub fn best_ask(&self) -> Option<LevelView> {
        self.asks.values().next().map(|l| LevelView {
            price: l.price,
            volume: l.total_volume,
        })
    }

    pub fn mid(&self) -> Option<HalfCents> {
        Some(HalfCents::mid_of(self.best_bid()?.price, self.best_ask()?.price))
    }

    pub fn resting_count(&self) -> usize {
        self.index.len()
    }

    pub fn contains(&self, id: OrderId) -> bool {
        self.index.contains_key(&id)
    }

    /// Levels from best outward.
    pub fn levels(&self, side: Side) -> Box<dyn Iterator<Item = &BookLevel> + '_> {
        match side {
            Side::Bid => Box::new(self.bids.values().rev()),
            Side::Ask => Box::new(self.asks.values()),
        }
    }

    pub fn submit(&mut self, order: &Order) -> Result<LimitOutcome, LobError> {
        match order.kind {
            OrderKind::Limit { .. } => self.submit_limit(order),
            OrderKind::Market => self.submit_market(order).map(|fills| LimitOutcome { fills, rested: 0 }),
        }
    }

    /// Matches a limit order and rests any remainder at its limit price.
    pub fn submit_limit(&mut self, order: &Order) -> Result<LimitOutcome, LobError> {
        let OrderKind::Limit { price } = order.kind else {
            return Err(LobError::WrongKind(order.id));
        };
        if price <= 0 {
            return Err(LobError::NonPositivePrice { id: order.id, price });
        }
        self.admit(order)?;
        let mut fills = Vec::new();
        let remaining = self.take_liquidity(order, Some(price), &mut fills);
        if remaining > 0 {
            let book = match order.side {
                Side::Bid => &mut self.bids,
                Side::Ask => &mut self.asks,
            };
            let level = book.entry(price).or_insert_with(|| BookLevel::new(price));
            level.queue.push_back(RestingOrder {
                id: order.id,
                agent_id: order.agent_id,
                size: remaining,
                entry_time: order.entry_time,
            });
            level.total_volume += remaining;
            self.index.insert(order.id, (order.side, price));
        }
        Ok(LimitOutcome {
            fills,
            rested: remaining,
        })
    }

    /// Walks the opposite side until filled or exhausted. Any unfilled
    /// remainder is discarded; an empty opposite side yields no fills.
    pub fn submit_market(&mut self, order: &Order) -> Result<Vec<Fill>, LobError> {
        if order.kind != OrderKind::Market {
            return Err(LobError::WrongKind(order.id));
        }
        self.admit(order)?;
        let mut fills = Vec::new();
        self.take_liquidity(order, None, &mut fills);
        Ok(fills)
    }

    /// Removes a resting order. Returns false for unknown, filled or already
    /// cancelled ids.
    pub fn cancel(&mut self, id: OrderId) -> bool {
        let Some((side, price)) = self.index.remove(&id) else {
            return false;
        };
        let book = match side {
            Side::Bid => &mut self.bids,
            Side::Ask => &mut self.asks,
        };
        let level = book.get_mut(&price).expect("indexed level exists");
        let pos = level
            .queue
            .iter()
            .position(|o| o.id == id)
            .expect("indexed order is queued");
        let removed = level.queue.remove(pos).expect("position valid");
        level.total_volume -= removed.size;
        if level.queue.is_empty() {
            book.remove(&price);
        }
        true
    }

    /// Top `depth` levels per side. Fails if either side has no orders.
    pub fn snapshot(&self, time: SimTime, depth: usize) -> Result<LobSnapshot, LobError> {
        let asks = collect_side(self.asks.values(), depth, 1).ok_or(LobError::EmptySide(Side::Ask))?;
        let bids = collect_side(self.bids.values().rev(), depth, -1).ok_or(LobError::EmptySide(Side::Bid))?;
        Ok(LobSnapshot { time, asks, bids })
    }

    fn admit(&mut self, order: &Order) -> Result<(), LobError> {
        if order.size == 0 {
            return Err(LobError::ZeroSize(order.id));
        }
        if !self.seen.insert(order.id) {
            return Err(LobError::DuplicateOrderId(order.id));
        }
        Ok(())
    }

    fn take_liquidity(&mut self, order: &Order, limit: Option<Price>, fills: &mut Vec<Fill>) -> Qty {
        let mut remaining = order.size;
        while remaining > 0 {
            let mut entry = match order.side {
                Side::Bid => match self.asks.first_entry() {
                    Some(e) if limit.is_none_or(|p| *e.key() <= p) => e,
                    _ => break,
                },
                Side::Ask => match self.bids.last_entry() {
                    Some(e) if limit.is_none_or(|p| *e.key() >= p) => e,
                    _ => break,
                },
            };
            let level = entry.get_mut();
            while remaining > 0 {
                let Some(maker) = level.queue.front_mut() else {
                    break;
                };
                let traded = remaining.min(maker.size);
                fills.push(Fill {
                    taker_order_id: order.id,
                    maker_order_id: maker.id,
                    taker_agent_id: order.agent_id,
                    maker_agent_id: maker.agent_id,
                    price: level.price,
                    size: traded,
                    time: order.entry_time,
                });
                maker.size -= traded;
                level.total_volume -= traded;
                remaining -= traded;
                if maker.size == 0 {
                    let done = level.queue.pop_front().expect("front exists");
                    self.index.remove(&done.id);
                }
            }
            if level.queue.is_empty() {
                entry.remove();
            }
        }
        remaining
    }
}

fn collect_side<'a>(
    levels: impl Iterator<Item = &'a BookLevel>,
    depth: usize,
    outward: Price,
) -> Option<Vec<LevelView>> {
    let mut out: Vec<LevelView> = levels
        .take(depth)
        .map(|l| LevelView {
            price: l.price,
            volume: l.total_volume,
        })
        .collect();
    let worst = out.last()?.price;
    let real = out.len();
    for k in 1..=(depth - real) {
        out.push(LevelView {
            price: worst + outward * k as Price,
            volume: 0,
        });
    }
    Some(out)
}
