//! Reference matcher: a flat list of resting orders scanned linearly for the
//! best price and earliest arrival. Slow and obviously correct.

#![allow(dead_code)]

use dslob_core::lob::{Fill, LevelView, LobSnapshot, Order, OrderKind, Side};

#[derive(Debug, Clone, PartialEq)]
pub struct Resting {
    pub id: u64,
    pub agent: u32,
    pub side: Side,
    pub price: i64,
    pub size: u64,
    pub arrival: u64,
}

#[derive(Debug, Default, Clone)]
pub struct NaiveBook {
    pub resting: Vec<Resting>,
    arrivals: u64,
}

impl NaiveBook {
    pub fn new() -> Self {
        Self::default()
    }

    fn best_maker(&self, taker: Side, limit: Option<i64>) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, r) in self.resting.iter().enumerate() {
            if r.side == taker {
                continue;
            }
            let acceptable = match (taker, limit) {
                (_, None) => true,
                (Side::Bid, Some(p)) => r.price <= p,
                (Side::Ask, Some(p)) => r.price >= p,
            };
            if !acceptable {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(j) => {
                    let b = &self.resting[j];
                    let better_price = match taker {
                        Side::Bid => r.price < b.price,
                        Side::Ask => r.price > b.price,
                    };
                    if better_price || (r.price == b.price && r.arrival < b.arrival) {
                        Some(i)
                    } else {
                        Some(j)
                    }
                }
            };
        }
        best
    }

    /// Matches `order` and returns its fills; limit remainders rest.
    pub fn submit(&mut self, order: &Order) -> Vec<Fill> {
        let limit = match order.kind {
            OrderKind::Limit { price } => Some(price),
            OrderKind::Market => None,
        };
        let mut fills = Vec::new();
        let mut left = order.size;
        while left > 0 {
            let Some(i) = self.best_maker(order.side, limit) else { break };
            let m = &mut self.resting[i];
            let q = left.min(m.size);
            fills.push(Fill {
                taker_order_id: order.id,
                maker_order_id: m.id,
                taker_agent_id: order.agent_id,
                maker_agent_id: m.agent,
                price: m.price,
                size: q,
                time: order.entry_time,
            });
            m.size -= q;
            left -= q;
            if m.size == 0 {
                self.resting.remove(i);
            }
        }
        if let (Some(price), true) = (limit, left > 0) {
            self.arrivals += 1;
            self.resting.push(Resting {
                id: order.id,
                agent: order.agent_id,
                side: order.side,
                price,
                size: left,
                arrival: self.arrivals,
            });
        }
        fills
    }

    pub fn cancel(&mut self, id: u64) -> bool {
        match self.resting.iter().position(|r| r.id == id) {
            Some(i) => {
                self.resting.remove(i);
                true
            }
            None => false,
        }
    }

    /// `(price, [(id, size)...])` per level from the best outward.
    pub fn levels(&self, side: Side) -> Vec<(i64, Vec<(u64, u64)>)> {
        let mut prices: Vec<i64> = self.resting.iter().filter(|r| r.side == side).map(|r| r.price).collect();
        prices.sort_unstable();
        prices.dedup();
        if side == Side::Bid {
            prices.reverse();
        }
        prices
            .into_iter()
            .map(|p| {
                let mut q: Vec<&Resting> = self.resting.iter().filter(|r| r.side == side && r.price == p).collect();
                q.sort_by_key(|r| r.arrival);
                (p, q.iter().map(|r| (r.id, r.size)).collect())
            })
            .collect()
    }

    /// Top `depth` levels; missing levels continue one tick further out with
    /// zero volume. `None` when a side is empty.
    pub fn snapshot(&self, time: dslob_core::kernel::SimTime, depth: usize) -> Option<LobSnapshot> {
        let side = |s: Side, step: i64| -> Option<Vec<LevelView>> {
            let lv = self.levels(s);
            if lv.is_empty() {
                return None;
            }
            let mut out: Vec<LevelView> = lv
                .iter()
                .take(depth)
                .map(|(p, q)| LevelView {
                    price: *p,
                    volume: q.iter().map(|x| x.1).sum(),
                })
                .collect();
            while out.len() < depth {
                let last = out.last().unwrap().price;
                out.push(LevelView { price: last + step, volume: 0 });
            }
            Some(out)
        };
        Some(LobSnapshot {
            time,
            asks: side(Side::Ask, 1)?,
            bids: side(Side::Bid, -1)?,
        })
    }
}
