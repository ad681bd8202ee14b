//! Random order streams replayed through the engine and the reference book.

#![allow(dead_code)]

use rand::{Rng, RngCore};

use dslob_core::kernel::SimTime;
use dslob_core::lob::{Order, OrderBook, Side};

use super::naive_book::NaiveBook;

#[derive(Debug, Clone)]
pub enum Op {
    Submit(Order),
    Cancel(u64),
}

/// Up to `max_len` operations: limits near 100, markets and cancels of
/// earlier ids (some already filled or cancelled).
pub fn random_stream<R: RngCore>(rng: &mut R, max_len: usize) -> Vec<Op> {
    let n = rng.random_range(1..=max_len);
    let mut ops = Vec::with_capacity(n);
    let mut next_id = 1u64;
    for t in 0..n as u64 {
        let side = if rng.random::<bool>() { Side::Bid } else { Side::Ask };
        let roll = rng.random_range(0..10);
        if roll < 2 && next_id > 1 {
            ops.push(Op::Cancel(rng.random_range(1..next_id + 1)));
            continue;
        }
        let size = rng.random_range(1..=20);
        let agent = rng.random_range(0..4);
        let order = if roll < 4 {
            Order::market(next_id, agent, side, size, SimTime(t))
        } else {
            Order::limit(next_id, agent, side, rng.random_range(95..=105), size, SimTime(t))
        };
        next_id += 1;
        ops.push(Op::Submit(order));
    }
    ops
}

fn engine_levels(book: &OrderBook, side: Side) -> Vec<(i64, Vec<(u64, u64)>)> {
    book.levels(side)
        .map(|l| (l.price, l.queue.iter().map(|o| (o.id, o.size)).collect()))
        .collect()
}

/// Runs `ops` through both books, comparing fills after every operation and
/// full queue contents at the end of every step.
pub fn check_stream(ops: &[Op]) -> Result<(), String> {
    let mut book = OrderBook::new();
    let mut naive = NaiveBook::new();
    for (k, op) in ops.iter().enumerate() {
        match op {
            Op::Submit(o) => {
                let got = book.submit(o).map_err(|e| format!("op {k}: {e}"))?.fills;
                let want = naive.submit(o);
                if got != want {
                    return Err(format!("op {k}: fills differ\n engine {got:?}\n reference {want:?}"));
                }
            }
            Op::Cancel(id) => {
                let (a, b) = (book.cancel(*id), naive.cancel(*id));
                if a != b {
                    return Err(format!("op {k}: cancel {id} returned {a} vs {b}"));
                }
            }
        }
        for side in [Side::Bid, Side::Ask] {
            let (a, b) = (engine_levels(&book, side), naive.levels(side));
            if a != b {
                return Err(format!("op {k}: {side:?} levels differ\n engine {a:?}\n reference {b:?}"));
            }
        }
        if let (Some(b), Some(a)) = (book.best_bid(), book.best_ask()) {
            if b.price >= a.price {
                return Err(format!("op {k}: crossed book {b:?} / {a:?}"));
            }
        }
    }
    Ok(())
}
