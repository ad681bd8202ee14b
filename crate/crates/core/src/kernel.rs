//! Discrete-event kernel.
//!
//! The kernel owns simulated time and a priority queue of [`TimedEvent`]s
//! keyed by `(time, seq)`. `seq` is a global insertion counter, so events at
//! the same instant are delivered in the order they were scheduled. The
//! kernel is single threaded; one instance drives one simulated day.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const NANOS_PER_SEC: u64 = 1_000_000_000;

/// Integer nanoseconds since market open.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_nanos(ns: u64) -> Self {
        SimTime(ns)
    }

    pub const fn from_secs(s: u64) -> Self {
        SimTime(s * NANOS_PER_SEC)
    }

    /// Rounds to the nearest nanosecond. Negative inputs clamp to zero.
    pub fn from_secs_f64(s: f64) -> Self {
        SimTime((s * NANOS_PER_SEC as f64).round().max(0.0) as u64)
    }

    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / NANOS_PER_SEC as f64
    }

    pub fn saturating_add_nanos(self, ns: u64) -> Self {
        SimTime(self.0.saturating_add(ns))
    }

    pub fn saturating_sub(self, other: SimTime) -> u64 {
        self.0.saturating_sub(other.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Recipient of an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Exchange,
    /// Holder of the latent fundamental value.
    Oracle,
    Agent(u32),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Exchange => f.write_str("exchange"),
            Target::Oracle => f.write_str("oracle"),
            Target::Agent(id) => write!(f, "agent{id}"),
        }
    }
}

/// Event payloads expose a short kind tag for traces.
pub trait Payload {
    fn kind(&self) -> &'static str;
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimedEvent<P> {
    pub time: SimTime,
    pub seq: u64,
    pub target: Target,
    pub payload: P,
}

struct Queued<P>(TimedEvent<P>);

impl<P> Queued<P> {
    fn key(&self) -> (SimTime, u64) {
        (self.0.time, self.0.seq)
    }
}

impl<P> PartialEq for Queued<P> {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl<P> Eq for Queued<P> {}

impl<P> PartialOrd for Queued<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<P> Ord for Queued<P> {
    // BinaryHeap is a max-heap; invert so the smallest key pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.key().cmp(&self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub time: SimTime,
    pub seq: u64,
    pub target: Target,
    pub kind: &'static str,
}

/// Events delivered by one `run_until` call. Entries are only kept when the
/// kernel was built with tracing enabled; the count is always maintained.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventTrace {
    pub delivered: u64,
    pub entries: Vec<TraceEntry>,
}

impl EventTrace {
    /// Writes `time,seq,target,payload_kind` lines.
    pub fn write_lines<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.entries {
            writeln!(out, "{},{},{},{}", e.time, e.seq, e.target, e.kind)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("event scheduled in the past: requested {requested} ns, now {now} ns")]
    InPast { requested: SimTime, now: SimTime },
}

pub struct Kernel<P> {
    now: SimTime,
    next_seq: u64,
    queue: BinaryHeap<Queued<P>>,
    tracing: bool,
}

impl<P> Default for Kernel<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P> Kernel<P> {
    pub fn new() -> Self {
        Self {
            now: SimTime::ZERO,
            next_seq: 0,
            queue: BinaryHeap::new(),
            tracing: false,
        }
    }

    pub fn with_tracing(mut self, on: bool) -> Self {
        self.tracing = on;
        self
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Enqueues `payload` for `target` at `time`, returning the assigned seq.
    pub fn schedule(&mut self, time: SimTime, target: Target, payload: P) -> Result<u64, KernelError> {
        if time < self.now {
            return Err(KernelError::InPast {
                requested: time,
                now: self.now,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Queued(TimedEvent {
            time,
            seq,
            target,
            payload,
        }));
        Ok(seq)
    }

    /// Delivers every event with `time <= t_end` to `handler` in `(time, seq)`
    /// order. The handler may schedule further events through the kernel
    /// reference it receives. On return the clock reads `max(now, t_end)`.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F) -> EventTrace
    where
        P: Payload,
        F: FnMut(&mut Kernel<P>, TimedEvent<P>),
    {
        let mut trace = EventTrace::default();
        while self.queue.peek().is_some_and(|q| q.0.time <= t_end) {
            let Queued(event) = self.queue.pop().expect("peeked");
            self.now = event.time;
            trace.delivered += 1;
            if self.tracing {
                trace.entries.push(TraceEntry {
                    time: event.time,
                    seq: event.seq,
                    target: event.target,
                    kind: event.payload.kind(),
                });
            }
            handler(self, event);
        }
        if self.now < t_end {
            self.now = t_end;
        }
        trace
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_stream, Purpose, StreamId};
    use rand::Rng;

    #[derive(Debug, Clone, PartialEq)]
    enum Msg {
        Ping(&'static str),
        Wake,
    }

    impl Payload for Msg {
        fn kind(&self) -> &'static str {
            match self {
                Msg::Ping(_) => "ping",
                Msg::Wake => "wakeup",
            }
        }
    }

    #[test]
    fn equal_times_deliver_in_insertion_order() {
        let mut k = Kernel::new();
        k.schedule(SimTime(100), Target::Agent(0), Msg::Ping("A")).unwrap();
        k.schedule(SimTime(100), Target::Agent(0), Msg::Ping("B")).unwrap();
        let mut got = vec![];
        k.run_until(SimTime(1000), |_, ev| {
            if let Msg::Ping(s) = ev.payload {
                got.push(s)
            }
        });
        assert_eq!(got, vec!["A", "B"]);
    }

    #[test]
    fn past_events_rejected() {
        let mut k: Kernel<Msg> = Kernel::new();
        k.run_until(SimTime(500), |_, _| {});
        let err = k.schedule(SimTime(499), Target::Exchange, Msg::Wake).unwrap_err();
        assert_eq!(
            err,
            KernelError::InPast {
                requested: SimTime(499),
                now: SimTime(500)
            }
        );
        assert!(k.schedule(SimTime(500), Target::Exchange, Msg::Wake).is_ok());
    }

    #[test]
    fn empty_queue_advances_clock() {
        let mut k: Kernel<Msg> = Kernel::new();
        let trace = k.run_until(SimTime::from_secs(1), |_, _| unreachable!());
        assert_eq!(trace.delivered, 0);
        assert!(trace.entries.is_empty());
        assert_eq!(k.now(), SimTime::from_secs(1));
    }

    #[test]
    fn random_schedule_delivers_sorted() {
        let mut rng = derive_stream(1, StreamId::new(0, 0, Purpose::Custom));
        let mut k = Kernel::new().with_tracing(true);
        let mut scheduled = Vec::new();
        for _ in 0..10_000 {
            let t = SimTime(rng.random_range(0..1_000_000));
            let seq = k.schedule(t, Target::Exchange, Msg::Wake).unwrap();
            scheduled.push((t, seq));
        }
        let trace = k.run_until(SimTime(u64::MAX), |_, _| {});
        scheduled.sort();
        let delivered: Vec<_> = trace.entries.iter().map(|e| (e.time, e.seq)).collect();
        assert_eq!(delivered, scheduled);
    }

    #[test]
    fn self_rescheduling_agent_wakes_twelve_times() {
        let period = SimTime::from_secs(5).as_nanos();
        let mut k = Kernel::new();
        k.schedule(SimTime(period), Target::Agent(1), Msg::Wake).unwrap();
        let mut wakes = 0;
        k.run_until(SimTime::from_secs(60), |k, ev| {
            wakes += 1;
            let next = ev.time.saturating_add_nanos(period);
            k.schedule(next, ev.target, Msg::Wake).unwrap();
        });
        assert_eq!(wakes, 12);
    }

    #[test]
    fn traces_are_reproducible() {
        fn run(seed: u64) -> Vec<u8> {
            let mut rng = derive_stream(seed, StreamId::new(0, 0, Purpose::Custom));
            let mut k = Kernel::new().with_tracing(true);
            for a in 0..5 {
                k.schedule(SimTime(rng.random_range(0..1000)), Target::Agent(a), Msg::Wake)
                    .unwrap();
            }
            let trace = k.run_until(SimTime(100_000), |k, ev| {
                let dt = rng.random_range(1..1000);
                k.schedule(ev.time.saturating_add_nanos(dt), ev.target, Msg::Wake)
                    .unwrap();
            });
            let mut out = Vec::new();
            trace.write_lines(&mut out).unwrap();
            out
        }
        let a = run(9);
        assert!(!a.is_empty());
        assert_eq!(a, run(9));
        assert_ne!(a, run(10));
        let first = String::from_utf8(a).unwrap();
        assert_eq!(first.lines().next().unwrap().split(',').count(), 4);
    }
}
