//! One simulated trading day: the exchange, the oracle holding the latent
//! fundamental, and the background agents, all driven by a single kernel.

use rand::Rng;

use crate::agents::{
    mm_quotes, noise_action, value_decide, Belief, LimitOrderIntent, MarketMaker, MarketView, MomentumAgent, Signal,
    ValueAgent,
};
use crate::config::{Scenario, ScenarioConfig};
use crate::fundamental::{observe, sample_arrivals, FundamentalState, ShockDraw, ShockedArrivals};
use crate::kernel::{EventTrace, Kernel, Payload, SimTime, Target, TimedEvent, NANOS_PER_SEC};
use crate::lob::{AgentId, Fill, HalfCents, LobSnapshot, Order, OrderBook, OrderId, Side, BOOK_DEPTH};
use crate::rng::{derive_stream, owner, Purpose, RngStream, StreamId};

use super::ScenarioError;

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Wakeup,
    Submit(Order),
    Cancel(OrderId),
    Fill(Fill),
    /// Sampling tick for the book recorder.
    MarketData,
    Shock(ShockDraw),
}

impl Payload for Message {
    fn kind(&self) -> &'static str {
        match self {
            Message::Wakeup => "wakeup",
            Message::Submit(_) => "submit",
            Message::Cancel(_) => "cancel",
            Message::Fill(_) => "fill",
            Message::MarketData => "market_data",
            Message::Shock(_) => "shock",
        }
    }
}

/// Exchange input, in arrival order. Replaying it through a fresh book
/// reproduces every recorded snapshot.
#[derive(Debug, Clone, PartialEq)]
pub enum LogEntry {
    Submit(Order),
    Cancel { time: SimTime, id: OrderId },
    Snapshot(SimTime),
}

enum Role {
    MarketMaker(MarketMaker),
    Noise(Option<OrderId>),
    Value(Box<ValueAgent>),
    Momentum(MomentumAgent),
}

struct Slot {
    role: Role,
    rng: RngStream,
    obs_rng: Option<RngStream>,
}

/// Everything one day produces before it is turned into a day record.
pub struct DayOutput {
    pub snapshots: Vec<LobSnapshot>,
    pub skipped_snapshots: u64,
    pub value_arrivals: Vec<SimTime>,
    pub order_log: Option<Vec<LogEntry>>,
    pub trace: EventTrace,
    pub fills: u64,
}

pub struct MarketSim<'a> {
    cfg: &'a ScenarioConfig,
    book: OrderBook,
    fundamental: FundamentalState,
    fundamental_rng: RngStream,
    agents: Vec<Slot>,
    next_order_id: OrderId,
    last_mid: HalfCents,
    snapshots: Vec<LobSnapshot>,
    skipped: u64,
    fills: u64,
    value_arrivals: Vec<SimTime>,
    log: Option<Vec<LogEntry>>,
    fault: Option<ScenarioError>,
    session_end: SimTime,
}

impl<'a> MarketSim<'a> {
    pub fn new(cfg: &'a ScenarioConfig, scenario: Scenario, day_index: usize, shock: Option<ShockDraw>, log: bool) -> Self {
        let day = day_index as u64;
        let seed = cfg.root_seed;
        let ou = cfg.ou_params(scenario);
        let session_end = cfg.session_end();
        let counts = cfg.agents;
        let mut agents = Vec::new();
        let stream = |agent: usize, p: Purpose| derive_stream(seed, StreamId::new(day, agent as u64, p));

        for _ in 0..counts.market_makers {
            let id = agents.len();
            agents.push(Slot {
                role: Role::MarketMaker(MarketMaker::default()),
                rng: stream(id, Purpose::Action),
                obs_rng: None,
            });
        }
        for _ in 0..counts.noise {
            let id = agents.len();
            agents.push(Slot {
                role: Role::Noise(None),
                rng: stream(id, Purpose::Action),
                obs_rng: None,
            });
        }
        let intensity = ShockedArrivals {
            lambda_bar: cfg.value.lambda_bar / NANOS_PER_SEC as f64,
            a_s: cfg.shock_spec(scenario).map_or(0.0, |s| s.a_s),
            theta_s: cfg.shock_spec(scenario).map_or(0.0, |s| s.theta_s),
            t_s: shock.map(|d| d.t_s.as_f64()),
        };
        let prior = Belief {
            mean: ou.mu,
            var: cfg.value.prior_var,
        };
        for _ in 0..counts.value {
            let id = agents.len();
            let mut arrivals_rng = stream(id, Purpose::Arrivals);
            let arrivals = sample_arrivals(0.0, session_end.as_f64(), &intensity, &mut arrivals_rng)
                .expect("session interval is well-formed")
                .into_iter()
                .map(|t| SimTime(t as u64))
                .collect();
            agents.push(Slot {
                role: Role::Value(Box::new(ValueAgent::new(prior, arrivals))),
                rng: stream(id, Purpose::Action),
                obs_rng: Some(stream(id, Purpose::Observation)),
            });
        }
        for _ in 0..counts.momentum {
            let id = agents.len();
            agents.push(Slot {
                role: Role::Momentum(MomentumAgent::new()),
                rng: stream(id, Purpose::Action),
                obs_rng: None,
            });
        }

        Self {
            cfg,
            book: OrderBook::new(),
            fundamental: FundamentalState::new(ou),
            fundamental_rng: derive_stream(seed, StreamId::new(day, owner::FUNDAMENTAL, Purpose::Fundamental)),
            agents,
            next_order_id: 1,
            last_mid: HalfCents::from_cents(ou.mu.round() as i64),
            snapshots: Vec::new(),
            skipped: 0,
            fills: 0,
            value_arrivals: Vec::new(),
            log: log.then(Vec::new),
            fault: None,
            session_end,
        }
    }

    /// Seeds the initial events and runs the session to the close.
    pub fn run(mut self, shock: Option<ShockDraw>, trace: bool) -> Result<DayOutput, ScenarioError> {
        let mut kernel = Kernel::new().with_tracing(trace);
        let end = self.session_end;
        let mom_period = secs(self.cfg.momentum.wake_period);

        // The market maker opens the book.
        for (id, slot) in self.agents.iter_mut().enumerate() {
            let first = match &mut slot.role {
                Role::MarketMaker(_) => Some(SimTime::ZERO),
                Role::Noise(_) => {
                    let n = &self.cfg.noise;
                    Some(SimTime(n.tick_ns * slot.rng.random_range(n.interarrival_low..=n.interarrival_high)))
                }
                Role::Value(v) => v.next_arrival(),
                Role::Momentum(_) => Some(SimTime(mom_period)),
            };
            if let Some(t) = first.filter(|t| *t <= end) {
                kernel.schedule(t, Target::Agent(id as AgentId), Message::Wakeup)?;
            }
        }
        let first_snap = SimTime::from_secs_f64(self.cfg.warmup);
        if first_snap < end {
            kernel.schedule(first_snap, Target::Exchange, Message::MarketData)?;
        }
        if let Some(d) = shock {
            kernel.schedule(d.t_s, Target::Oracle, Message::Shock(d))?;
        }

        let trace = kernel.run_until(end, |k, ev| {
            if self.fault.is_none() {
                if let Err(e) = self.handle(k, ev) {
                    self.fault = Some(e);
                }
            }
        });
        if let Some(e) = self.fault {
            return Err(e);
        }
        Ok(DayOutput {
            snapshots: self.snapshots,
            skipped_snapshots: self.skipped,
            value_arrivals: self.value_arrivals,
            order_log: self.log,
            trace,
            fills: self.fills,
        })
    }

    fn handle(&mut self, k: &mut Kernel<Message>, ev: TimedEvent<Message>) -> Result<(), ScenarioError> {
        let now = ev.time;
        match (ev.target, ev.payload) {
            (Target::Agent(id), Message::Wakeup) => self.wake(k, id, now)?,
            (Target::Agent(_), Message::Fill(_)) => {}
            (Target::Exchange, Message::Submit(order)) => {
                if let Some(log) = &mut self.log {
                    log.push(LogEntry::Submit(order.clone()));
                }
                let out = self.book.submit(&order)?;
                for f in out.fills {
                    self.fills += 1;
                    k.schedule(now, Target::Agent(f.maker_agent_id), Message::Fill(f))?;
                    k.schedule(now, Target::Agent(f.taker_agent_id), Message::Fill(f))?;
                }
            }
            (Target::Exchange, Message::Cancel(id)) => {
                if let Some(log) = &mut self.log {
                    log.push(LogEntry::Cancel { time: now, id });
                }
                self.book.cancel(id);
            }
            (Target::Exchange, Message::MarketData) => {
                if let Some(log) = &mut self.log {
                    log.push(LogEntry::Snapshot(now));
                }
                match self.book.snapshot(now, BOOK_DEPTH) {
                    Ok(s) => self.snapshots.push(s),
                    Err(_) => self.skipped += 1,
                }
                let next = now.saturating_add_nanos(secs(self.cfg.snapshot_period));
                if next < self.session_end {
                    k.schedule(next, Target::Exchange, Message::MarketData)?;
                }
            }
            (Target::Oracle, Message::Shock(d)) => {
                self.fundamental.advance_to(now, &mut self.fundamental_rng)?;
                self.fundamental.apply_shock(&d)?;
            }
            (target, payload) => {
                return Err(ScenarioError::Misrouted(format!("{} to {target}", payload.kind())));
            }
        }
        Ok(())
    }

    fn view(&mut self) -> MarketView {
        let view = MarketView {
            best_bid: self.book.best_bid(),
            best_ask: self.book.best_ask(),
            last_mid: self.last_mid,
        };
        if let Some(m) = view.mid() {
            self.last_mid = m;
        }
        MarketView {
            last_mid: self.last_mid,
            ..view
        }
    }

    fn order_id(&mut self) -> OrderId {
        let id = self.next_order_id;
        self.next_order_id += 1;
        id
    }

    fn submit_limit(&mut self, k: &mut Kernel<Message>, agent: AgentId, now: SimTime, intent: LimitOrderIntent) -> Result<OrderId, ScenarioError> {
        let id = self.order_id();
        let order = Order::limit(id, agent, intent.side, intent.price, intent.size, now);
        k.schedule(now, Target::Exchange, Message::Submit(order))?;
        Ok(id)
    }

    fn wake(&mut self, k: &mut Kernel<Message>, id: AgentId, now: SimTime) -> Result<(), ScenarioError> {
        let view = self.view();
        let cfg = self.cfg;
        let idx = id as usize;
        let next = match &self.agents[idx].role {
            Role::MarketMaker(_) => {
                let stale = match &mut self.agents[idx].role {
                    Role::MarketMaker(mm) => std::mem::take(&mut mm.live),
                    _ => unreachable!(),
                };
                for oid in stale {
                    k.schedule(now, Target::Exchange, Message::Cancel(oid))?;
                }
                let reference = view.mid().or(Some(view.last_mid));
                let mut live = Vec::new();
                if let Some(ladder) = mm_quotes(reference, &cfg.market_maker) {
                    let quotes = ladder
                        .bids
                        .iter()
                        .map(|q| (Side::Bid, *q))
                        .chain(ladder.asks.iter().map(|q| (Side::Ask, *q)));
                    for (side, (price, size)) in quotes {
                        live.push(self.submit_limit(k, id, now, LimitOrderIntent { side, price, size })?);
                    }
                }
                if let Role::MarketMaker(mm) = &mut self.agents[idx].role {
                    mm.live = live;
                }
                Some(now.saturating_add_nanos(secs(cfg.market_maker.wake_period)))
            }
            Role::Noise(_) => {
                let slot = &mut self.agents[idx];
                let action = noise_action(&cfg.noise, &view, &mut slot.rng);
                let Role::Noise(live) = &mut slot.role else { unreachable!() };
                let stale = live.take();
                if let Some(oid) = stale.filter(|_| cfg.noise.replace_previous) {
                    k.schedule(now, Target::Exchange, Message::Cancel(oid))?;
                }
                let oid = self.submit_limit(k, id, now, action.intent)?;
                if let Role::Noise(live) = &mut self.agents[idx].role {
                    *live = Some(oid);
                }
                Some(now.saturating_add_nanos(action.delay_ns))
            }
            Role::Value(_) => {
                self.value_arrivals.push(now);
                let x = self.fundamental.advance_to(now, &mut self.fundamental_rng)?;
                let ou = self.fundamental.params;
                let slot = &mut self.agents[idx];
                let obs_rng = slot.obs_rng.as_mut().expect("value agents own an observation stream");
                let y = observe(x, &cfg.value.obs(), obs_rng);
                let Role::Value(agent) = &mut slot.role else { unreachable!() };
                let belief = agent.observe(now, y, &ou, &cfg.value.obs())?;
                let next = agent.next_arrival();
                if let Some(intent) = value_decide(belief.mean, &view, &cfg.value) {
                    self.submit_limit(k, id, now, intent)?;
                }
                next
            }
            Role::Momentum(_) => {
                let slot = &mut self.agents[idx];
                let Role::Momentum(agent) = &mut slot.role else { unreachable!() };
                if let Some(mid) = view.mid() {
                    let side = match agent.record(mid.0, &cfg.momentum) {
                        Signal::Buy => Some(Side::Bid),
                        Signal::Sell => Some(Side::Ask),
                        Signal::None => None,
                    };
                    if let Some(side) = side {
                        let size = slot.rng.random_range(cfg.momentum.size_low..=cfg.momentum.size_high);
                        let oid = self.order_id();
                        k.schedule(now, Target::Exchange, Message::Submit(Order::market(oid, id, side, size, now)))?;
                    }
                }
                Some(now.saturating_add_nanos(secs(cfg.momentum.wake_period)))
            }
        };
        if let Some(t) = next.filter(|t| *t <= self.session_end) {
            k.schedule(t, Target::Agent(id), Message::Wakeup)?;
        }
        Ok(())
    }
}

fn secs(s: f64) -> u64 {
    SimTime::from_secs_f64(s).as_nanos()
}
