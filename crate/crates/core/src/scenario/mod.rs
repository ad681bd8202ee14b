//! Scenario runner: simulates labelled trading days and persists them.

mod generate;
mod market;

pub use generate::{
    assign_scenarios, day_file_name, generate_dataset, read_manifest, scenario_counts, DayEntry, DayStatus, GenerateOptions, Manifest,
    ScenarioCounts, MANIFEST_FILE, ROUNDING_RULE,
};
pub use market::{LogEntry, Message};

use thiserror::Error;

use crate::agents::AgentError;
use crate::config::{ConfigError, Scenario, ScenarioConfig};
use crate::fundamental::{draw_shock, FundamentalError, ShockDraw};
use crate::kernel::{EventTrace, KernelError, SimTime};
use crate::lob::{LobError, LobSnapshot};
use crate::rng::{derive_stream, owner, Purpose, StreamId};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Book(#[from] LobError),
    #[error(transparent)]
    Fundamental(#[from] FundamentalError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("misrouted event: {0}")]
    Misrouted(String),
    #[error("day {0} produced no two-sided snapshots")]
    EmptyDay(usize),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error("{0}")]
    Dataset(String),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Keep the exchange input log for replay checks.
    pub order_log: bool,
    /// Keep a per-event trace.
    pub trace: bool,
}

/// One simulated day.
#[derive(Debug, Clone)]
pub struct DayRecord {
    pub day_index: usize,
    pub scenario: Scenario,
    pub shock: Option<ShockDraw>,
    pub snapshots: Vec<LobSnapshot>,
    /// Sampling instants where one side of the book was empty.
    pub skipped_snapshots: u64,
    /// Wake times of all value agents, in delivery order.
    pub value_arrivals: Vec<SimTime>,
    pub fills: u64,
    pub order_log: Option<Vec<LogEntry>>,
    pub trace: EventTrace,
}

/// The shock drawn for `day_index` under `scenario`, if any. The draw depends
/// only on the root seed and the day index.
pub fn day_shock(cfg: &ScenarioConfig, scenario: Scenario, day_index: usize) -> Option<ShockDraw> {
    let spec = cfg.shock_spec(scenario)?;
    let mut rng = derive_stream(cfg.root_seed, StreamId::new(day_index as u64, owner::SHOCK, Purpose::Shock));
    Some(draw_shock(&spec, &mut rng))
}

pub fn run_day(cfg: &ScenarioConfig, scenario: Scenario, day_index: usize) -> Result<DayRecord, ScenarioError> {
    run_day_with(cfg, scenario, day_index, RunOptions::default())
}

pub fn run_day_with(
    cfg: &ScenarioConfig,
    scenario: Scenario,
    day_index: usize,
    opts: RunOptions,
) -> Result<DayRecord, ScenarioError> {
    cfg.validate()?;
    let shock = day_shock(cfg, scenario, day_index);
    let sim = market::MarketSim::new(cfg, scenario, day_index, shock, opts.order_log);
    let out = sim.run(shock, opts.trace)?;
    if out.snapshots.is_empty() {
        return Err(ScenarioError::EmptyDay(day_index));
    }
    Ok(DayRecord {
        day_index,
        scenario,
        shock,
        snapshots: out.snapshots,
        skipped_snapshots: out.skipped_snapshots,
        value_arrivals: out.value_arrivals,
        fills: out.fills,
        order_log: out.order_log,
        trace: out.trace,
    })
}
