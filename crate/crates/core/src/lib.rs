//! Agent-based limit order book simulator with shock scenarios, a dataset
//! builder for windowed mid-price forecasting, and classical baselines.

pub mod agents;
pub mod bench;
pub mod config;
pub mod dataset;
pub mod fundamental;
pub mod kernel;
pub mod lob;
pub mod rng;
pub mod scenario;
