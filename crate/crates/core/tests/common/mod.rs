#![allow(dead_code)]

pub mod naive_book;
pub mod streams;

use dslob_core::config::ScenarioConfig;

/// Desk settings over a 2.5 hour session, long enough to contain every shock.
pub fn short_config(n_days: usize) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::desk();
    cfg.n_days = n_days;
    cfg.session_length = 9000.0;
    cfg
}
