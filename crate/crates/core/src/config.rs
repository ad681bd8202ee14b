//! Run configuration.
//!
//! Loaded from TOML. Parameters keep their conventional symbols (`N_noise`,
//! `mu_s`, `sigma_s2`, `A_s`, `theta_s`, `lambda_bar`, `T_MM`, ...). Times given
//! in seconds in the file are converted to kernel nanoseconds on use; `theta`,
//! `theta_s` and `sigma2` are per-nanosecond rates.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::agents::{MarketMakerCfg, MomentumAgentCfg, NoiseAgentCfg, ValueAgentCfg};
use crate::fundamental::{OuParams, ShockSpec};
use crate::kernel::SimTime;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading config: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Ordinary,
    Small,
    Large,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Ordinary, Scenario::Small, Scenario::Large];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn is_shock(self) -> bool {
        self != Scenario::Ordinary
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Ordinary => "ordinary",
            Scenario::Small => "small",
            Scenario::Large => "large",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ordinary" => Ok(Scenario::Ordinary),
            "small" => Ok(Scenario::Small),
            "large" => Ok(Scenario::Large),
            other => Err(format!("unknown scenario {other:?}")),
        }
    }
}

/// Fractions of days per scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mix {
    pub ordinary: f64,
    pub small: f64,
    pub large: f64,
}

impl Mix {
    pub fn get(&self, s: Scenario) -> f64 {
        match s {
            Scenario::Ordinary => self.ordinary,
            Scenario::Small => self.small,
            Scenario::Large => self.large,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentCounts {
    #[serde(rename = "N_noise")]
    pub noise: usize,
    #[serde(rename = "N_value")]
    pub value: usize,
    #[serde(rename = "N_momentum")]
    pub momentum: usize,
    #[serde(rename = "N_MM")]
    pub market_makers: usize,
}

/// Parameters shared by every day's fundamental.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FundamentalCfg {
    /// Long-run mean, cents.
    pub mu: f64,
    /// Variance rate, cents² per ns.
    pub sigma2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrdinaryCfg {
    /// Mean reversion of the fundamental, per ns.
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockScenarioCfg {
    pub theta: f64,
    pub mu_s: f64,
    pub sigma_s2: f64,
    /// Earliest shock time, seconds after the open.
    #[serde(rename = "T_s_low")]
    pub t_s_low: f64,
    #[serde(rename = "T_s_high")]
    pub t_s_high: f64,
    #[serde(rename = "A_s")]
    pub a_s: f64,
    /// Arrival-rate reversion, per ns.
    pub theta_s: f64,
}

impl ShockScenarioCfg {
    pub fn spec(&self) -> ShockSpec {
        ShockSpec {
            mu_s: self.mu_s,
            sigma_s2: self.sigma_s2,
            t_s_low: SimTime::from_secs_f64(self.t_s_low),
            t_s_high: SimTime::from_secs_f64(self.t_s_high),
            a_s: self.a_s,
            theta_s: self.theta_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(rename = "N_days")]
    pub n_days: usize,
    pub root_seed: u64,
    /// Trading session length, seconds.
    pub session_length: f64,
    /// Book sampling period, seconds.
    pub snapshot_period: f64,
    /// Simulated but unrecorded time at the open, seconds.
    pub warmup: f64,
    pub mix: Mix,
    pub agents: AgentCounts,
    pub fundamental: FundamentalCfg,
    pub ordinary: OrdinaryCfg,
    pub small: ShockScenarioCfg,
    pub large: ShockScenarioCfg,
    pub noise: NoiseAgentCfg,
    pub value: ValueAgentCfg,
    pub momentum: MomentumAgentCfg,
    pub market_maker: MarketMakerCfg,
}

impl Default for ScenarioConfig {
    /// The full-size run: 365 days over 6.5 hour sessions.
    fn default() -> Self {
        Self {
            n_days: 365,
            root_seed: 20_221_104,
            session_length: 23_400.0,
            snapshot_period: 1.0,
            warmup: 300.0,
            mix: Mix {
                ordinary: 0.5,
                small: 0.25,
                large: 0.25,
            },
            agents: AgentCounts {
                noise: 50,
                value: 100,
                momentum: 10,
                market_makers: 1,
            },
            fundamental: FundamentalCfg {
                mu: 100_000.0,
                sigma2: 1e-12,
            },
            ordinary: OrdinaryCfg { theta: 1e-12 },
            small: ShockScenarioCfg {
                theta: 1e-12,
                mu_s: 200.0,
                sigma_s2: 400.0,
                t_s_low: 3600.0,
                t_s_high: 7200.0,
                a_s: 2.0,
                theta_s: 1e-12,
            },
            large: ShockScenarioCfg {
                theta: 5e-13,
                mu_s: 400.0,
                sigma_s2: 1600.0,
                t_s_low: 3600.0,
                t_s_high: 7200.0,
                a_s: 3.0,
                theta_s: 5e-13,
            },
            noise: NoiseAgentCfg::default(),
            value: ValueAgentCfg::default(),
            momentum: MomentumAgentCfg::default(),
            market_maker: MarketMakerCfg::default(),
        }
    }
}

impl ScenarioConfig {
    /// A 20-day run sized for a single workstation core. Only the day count
    /// and the noise-agent interarrival unit differ from the default.
    pub fn desk() -> Self {
        let mut cfg = Self {
            n_days: 20,
            ..Self::default()
        };
        cfg.noise.tick_ns = 100_000_000;
        cfg
    }

    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let mix = [self.mix.ordinary, self.mix.small, self.mix.large];
        if mix.iter().any(|f| !(*f >= 0.0)) || (mix.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad(format!("mix must be non-negative and sum to 1, got {mix:?}"));
        }
        if !(self.session_length > 0.0) || !(self.snapshot_period > 0.0) || !(self.warmup >= 0.0) {
            return bad("session_length and snapshot_period must be positive, warmup non-negative".into());
        }
        if self.warmup >= self.session_length {
            return bad("warmup must end before the session does".into());
        }
        if self.fundamental.sigma2 < 0.0 || self.ordinary.theta < 0.0 {
            return bad("sigma2 and theta must be non-negative".into());
        }
        for (name, s) in [("small", &self.small), ("large", &self.large)] {
            if s.theta < 0.0 {
                return bad(format!("{name}.theta must be non-negative"));
            }
            s.spec().validate().map_err(ConfigError::Invalid)?;
            if s.t_s_high > self.session_length {
                return bad(format!("{name}.T_s_high is after the close"));
            }
        }
        self.noise.validate().map_err(ConfigError::Invalid)?;
        self.value.validate().map_err(ConfigError::Invalid)?;
        self.momentum.validate().map_err(ConfigError::Invalid)?;
        self.market_maker.validate().map_err(ConfigError::Invalid)?;
        Ok(())
    }

    pub fn session_end(&self) -> SimTime {
        SimTime::from_secs_f64(self.session_length)
    }

    pub fn ou_params(&self, scenario: Scenario) -> OuParams {
        let theta = match scenario {
            Scenario::Ordinary => self.ordinary.theta,
            Scenario::Small => self.small.theta,
            Scenario::Large => self.large.theta,
        };
        OuParams {
            mu: self.fundamental.mu,
            sigma_x2: self.fundamental.sigma2,
            theta,
        }
    }

    pub fn shock_spec(&self, scenario: Scenario) -> Option<ShockSpec> {
        match scenario {
            Scenario::Ordinary => None,
            Scenario::Small => Some(self.small.spec()),
            Scenario::Large => Some(self.large.spec()),
        }
    }
}
