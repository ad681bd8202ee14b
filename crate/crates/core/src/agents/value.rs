use serde::{Deserialize, Serialize};

use super::{AgentError, LimitOrderIntent, MarketView};
use crate::fundamental::{ObservationParams, OuParams};
use crate::kernel::SimTime;
use crate::lob::{Qty, Side};

/// Gaussian belief over the latent fundamental, in cents and cents².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    pub mean: f64,
    pub var: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueAgentCfg {
    /// Mean arrivals per second per agent before any shock.
    pub lambda_bar: f64,
    /// Observation noise variance, cents².
    pub sigma_y2: f64,
    pub order_size: Qty,
    /// Prior variance at market open; the prior mean is the fundamental's
    /// long-run mean.
    pub prior_var: f64,
    /// Minimum gap between estimate and mid before trading, cents.
    #[serde(default)]
    pub deadband: f64,
}

impl Default for ValueAgentCfg {
    fn default() -> Self {
        Self {
            lambda_bar: 0.005,
            sigma_y2: 1.0,
            order_size: 400,
            prior_var: 1.0,
            deadband: 0.0,
        }
    }
}

impl ValueAgentCfg {
    pub fn obs(&self) -> ObservationParams {
        ObservationParams { sigma_y2: self.sigma_y2 }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.lambda_bar > 0.0) || self.sigma_y2 < 0.0 || self.prior_var < 0.0 || self.order_size == 0 || self.deadband < 0.0 {
            return Err(format!("invalid value agent config {self:?}"));
        }
        Ok(())
    }
}

/// One predict/correct cycle: propagate the belief through the OU transition
/// over `dt`, then condition on the observation `y` with noise `obs`.
pub fn value_belief_update(
    belief: Belief,
    dt: f64,
    ou: &OuParams,
    y: f64,
    obs: &ObservationParams,
) -> Result<Belief, AgentError> {
    if dt < 0.0 || dt.is_nan() {
        return Err(AgentError::NegativeStep(dt));
    }
    if belief.var < 0.0 {
        return Err(AgentError::NegativeVariance(belief.var));
    }
    if obs.sigma_y2 < 0.0 {
        return Err(AgentError::NegativeVariance(obs.sigma_y2));
    }
    let (mean, added) = ou.transition_moments(belief.mean, dt);
    let decay2 = if ou.theta == 0.0 { 1.0 } else { (-2.0 * ou.theta * dt).exp() };
    let prior_var = belief.var * decay2 + added;
    if obs.sigma_y2 == 0.0 {
        return Ok(Belief { mean: y, var: 0.0 });
    }
    let gain = prior_var / (prior_var + obs.sigma_y2);
    Ok(Belief {
        mean: mean + gain * (y - mean),
        var: (1.0 - gain) * prior_var,
    })
}

/// Buy at the best ask when the estimate is above the mid by more than the
/// deadband, sell at the best bid when below; nothing otherwise.
pub fn value_decide(posterior_mean: f64, view: &MarketView, cfg: &ValueAgentCfg) -> Option<LimitOrderIntent> {
    let mid = view.mid()?.as_cents();
    if posterior_mean > mid + cfg.deadband {
        let ask = view.best_ask?;
        Some(LimitOrderIntent {
            side: Side::Bid,
            price: ask.price,
            size: cfg.order_size,
        })
    } else if posterior_mean < mid - cfg.deadband {
        let bid = view.best_bid?;
        Some(LimitOrderIntent {
            side: Side::Ask,
            price: bid.price,
            size: cfg.order_size,
        })
    } else {
        None
    }
}

/// Per-agent state: the running belief and the pre-sampled arrival times.
#[derive(Debug, Clone)]
pub struct ValueAgent {
    pub belief: Belief,
    pub last_update: SimTime,
    arrivals: Vec<SimTime>,
    next: usize,
}

impl ValueAgent {
    pub fn new(prior: Belief, arrivals: Vec<SimTime>) -> Self {
        Self {
            belief: prior,
            last_update: SimTime::ZERO,
            arrivals,
            next: 0,
        }
    }

    pub fn arrivals(&self) -> &[SimTime] {
        &self.arrivals
    }

    /// Pops the next arrival time, if any remain.
    pub fn next_arrival(&mut self) -> Option<SimTime> {
        let t = self.arrivals.get(self.next).copied();
        self.next += 1;
        t
    }

    /// Folds in an observation taken at `now`.
    pub fn observe(&mut self, now: SimTime, y: f64, ou: &OuParams, obs: &ObservationParams) -> Result<Belief, AgentError> {
        let dt = (now.0 - self.last_update.0.min(now.0)) as f64;
        self.belief = value_belief_update(self.belief, dt, ou, y, obs)?;
        self.last_update = now;
        Ok(self.belief)
    }
}
