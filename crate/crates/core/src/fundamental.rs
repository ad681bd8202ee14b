//! The latent fundamental value and the shock machinery around it.
//!
//! The fundamental follows an Ornstein-Uhlenbeck process sampled exactly from
//! its Gaussian transition density, so stepping by `a` then `b` is
//! distributed identically to stepping by `a + b`. Times and rates are in the
//! kernel unit (nanoseconds) unless a caller works in abstract units.
//!
//! A shock day draws a jump time, sign and size once, adds the jump to the
//! latent value at that instant, and switches value-agent arrivals to a
//! decaying, amplified intensity.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::SimTime;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FundamentalError {
    #[error("negative time step {0}")]
    NegativeStep(f64),
    #[error("interval end {t1} precedes start {t0}")]
    BadInterval { t0: f64, t1: f64 },
    #[error("fundamental asked to move backwards from {from} to {to}")]
    Backwards { from: SimTime, to: SimTime },
    #[error("shock applied at {now} but drawn for {t_s}")]
    ShockTimeMismatch { now: SimTime, t_s: SimTime },
    #[error("shock already applied today")]
    ShockAlreadyApplied,
}

/// Mean-reversion parameters: long-run mean `mu` (cents), variance rate
/// `sigma_x2` (cents² per time unit) and reversion rate `theta` (per unit).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuParams {
    pub mu: f64,
    pub sigma_x2: f64,
    pub theta: f64,
}

impl OuParams {
    /// Mean and variance of `x_{t+dt}` given `x_t = x`.
    pub fn transition_moments(&self, x: f64, dt: f64) -> (f64, f64) {
        if self.theta == 0.0 {
            return (x, self.sigma_x2 * dt);
        }
        let decay = (-self.theta * dt).exp();
        // -expm1 keeps the variance accurate when theta*dt is tiny.
        let var = self.sigma_x2 * -(-2.0 * self.theta * dt).exp_m1() / (2.0 * self.theta);
        (self.mu + (x - self.mu) * decay, var)
    }

    /// Stationary variance; infinite for a pure random walk.
    pub fn stationary_variance(&self) -> f64 {
        if self.theta == 0.0 {
            f64::INFINITY
        } else {
            self.sigma_x2 / (2.0 * self.theta)
        }
    }
}

/// Draws `x_{t+dt}` from the exact transition density.
pub fn ou_step<R: RngCore + ?Sized>(x: f64, dt: f64, params: &OuParams, rng: &mut R) -> Result<f64, FundamentalError> {
    if dt < 0.0 || dt.is_nan() {
        return Err(FundamentalError::NegativeStep(dt));
    }
    if dt == 0.0 {
        return Ok(x);
    }
    let (mean, var) = params.transition_moments(x, dt);
    let z: f64 = StandardNormal.sample(rng);
    Ok(mean + var.sqrt() * z)
}

/// Observation noise variance σ_y² (cents²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationParams {
    pub sigma_y2: f64,
}

/// A noisy reading `y ~ N(x, σ_y²)`.
pub fn observe<R: RngCore + ?Sized>(x: f64, obs: &ObservationParams, rng: &mut R) -> f64 {
    if obs.sigma_y2 == 0.0 {
        return x;
    }
    let z: f64 = StandardNormal.sample(rng);
    x + obs.sigma_y2.sqrt() * z
}

/// Shock distribution and arrival-rate response for one shock scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockSpec {
    pub mu_s: f64,
    pub sigma_s2: f64,
    pub t_s_low: SimTime,
    pub t_s_high: SimTime,
    /// Arrival-rate amplification at the shock instant.
    pub a_s: f64,
    /// Decay rate of the amplification, per nanosecond.
    pub theta_s: f64,
}

impl ShockSpec {
    pub fn validate(&self) -> Result<(), String> {
        let ok = self.mu_s >= 0.0
            && self.sigma_s2 >= 0.0
            && self.t_s_low <= self.t_s_high
            && self.a_s >= 0.0
            && self.theta_s >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(format!("invalid shock spec {self:?}"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockDraw {
    pub t_s: SimTime,
    /// +1 or -1.
    pub direction: i8,
    /// Signed jump size S in cents.
    pub magnitude: f64,
}

/// Draws a shock: uniform time, fair sign, Gaussian size around `d·mu_s`.
pub fn draw_shock<R: RngCore + ?Sized>(spec: &ShockSpec, rng: &mut R) -> ShockDraw {
    let t_s = SimTime(rng.random_range(spec.t_s_low.0..=spec.t_s_high.0));
    let direction = if rng.random::<bool>() { 1 } else { -1 };
    draw_shock_size(spec, t_s, direction, rng)
}

/// The size part of [`draw_shock`] for a given time and direction.
pub fn draw_shock_size<R: RngCore + ?Sized>(spec: &ShockSpec, t_s: SimTime, direction: i8, rng: &mut R) -> ShockDraw {
    let z: f64 = StandardNormal.sample(rng);
    let magnitude = direction as f64 * spec.mu_s + spec.sigma_s2.sqrt() * z;
    ShockDraw {
        t_s,
        direction,
        magnitude,
    }
}

/// Latent fundamental for one day, advanced lazily to query times.
#[derive(Debug, Clone)]
pub struct FundamentalState {
    pub params: OuParams,
    x: f64,
    time: SimTime,
    shock: Option<ShockDraw>,
}

impl FundamentalState {
    /// Starts at the long-run mean at market open.
    pub fn new(params: OuParams) -> Self {
        Self::starting_at(params, params.mu, SimTime::ZERO)
    }

    pub fn starting_at(params: OuParams, x: f64, time: SimTime) -> Self {
        Self {
            params,
            x,
            time,
            shock: None,
        }
    }

    pub fn value(&self) -> f64 {
        self.x
    }

    pub fn time(&self) -> SimTime {
        self.time
    }

    pub fn applied_shock(&self) -> Option<&ShockDraw> {
        self.shock.as_ref()
    }

    /// Samples the latent value at `t`, which may not precede the last query.
    pub fn advance_to<R: RngCore + ?Sized>(&mut self, t: SimTime, rng: &mut R) -> Result<f64, FundamentalError> {
        if t < self.time {
            return Err(FundamentalError::Backwards { from: self.time, to: t });
        }
        self.x = ou_step(self.x, (t.0 - self.time.0) as f64, &self.params, rng)?;
        self.time = t;
        Ok(self.x)
    }

    /// Adds the jump to the latent value. The long-run mean is untouched, so
    /// the displacement decays at the reversion rate afterwards.
    pub fn apply_shock(&mut self, draw: &ShockDraw) -> Result<(), FundamentalError> {
        if self.shock.is_some() {
            return Err(FundamentalError::ShockAlreadyApplied);
        }
        if self.time != draw.t_s {
            return Err(FundamentalError::ShockTimeMismatch {
                now: self.time,
                t_s: draw.t_s,
            });
        }
        self.x += draw.magnitude;
        self.shock = Some(*draw);
        Ok(())
    }
}

/// An intensity function with a known upper bound, for thinning.
pub trait Intensity {
    fn rate(&self, t: f64) -> f64;
    /// Upper bound of `rate` on `[t0, t1]`.
    fn bound(&self, t0: f64, t1: f64) -> f64;
}

/// Value-agent arrival intensity: `lambda_bar` before the shock and
/// `lambda_bar (1 + A_s e^{-theta_s (t - t_s)})` from the shock on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockedArrivals {
    pub lambda_bar: f64,
    pub a_s: f64,
    pub theta_s: f64,
    pub t_s: Option<f64>,
}

impl ShockedArrivals {
    pub fn homogeneous(lambda_bar: f64) -> Self {
        Self {
            lambda_bar,
            a_s: 0.0,
            theta_s: 0.0,
            t_s: None,
        }
    }
}

impl Intensity for ShockedArrivals {
    fn rate(&self, t: f64) -> f64 {
        arrival_rate(t, self.a_s, self.theta_s, self.t_s, self.lambda_bar)
    }

    fn bound(&self, t0: f64, t1: f64) -> f64 {
        match self.t_s {
            Some(ts) if t1 >= ts => self.rate(t0.max(ts)),
            _ => self.lambda_bar,
        }
    }
}

/// Piecewise arrival rate around a shock at `t_s` (if any).
pub fn arrival_rate(t: f64, a_s: f64, theta_s: f64, t_s: Option<f64>, lambda_bar: f64) -> f64 {
    match t_s {
        Some(ts) if t >= ts => lambda_bar * (1.0 + a_s * (-theta_s * (t - ts)).exp()),
        _ => lambda_bar,
    }
}

/// Wraps an arbitrary rate function with a caller-supplied bound.
pub struct BoundedFn<F> {
    pub f: F,
    pub max: f64,
}

impl<F: Fn(f64) -> f64> Intensity for BoundedFn<F> {
    fn rate(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    fn bound(&self, _t0: f64, _t1: f64) -> f64 {
        self.max
    }
}

/// Arrival times on `[t0, t1)` by thinning: candidates come from a
/// homogeneous process at the bound and are kept with probability
/// `rate(t) / bound`. The output is sorted.
pub fn sample_arrivals<I: Intensity + ?Sized, R: RngCore + ?Sized>(
    t0: f64,
    t1: f64,
    intensity: &I,
    rng: &mut R,
) -> Result<Vec<f64>, FundamentalError> {
    if t1 < t0 || t0.is_nan() || t1.is_nan() {
        return Err(FundamentalError::BadInterval { t0, t1 });
    }
    let bound = intensity.bound(t0, t1);
    let mut out = Vec::new();
    if bound <= 0.0 || t1 == t0 {
        return Ok(out);
    }
    let gap = Exp::new(bound).expect("positive rate");
    let mut t = t0;
    loop {
        t += gap.sample(rng);
        if t >= t1 {
            break;
        }
        let accept: f64 = rng.random();
        if accept * bound < intensity.rate(t) {
            out.push(t);
        }
    }
    Ok(out)
}
