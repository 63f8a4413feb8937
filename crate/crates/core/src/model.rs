//! Election model, information-flow schedules and the posterior filter.
//!
//! The information reaching voters is `dξ_t = σ_t X dt + dB_t`, where `X` is
//! the latent label of the "right" candidate. Every quantity downstream is
//! expressed through the accumulated signal `Y_t = ∫ σ_s dξ_s` and the
//! accumulated variance `V(0, t) = ∫ σ_s² ds`; the posterior support for
//! candidate `i` is
//!
//! ```text
//! π_i ∝ p_i · exp(x_i · Y − ½ x_i² · V)
//! ```
//!
//! For a constant rate `σ` this is the familiar `Y = σ ξ_t`, `V = σ² t`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Input priors may be off from one by this much; they are renormalized.
pub const PRIOR_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("at least two candidates are required, got {0}")]
    TooFewCandidates(usize),

    #[error("{positions} positions but {priors} priors")]
    LengthMismatch { positions: usize, priors: usize },

    #[error("positions must be finite and strictly increasing (index {index})")]
    NonIncreasingPositions { index: usize },

    #[error("priors must be non-negative and sum to 1 (sum = {sum})")]
    PriorsNotNormalized { sum: f64 },

    #[error("horizon must be positive and finite, got {0}")]
    NonPositiveHorizon(f64),

    #[error("information flow rates must be positive and finite, got {0}")]
    NonPositiveRate(f64),

    #[error("schedule breakpoints must be strictly increasing inside (0, horizon)")]
    InvalidBreakpoints,

    #[error("schedule has {rates} rates for {breakpoints} breakpoints (need breakpoints + 1)")]
    ScheduleShape { breakpoints: usize, rates: usize },

    #[error("time {t} outside [0, {horizon}]")]
    OutOfRangeTime { t: f64, horizon: f64 },

    #[error("interval [{t0}, {t1}] is not an ordered sub-interval of the schedule")]
    OutOfRangeInterval { t0: f64, t1: f64 },

    #[error("signal value must be finite, got {0}")]
    NonFiniteSignal(f64),
}

/// Deterministic information-flow-rate schedule `σ_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoSchedule {
    Constant(f64),
    /// `rates[i]` applies on `[breakpoints[i-1], breakpoints[i])`, with the
    /// first segment starting at 0 and the last running to the horizon.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        rates: Vec<f64>,
    },
}

impl InfoSchedule {
    pub fn constant(sigma: f64) -> Result<Self, ModelError> {
        check_rate(sigma)?;
        Ok(InfoSchedule::Constant(sigma))
    }

    pub fn piecewise(breakpoints: Vec<f64>, rates: Vec<f64>) -> Result<Self, ModelError> {
        let schedule = InfoSchedule::PiecewiseConstant { breakpoints, rates };
        schedule.validate(f64::INFINITY)?;
        Ok(schedule)
    }

    /// Checks rates and breakpoints against a horizon.
    pub fn validate(&self, horizon: f64) -> Result<(), ModelError> {
        match self {
            InfoSchedule::Constant(sigma) => check_rate(*sigma),
            InfoSchedule::PiecewiseConstant { breakpoints, rates } => {
                if rates.len() != breakpoints.len() + 1 {
                    return Err(ModelError::ScheduleShape {
                        breakpoints: breakpoints.len(),
                        rates: rates.len(),
                    });
                }
                for &r in rates {
                    check_rate(r)?;
                }
                let mut prev = 0.0;
                for &b in breakpoints {
                    if !(b.is_finite() && b > prev && b < horizon) {
                        return Err(ModelError::InvalidBreakpoints);
                    }
                    prev = b;
                }
                Ok(())
            }
        }
    }

    /// The rate, if it does not vary in time.
    pub fn constant_rate(&self) -> Option<f64> {
        match self {
            InfoSchedule::Constant(sigma) => Some(*sigma),
            InfoSchedule::PiecewiseConstant { rates, .. } => {
                let first = rates[0];
                rates.iter().all(|&r| r == first).then_some(first)
            }
        }
    }

    /// `σ_t`, right-continuous at breakpoints.
    pub fn rate_at(&self, t: f64) -> f64 {
        match self {
            InfoSchedule::Constant(sigma) => *sigma,
            InfoSchedule::PiecewiseConstant { breakpoints, rates } => {
                let seg = breakpoints.partition_point(|&b| b <= t);
                rates[seg]
            }
        }
    }

    /// `∫_{t0}^{t1} σ_s² ds` for `0 <= t0 <= t1`. No range checks.
    pub fn integrated_variance(&self, t0: f64, t1: f64) -> f64 {
        match self {
            InfoSchedule::Constant(sigma) => sigma * sigma * (t1 - t0),
            InfoSchedule::PiecewiseConstant { breakpoints, rates } => {
                let mut total = 0.0;
                let mut start = 0.0_f64;
                for (i, &rate) in rates.iter().enumerate() {
                    let end = breakpoints.get(i).copied().unwrap_or(f64::INFINITY);
                    let lo = start.max(t0);
                    let hi = end.min(t1);
                    if hi > lo {
                        total += rate * rate * (hi - lo);
                    }
                    start = end;
                    if start >= t1 {
                        break;
                    }
                }
                total
            }
        }
    }

    /// The schedule seen from time `t` onward, re-based so that `t` becomes 0.
    pub fn restricted_from(&self, t: f64) -> InfoSchedule {
        match self {
            InfoSchedule::Constant(sigma) => InfoSchedule::Constant(*sigma),
            InfoSchedule::PiecewiseConstant { breakpoints, rates } => {
                let seg = breakpoints.partition_point(|&b| b <= t);
                let breakpoints: Vec<f64> = breakpoints[seg..].iter().map(|b| b - t).collect();
                let rates = rates[seg..].to_vec();
                if breakpoints.is_empty() {
                    InfoSchedule::Constant(rates[0])
                } else {
                    InfoSchedule::PiecewiseConstant { breakpoints, rates }
                }
            }
        }
    }

    /// Multiplies every rate by `factor`.
    pub fn scaled(&self, factor: f64) -> InfoSchedule {
        match self {
            InfoSchedule::Constant(sigma) => InfoSchedule::Constant(sigma * factor),
            InfoSchedule::PiecewiseConstant { breakpoints, rates } => {
                InfoSchedule::PiecewiseConstant {
                    breakpoints: breakpoints.clone(),
                    rates: rates.iter().map(|r| r * factor).collect(),
                }
            }
        }
    }
}

fn check_rate(sigma: f64) -> Result<(), ModelError> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(ModelError::NonPositiveRate(sigma))
    }
}

/// Accumulated squared information flow `∫ σ_s² ds` over an interval.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct EffectiveVariance(pub f64);

impl EffectiveVariance {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn std_dev(self) -> f64 {
        self.0.sqrt()
    }
}

impl std::ops::Add for EffectiveVariance {
    type Output = EffectiveVariance;
    fn add(self, rhs: Self) -> Self::Output {
        EffectiveVariance(self.0 + rhs.0)
    }
}

/// `∫_{t0}^{t1} σ_s² ds`; exact for piecewise-constant schedules.
pub fn effective_variance(
    schedule: &InfoSchedule,
    t0: f64,
    t1: f64,
) -> Result<EffectiveVariance, ModelError> {
    if !(t0.is_finite() && t1.is_finite() && 0.0 <= t0 && t0 <= t1) {
        return Err(ModelError::OutOfRangeInterval { t0, t1 });
    }
    Ok(EffectiveVariance(schedule.integrated_variance(t0, t1)))
}

/// Candidate positions, current support, time to the election and the
/// information schedule between now and then.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectionModel {
    positions: Vec<f64>,
    priors: Vec<f64>,
    horizon: f64,
    schedule: InfoSchedule,
}

impl ElectionModel {
    pub fn new(
        positions: Vec<f64>,
        priors: Vec<f64>,
        horizon: f64,
        schedule: InfoSchedule,
    ) -> Result<Self, ModelError> {
        if positions.len() != priors.len() {
            return Err(ModelError::LengthMismatch {
                positions: positions.len(),
                priors: priors.len(),
            });
        }
        if positions.len() < 2 {
            return Err(ModelError::TooFewCandidates(positions.len()));
        }
        for (i, w) in positions.windows(2).enumerate() {
            if !(w[0].is_finite() && w[1].is_finite() && w[0] < w[1]) {
                return Err(ModelError::NonIncreasingPositions { index: i + 1 });
            }
        }
        let sum: f64 = priors.iter().sum();
        if priors.iter().any(|p| !(p.is_finite() && *p >= 0.0))
            || !((sum - 1.0).abs() <= PRIOR_SUM_TOLERANCE)
        {
            return Err(ModelError::PriorsNotNormalized { sum });
        }
        let priors = priors.into_iter().map(|p| p / sum).collect();
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(ModelError::NonPositiveHorizon(horizon));
        }
        schedule.validate(horizon)?;
        Ok(ElectionModel {
            positions,
            priors,
            horizon,
            schedule,
        })
    }

    /// Shorthand for a constant information flow rate.
    pub fn with_constant_rate(
        positions: Vec<f64>,
        priors: Vec<f64>,
        horizon: f64,
        sigma: f64,
    ) -> Result<Self, ModelError> {
        Self::new(positions, priors, horizon, InfoSchedule::Constant(sigma))
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn schedule(&self) -> &InfoSchedule {
        &self.schedule
    }

    pub fn num_candidates(&self) -> usize {
        self.positions.len()
    }

    /// Same model with a different schedule.
    pub fn with_schedule(&self, schedule: InfoSchedule) -> Result<Self, ModelError> {
        Self::new(
            self.positions.clone(),
            self.priors.clone(),
            self.horizon,
            schedule,
        )
    }

    pub fn with_positions(&self, positions: Vec<f64>) -> Result<Self, ModelError> {
        Self::new(
            positions,
            self.priors.clone(),
            self.horizon,
            self.schedule.clone(),
        )
    }

    pub fn with_priors(&self, priors: Vec<f64>) -> Result<Self, ModelError> {
        Self::new(
            self.positions.clone(),
            priors,
            self.horizon,
            self.schedule.clone(),
        )
    }

    /// `V(t0, t1)` with `0 <= t0 <= t1 <= horizon`.
    pub fn effective_variance(&self, t0: f64, t1: f64) -> Result<EffectiveVariance, ModelError> {
        if !(t1 <= self.horizon) {
            return Err(ModelError::OutOfRangeInterval { t0, t1 });
        }
        effective_variance(&self.schedule, t0, t1)
    }

    /// Accumulated variance up to the election, `V(0, T)`.
    pub fn terminal_variance(&self) -> f64 {
        self.schedule.integrated_variance(0.0, self.horizon)
    }

    /// Posterior support at time `t` given the accumulated signal `y = Y_t`.
    pub fn posterior(&self, y: f64, t: f64) -> Result<PosteriorDistribution, ModelError> {
        if !(t.is_finite() && (0.0..=self.horizon).contains(&t)) {
            return Err(ModelError::OutOfRangeTime {
                t,
                horizon: self.horizon,
            });
        }
        if !y.is_finite() {
            return Err(ModelError::NonFiniteSignal(y));
        }
        let variance = self.schedule.integrated_variance(0.0, t);
        Ok(PosteriorDistribution {
            time: t,
            signal: y,
            support: self.support_at(y, variance),
        })
    }

    /// Posterior weights for a signal `y` after accumulated variance `v`.
    pub fn support_at(&self, y: f64, v: f64) -> Vec<f64> {
        normalized_support(&self.positions, &self.priors, y, v)
    }

    /// Re-roots the model at time `t` after observing `Y_t = y_t`: the
    /// posterior becomes the new prior, the horizon shrinks to `T - t` and
    /// the schedule is restricted to `[t, T]`.
    pub fn condition_on_history(&self, y_t: f64, t: f64) -> Result<ElectionModel, ModelError> {
        if !(t.is_finite() && t >= 0.0 && t < self.horizon) {
            return Err(ModelError::OutOfRangeTime {
                t,
                horizon: self.horizon,
            });
        }
        let posterior = self.posterior(y_t, t)?;
        Ok(ElectionModel {
            positions: self.positions.clone(),
            priors: posterior.support,
            horizon: self.horizon - t,
            schedule: self.schedule.restricted_from(t),
        })
    }
}

/// Unnormalized log-weights `ln p_i + x_i y − ½ x_i² v`; `-inf` for `p_i = 0`.
pub fn log_weights(positions: &[f64], priors: &[f64], y: f64, v: f64) -> Vec<f64> {
    positions
        .iter()
        .zip(priors)
        .map(|(&x, &p)| {
            if p > 0.0 {
                p.ln() + x * y - 0.5 * x * x * v
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect()
}

fn normalized_support(positions: &[f64], priors: &[f64], y: f64, v: f64) -> Vec<f64> {
    let mut w = log_weights(positions, priors, y, v);
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for l in w.iter_mut() {
        *l = (*l - max).exp();
        total += *l;
    }
    for l in w.iter_mut() {
        *l /= total;
    }
    w
}

/// Support rates `π_1 … π_N` at a given time and signal value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDistribution {
    pub time: f64,
    /// Accumulated signal `Y_t`.
    pub signal: f64,
    pub support: Vec<f64>,
}

impl PosteriorDistribution {
    /// Index of the largest support; ties go to the lower index.
    pub fn leader(&self) -> usize {
        argmax_low_index(&self.support)
    }
}

pub(crate) fn argmax_low_index(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
