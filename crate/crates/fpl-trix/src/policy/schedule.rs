//! Parameter schedules: the learning rate `eta_t`, implicit-exploration
//! amount `gamma_t`, and truncation level `beta_t = e^{-B_t}` for each round.
//!
//! The adaptive schedule needs no horizon or loss knowledge: with
//! `D = log(d/m) + 1` and the running estimate total
//! `S_t = 1/D + sum_{k<=t} s_k`, it sets `eta_t = sqrt(D / S_{t-1})`,
//! `gamma_t = m eta_t`, `beta_t = (m/d) eta_t`. The fixed schedule tunes
//! `eta` once from an upper bound on the best action's total loss.

use crate::error::{Error, Result};
use crate::estimator::EstimatorState;
use crate::perturbation::TruncationParams;

/// Parameters in force for a single round.
#[derive(Clone, Copy, Debug)]
pub struct RoundParams {
    pub eta: f64,
    pub gamma: f64,
    pub trunc: TruncationParams,
}

impl RoundParams {
    pub fn beta(&self) -> f64 {
        self.trunc.beta()
    }

    pub fn bound(&self) -> f64 {
        self.trunc.bound()
    }
}

/// Numerator under the square root in the fixed-tuning learning rate
/// `eta = min(1, sqrt(numerator / (d L*)))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FixedTuningNumerator {
    /// `3 log(d/m) + 1`.
    #[default]
    LogBased,
    /// `3 (log(d/m) + 1)`, i.e. `3 D`.
    ThreeD,
}

#[derive(Clone, Debug)]
pub enum ParamSchedule {
    /// Constant parameters for every round.
    Fixed {
        d: usize,
        m: usize,
        eta: f64,
        gamma: f64,
        trunc: TruncationParams,
    },
    /// Loss-adaptive parameters driven by the estimator state.
    Adaptive { d: usize, m: usize },
}

impl ParamSchedule {
    /// Fixed schedule from explicit parameters. Requires `eta, gamma > 0`,
    /// `0 < beta < 1`, and `beta d <= gamma` (within float noise), the
    /// regime where the truncation analysis applies.
    pub fn fixed(d: usize, m: usize, eta: f64, gamma: f64, beta: f64) -> Result<Self> {
        check_dims(d, m)?;
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be positive, got {eta}"
            )));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "exploration parameter must be positive, got {gamma}"
            )));
        }
        let trunc = TruncationParams::from_beta(beta)?;
        if beta == 0.0 {
            return Err(Error::InvalidParameter(
                "fixed schedule requires a finite truncation (beta > 0)".into(),
            ));
        }
        if trunc.beta() * d as f64 > gamma * (1.0 + 1e-9) {
            return Err(Error::InvalidParameter(format!(
                "truncated mass beta d = {} exceeds gamma = {gamma}",
                trunc.beta() * d as f64
            )));
        }
        Ok(ParamSchedule::Fixed {
            d,
            m,
            eta,
            gamma,
            trunc,
        })
    }

    /// Fixed schedule tuned from an upper bound `lstar` on the best action's
    /// total loss: `eta = min(1, sqrt(numerator / (d lstar)))`, then
    /// `gamma = eta m`, `beta = eta m / d`.
    pub fn fixed_from_lstar(
        d: usize,
        m: usize,
        lstar: f64,
        numerator: FixedTuningNumerator,
    ) -> Result<Self> {
        check_dims(d, m)?;
        if !(lstar.is_finite() && lstar >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "loss bound must be finite and nonnegative, got {lstar}"
            )));
        }
        let ratio = (d as f64 / m as f64).ln();
        let num = match numerator {
            FixedTuningNumerator::LogBased => 3.0 * ratio + 1.0,
            FixedTuningNumerator::ThreeD => 3.0 * (ratio + 1.0),
        };
        let eta = if lstar == 0.0 {
            1.0
        } else {
            (num / (d as f64 * lstar)).sqrt().min(1.0)
        };
        let gamma = eta * m as f64;
        let beta = eta * m as f64 / d as f64;
        if beta >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "tuning yields truncated mass beta = {beta} >= 1 \
                 (d = {d}, m = {m} leaves no room to truncate)"
            )));
        }
        Self::fixed(d, m, eta, gamma, beta)
    }

    /// Loss-adaptive schedule. Rejects geometries where the first-round
    /// truncated mass `beta_1 = (m/d) D` would reach 1.
    pub fn adaptive(d: usize, m: usize) -> Result<Self> {
        check_dims(d, m)?;
        let beta_1 = (m as f64 / d as f64) * d_const(d, m);
        if beta_1 >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "adaptive schedule needs (m/d)(log(d/m) + 1) < 1, got {beta_1} \
                 (d = {d}, m = {m})"
            )));
        }
        Ok(ParamSchedule::Adaptive { d, m })
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, ParamSchedule::Adaptive { .. })
    }

    /// The normalizing constant `D = log(d/m) + 1`.
    pub fn d_const(&self) -> f64 {
        match *self {
            ParamSchedule::Fixed { d, m, .. } | ParamSchedule::Adaptive { d, m } => d_const(d, m),
        }
    }

    /// Parameters for the round about to be played, given the estimator state
    /// after the previous round.
    pub fn params_for_round(&self, est: &EstimatorState) -> Result<RoundParams> {
        match *self {
            ParamSchedule::Fixed {
                eta, gamma, trunc, ..
            } => Ok(RoundParams { eta, gamma, trunc }),
            ParamSchedule::Adaptive { d, m } => {
                let eta = adaptive_eta(est, d_const(d, m));
                let gamma = m as f64 * eta;
                let beta = (m as f64 / d as f64) * eta;
                let trunc = TruncationParams::from_beta(beta).map_err(|_| {
                    Error::EstimatorState(format!(
                        "adaptive truncated mass {beta} left [0, 1); \
                         estimate totals may have shrunk"
                    ))
                })?;
                Ok(RoundParams { eta, gamma, trunc })
            }
        }
    }
}

/// The normalizing constant `D = log(d/m) + 1`.
pub fn d_const(d: usize, m: usize) -> f64 {
    (d as f64 / m as f64).ln() + 1.0
}

/// Adaptive learning rate `eta_{t+1} = sqrt(D / S_t)` from the current
/// estimator state.
pub fn adaptive_eta(est: &EstimatorState, d_const: f64) -> f64 {
    (d_const / est.cumulative_total()).sqrt()
}

fn check_dims(d: usize, m: usize) -> Result<()> {
    if d == 0 || m == 0 || m > d {
        return Err(Error::InvalidParameter(format!(
            "schedule requires 1 <= m <= d, got d={d}, m={m}"
        )));
    }
    Ok(())
}
