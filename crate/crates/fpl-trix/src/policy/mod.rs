//! Learning policies: the perturbed-leader algorithm (truncated or not) and
//! a uniform-play baseline.
//!
//! Each round the perturbed-leader policy draws i.i.d. perturbations `Z` and
//! plays `argmin_v v . (eta_t hat_L_{t-1} - Z)`. After receiving semi-bandit
//! feedback it estimates the inclusion probabilities `q_t` of its own draw,
//! forms implicit-exploration loss estimates, and folds them into the
//! cumulative state that drives the parameter schedule.

mod bounds;
mod schedule;

pub use bounds::{
    adaptive_regret_bound, first_order_bound, horizon_bound, DEFAULT_ADDITIVE_CONST,
};
pub use schedule::{adaptive_eta, d_const, FixedTuningNumerator, ParamSchedule, RoundParams};

use rand::Rng;

use crate::action::Action;
use crate::decision_sets::DecisionSet;
use crate::error::{Error, Result};
use crate::estimator::{
    estimate_q_monte_carlo, geometric_resampling_estimate, ix_loss_estimate,
    q_exact_mab_quadrature, q_exact_mab_quadrature_untruncated, EstimatorState, ObservedLosses,
    QEstimate,
};
use crate::perturbation::{fill_perturbations, TruncationParams};

/// How the per-round inclusion probabilities `q_t` are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QMethodChoice {
    /// Monte Carlo redraws; `samples = None` picks
    /// `max(1000, ceil(10 / gamma_t))` capped at 100000.
    MonteCarlo { samples: Option<usize> },
    /// Exact quadrature; only available on single-arm decision sets.
    Quadrature,
}

impl Default for QMethodChoice {
    fn default() -> Self {
        QMethodChoice::MonteCarlo { samples: None }
    }
}

/// Which loss estimator converts feedback into estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LossEstimatorKind {
    /// Implicit exploration: `ell_i / (q_i + gamma)`.
    #[default]
    ImplicitExploration,
    /// Geometric resampling with waiting-time cap `ceil(1/gamma)`.
    GeometricResampling,
}

const MC_SAMPLES_FLOOR: usize = 1_000;
const MC_SAMPLES_CAP: usize = 100_000;

/// Monte Carlo sample count for one round at exploration level `gamma`.
pub fn default_mc_samples(gamma: f64) -> usize {
    let wanted = (10.0 / gamma).ceil();
    let wanted = if wanted.is_finite() && wanted >= 0.0 {
        wanted as usize
    } else {
        MC_SAMPLES_CAP
    };
    wanted.clamp(MC_SAMPLES_FLOOR, MC_SAMPLES_CAP)
}

/// Follow-the-perturbed-leader with implicit exploration.
#[derive(Clone, Debug)]
pub struct FplPolicy {
    set: DecisionSet,
    schedule: ParamSchedule,
    est: EstimatorState,
    q_method: QMethodChoice,
    estimator_kind: LossEstimatorKind,
    truncated: bool,
    pending: Option<RoundParams>,
}

impl FplPolicy {
    /// The truncated algorithm: perturbations follow the schedule's
    /// truncation level each round.
    pub fn truncated(set: DecisionSet, schedule: ParamSchedule) -> Result<Self> {
        Self::build(set, schedule, true)
    }

    /// The untruncated baseline: same schedule for `eta` and `gamma`, but
    /// perturbations stay plain exponentials.
    pub fn untruncated(set: DecisionSet, schedule: ParamSchedule) -> Result<Self> {
        Self::build(set, schedule, false)
    }

    fn build(set: DecisionSet, schedule: ParamSchedule, truncated: bool) -> Result<Self> {
        let est = EstimatorState::new(set.dim(), schedule.d_const())?;
        Ok(FplPolicy {
            set,
            schedule,
            est,
            q_method: QMethodChoice::default(),
            estimator_kind: LossEstimatorKind::default(),
            truncated,
            pending: None,
        })
    }

    pub fn with_q_method(mut self, q_method: QMethodChoice) -> Result<Self> {
        if q_method == QMethodChoice::Quadrature
            && !matches!(self.set, DecisionSet::Mab { .. })
        {
            return Err(Error::InvalidParameter(
                "quadrature q is only available on single-arm decision sets".into(),
            ));
        }
        self.q_method = q_method;
        Ok(self)
    }

    pub fn with_loss_estimator(mut self, kind: LossEstimatorKind) -> Self {
        self.estimator_kind = kind;
        self
    }

    pub fn set(&self) -> &DecisionSet {
        &self.set
    }

    pub fn schedule(&self) -> &ParamSchedule {
        &self.schedule
    }

    pub fn estimator_state(&self) -> &EstimatorState {
        &self.est
    }

    pub fn q_method(&self) -> QMethodChoice {
        self.q_method
    }

    pub fn estimator_kind(&self) -> LossEstimatorKind {
        self.estimator_kind
    }

    pub fn name(&self) -> &'static str {
        if self.truncated {
            "fpl-trix"
        } else {
            "fpl-ix"
        }
    }

    /// Parameters the next draw will use. For the untruncated baseline the
    /// truncation is the identity (`B = inf`, `beta = 0`); `eta` and `gamma`
    /// still follow the schedule.
    pub fn current_params(&self) -> Result<RoundParams> {
        let mut params = self.schedule.params_for_round(&self.est)?;
        if !self.truncated {
            params.trunc = TruncationParams::untruncated();
        }
        Ok(params)
    }

    /// Draws this round's action. Must be followed by [`FplPolicy::step`]
    /// before the next draw.
    pub fn draw_action(&mut self, rng: &mut impl Rng) -> Result<Action> {
        if self.pending.is_some() {
            return Err(Error::Protocol(
                "draw_action called twice without intervening feedback".into(),
            ));
        }
        let params = self.current_params()?;
        let d = self.set.dim();
        let mut costs = vec![0.0; d];
        fill_perturbations(&mut costs, params.trunc, rng);
        for (slot, &l) in costs.iter_mut().zip(self.est.hat_l()) {
            *slot = params.eta * l - *slot;
        }
        let mut support = Vec::with_capacity(self.set.max_weight());
        self.set.minimizer_support(&costs, &mut support);
        let action = Action::from_support(d, &support)?;
        self.pending = Some(params);
        Ok(action)
    }

    /// Incorporates one round of semi-bandit feedback for the action just
    /// drawn, updating estimates and the schedule state.
    pub fn step(
        &mut self,
        action: &Action,
        feedback: &ObservedLosses,
        rng: &mut impl Rng,
    ) -> Result<()> {
        let params = self.pending.take().ok_or_else(|| {
            Error::Protocol("step called without a preceding draw_action".into())
        })?;
        if !self.set.contains(action) {
            self.pending = Some(params);
            return Err(Error::Protocol(format!(
                "action {action} is not a member of {}",
                self.set.descriptor()
            )));
        }
        let hat_ell = match self.estimator_kind {
            LossEstimatorKind::ImplicitExploration => {
                let q = self.refreshed_q(params, rng)?;
                ix_loss_estimate(feedback, action, &q, params.gamma)?
            }
            LossEstimatorKind::GeometricResampling => geometric_resampling_estimate(
                &self.set,
                self.est.hat_l(),
                params.eta,
                params.trunc,
                action,
                feedback,
                params.gamma,
                rng,
            )?,
        };
        self.est.accumulate(&hat_ell)
    }

    /// Inclusion probabilities of the draw that just happened, under the same
    /// `eta_t`, `hat_L_{t-1}`, and truncation.
    fn refreshed_q(&self, params: RoundParams, rng: &mut impl Rng) -> Result<QEstimate> {
        match self.q_method {
            QMethodChoice::MonteCarlo { samples } => {
                let k = samples.unwrap_or_else(|| default_mc_samples(params.gamma));
                estimate_q_monte_carlo(
                    &self.set,
                    self.est.hat_l(),
                    params.eta,
                    params.trunc,
                    k,
                    rng,
                )
            }
            QMethodChoice::Quadrature => {
                if params.trunc.is_truncated() {
                    q_exact_mab_quadrature(self.est.hat_l(), params.eta, params.trunc.bound())
                } else {
                    q_exact_mab_quadrature_untruncated(self.est.hat_l(), params.eta)
                }
            }
        }
    }
}

/// Plays uniformly at random and ignores feedback.
#[derive(Clone, Debug)]
pub struct UniformPolicy {
    set: DecisionSet,
}

impl UniformPolicy {
    pub fn new(set: DecisionSet) -> Self {
        UniformPolicy { set }
    }

    pub fn set(&self) -> &DecisionSet {
        &self.set
    }

    pub fn name(&self) -> &'static str {
        "uniform"
    }

    pub fn draw_action(&mut self, rng: &mut impl Rng) -> Result<Action> {
        self.set.sample_uniform(rng)
    }

    pub fn step(&mut self, action: &Action, _feedback: &ObservedLosses) -> Result<()> {
        if !self.set.contains(action) {
            return Err(Error::Protocol(format!(
                "action {action} is not a member of {}",
                self.set.descriptor()
            )));
        }
        Ok(())
    }
}

/// A policy selected by experiment configuration.
#[derive(Clone, Debug)]
pub enum ExperimentPolicy {
    Fpl(Box<FplPolicy>),
    Uniform(UniformPolicy),
}

impl ExperimentPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentPolicy::Fpl(p) => p.name(),
            ExperimentPolicy::Uniform(p) => p.name(),
        }
    }

    pub fn set(&self) -> &DecisionSet {
        match self {
            ExperimentPolicy::Fpl(p) => p.set(),
            ExperimentPolicy::Uniform(p) => p.set(),
        }
    }

    /// Parameters for the upcoming round; `None` for the uniform baseline.
    pub fn current_params(&self) -> Result<Option<RoundParams>> {
        match self {
            ExperimentPolicy::Fpl(p) => p.current_params().map(Some),
            ExperimentPolicy::Uniform(_) => Ok(None),
        }
    }

    /// Estimator state, when the policy keeps one.
    pub fn estimator_state(&self) -> Option<&EstimatorState> {
        match self {
            ExperimentPolicy::Fpl(p) => Some(p.estimator_state()),
            ExperimentPolicy::Uniform(_) => None,
        }
    }

    pub fn draw_action(&mut self, rng: &mut impl Rng) -> Result<Action> {
        match self {
            ExperimentPolicy::Fpl(p) => p.draw_action(rng),
            ExperimentPolicy::Uniform(p) => p.draw_action(rng),
        }
    }

    pub fn step(
        &mut self,
        action: &Action,
        feedback: &ObservedLosses,
        rng: &mut impl Rng,
    ) -> Result<()> {
        match self {
            ExperimentPolicy::Fpl(p) => p.step(action, feedback, rng),
            ExperimentPolicy::Uniform(p) => p.step(action, feedback),
        }
    }
}
