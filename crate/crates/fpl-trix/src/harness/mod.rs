//! Experiment harness: configured runs, per-round traces, metrics, exports,
//! and the audit suite.
//!
//! Replications are mutually independent: replication `r` derives its policy
//! randomness from the stream `(seed, [policy, r, t])` and its environment
//! from `(seed, [env-seed, r])`, so results are bit-reproducible for a given
//! config and seed no matter how or where individual replications execute,
//! and any single round can be replayed in isolation.

pub mod audits;
mod config;
mod export;

pub use config::{
    EnvConfig, EnvKind, EstimatorName, ExperimentConfig, NumeratorChoice, OutputConfig,
    OutputFormat, PolicyConfig, PolicyName, QMethodName, RunConfig, SetConfig, SetKind, Tuning,
};
pub use export::{read_trace_csv, summary_json, write_summary_json, write_trace_csv};

use serde::Serialize;

use crate::action::Action;
use crate::decision_sets::DecisionSet;
use crate::environments::LossSource;
use crate::error::Result;
use crate::estimator::ObservedLosses;
use crate::policy::{adaptive_regret_bound, first_order_bound, horizon_bound, ExperimentPolicy};
use crate::rng::{mix, stream_rng, SALT_ENV_SEED, SALT_POLICY};

/// One round of one replication, as exported to trace CSVs.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    pub t: u64,
    pub action: Action,
    /// Learner loss this round, `V_t . ell_t`.
    pub loss: f64,
    /// Cumulative learner loss minus the best fixed action's cumulative loss
    /// so far.
    pub regret_to_date: f64,
    /// Parameters in force: learning rate, exploration, truncated mass, and
    /// truncation bound (all zero for the uniform baseline except the bound,
    /// which is recorded as infinity).
    pub eta: f64,
    pub gamma: f64,
    pub beta: f64,
    pub bound: f64,
    /// This round's estimate total `s_t` and running total `S_t` (zero for
    /// policies without an estimator).
    pub s: f64,
    pub s_total: f64,
}

/// Summary statistics of one replication.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Metrics {
    pub replication: u64,
    pub horizon: u64,
    pub learner_loss: f64,
    /// Exact total loss of the best fixed action in hindsight.
    pub lstar: f64,
    pub regret: f64,
    pub bound_first_order: f64,
    pub bound_horizon: f64,
    /// The tighter of the two, evaluated at the realized `lstar`.
    pub bound_combined: f64,
    pub policy: String,
    pub q_method: String,
}

/// Full record of one replication.
#[derive(Clone, Debug)]
pub struct ReplicationOutcome {
    pub replication: u64,
    pub metrics: Metrics,
    pub trace: Vec<RoundRecord>,
    /// Final cumulative loss estimates `hat_L_T` (empty for the baseline).
    pub final_hat_l: Vec<f64>,
    /// Structure constants used by the audits.
    pub d_const: f64,
    pub max_weight: usize,
}

/// Mean and standard error of the per-replication regrets.
#[derive(Clone, Debug, Serialize)]
pub struct Aggregate {
    pub replications: u64,
    pub mean_regret: f64,
    pub stderr_regret: f64,
    pub mean_learner_loss: f64,
    pub mean_lstar: f64,
    pub mean_bound_combined: f64,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub outcomes: Vec<ReplicationOutcome>,
    pub aggregate: Aggregate,
}

/// Runs every replication of a configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let set = cfg.build_set()?;
    let mut outcomes = Vec::with_capacity(cfg.run.replications as usize);
    for replication in 0..cfg.run.replications {
        outcomes.push(run_replication(cfg, &set, replication)?);
    }
    let aggregate = aggregate(&outcomes);
    Ok(ExperimentResult {
        config: cfg.clone(),
        outcomes,
        aggregate,
    })
}

/// Runs a single replication of a configured experiment.
pub fn run_replication(
    cfg: &ExperimentConfig,
    set: &DecisionSet,
    replication: u64,
) -> Result<ReplicationOutcome> {
    let env_seed = mix(cfg.run.seed, &[SALT_ENV_SEED, replication]);
    let env = cfg.build_env(set, env_seed)?;
    // Fixed tuning without a configured loss bound tunes to the realized
    // optimum of this replication's sequence.
    let lstar_hint = if cfg.policy.tuning == Tuning::Fixed && cfg.policy.lstar.is_none() {
        Some(env.oracle_lstar(set)?)
    } else {
        None
    };
    let mut policy = cfg.build_policy(set, lstar_hint)?;
    run_policy_on_env(
        cfg,
        set,
        &mut policy,
        &env,
        cfg.run.seed,
        replication,
    )
}

/// Drives `policy` against `env` for the configured horizon.
pub fn run_policy_on_env(
    cfg: &ExperimentConfig,
    set: &DecisionSet,
    policy: &mut ExperimentPolicy,
    env: &LossSource,
    base_seed: u64,
    replication: u64,
) -> Result<ReplicationOutcome> {
    let horizon = cfg.run.horizon;
    let d = set.dim();
    let mut trace = Vec::with_capacity(horizon as usize);
    let mut learner_loss = 0.0;
    let mut cumulative = vec![0.0f64; d];
    for t in 1..=horizon {
        let params = policy.current_params()?;
        let mut rng = stream_rng(base_seed, &[SALT_POLICY, replication, t]);
        let action = policy.draw_action(&mut rng)?;
        let losses = env.losses_at(t)?;
        let feedback = ObservedLosses::from_full(&losses, &action)?;
        let loss = action.dot(&losses)?;
        policy.step(&action, &feedback, &mut rng)?;
        learner_loss += loss;
        for (slot, &l) in cumulative.iter_mut().zip(&losses) {
            *slot += l;
        }
        let (_, best_so_far) = set.best_fixed_action(&cumulative)?;
        let (s, s_total) = policy
            .estimator_state()
            .map_or((0.0, 0.0), |st| (st.last_round_total(), st.cumulative_total()));
        let (eta, gamma, beta, bound) = match params {
            Some(p) => (p.eta, p.gamma, p.beta(), p.bound()),
            None => (0.0, 0.0, 0.0, f64::INFINITY),
        };
        trace.push(RoundRecord {
            t,
            action,
            loss,
            regret_to_date: learner_loss - best_so_far,
            eta,
            gamma,
            beta,
            bound,
            s,
            s_total,
        });
    }
    let (_, lstar) = set.best_fixed_action(&cumulative)?;
    let m = set.max_weight();
    let c = cfg.run.bound_additive_const;
    let metrics = Metrics {
        replication,
        horizon,
        learner_loss,
        lstar,
        regret: learner_loss - lstar,
        bound_first_order: first_order_bound(d, m, lstar, horizon, c),
        bound_horizon: horizon_bound(d, m, horizon),
        bound_combined: adaptive_regret_bound(d, m, lstar, horizon, c),
        policy: policy.name().to_string(),
        q_method: match policy {
            ExperimentPolicy::Fpl(p) => match p.q_method() {
                crate::policy::QMethodChoice::MonteCarlo { samples: None } => {
                    "monte-carlo:auto".to_string()
                }
                crate::policy::QMethodChoice::MonteCarlo { samples: Some(k) } => {
                    format!("monte-carlo:{k}")
                }
                crate::policy::QMethodChoice::Quadrature => "quadrature".to_string(),
            },
            ExperimentPolicy::Uniform(_) => "none".to_string(),
        },
    };
    let final_hat_l = policy
        .estimator_state()
        .map_or_else(Vec::new, |st| st.hat_l().to_vec());
    Ok(ReplicationOutcome {
        replication,
        metrics,
        trace,
        final_hat_l,
        d_const: (d as f64 / m as f64).ln() + 1.0,
        max_weight: m,
    })
}

fn aggregate(outcomes: &[ReplicationOutcome]) -> Aggregate {
    let n = outcomes.len() as f64;
    let regrets: Vec<f64> = outcomes.iter().map(|o| o.metrics.regret).collect();
    let mean = regrets.iter().sum::<f64>() / n;
    let var = if outcomes.len() > 1 {
        regrets.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Aggregate {
        replications: outcomes.len() as u64,
        mean_regret: mean,
        stderr_regret: (var / n).sqrt(),
        mean_learner_loss: outcomes.iter().map(|o| o.metrics.learner_loss).sum::<f64>() / n,
        mean_lstar: outcomes.iter().map(|o| o.metrics.lstar).sum::<f64>() / n,
        mean_bound_combined: outcomes
            .iter()
            .map(|o| o.metrics.bound_combined)
            .sum::<f64>()
            / n,
    }
}
