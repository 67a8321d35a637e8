//! TOML experiment configuration.
//!
//! Only the decision set and the horizon are mandatory; every other field
//! has a default. A minimal config:
//!
//! ```toml
//! [set]
//! kind = "mab"
//! d = 10
//!
//! [run]
//! horizon = 1000
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decision_sets::DecisionSet;
use crate::environments::LossSource;
use crate::error::{Error, Result};
use crate::policy::{
    ExperimentPolicy, FixedTuningNumerator, FplPolicy, LossEstimatorKind, ParamSchedule,
    QMethodChoice, UniformPolicy,
};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub set: SetConfig,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub env: EnvConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SetConfig {
    pub kind: SetKind,
    /// Components for `mab`/`mset`.
    pub d: Option<usize>,
    /// Subset size for `mset`.
    pub m: Option<usize>,
    /// Side size for `matching`.
    pub n: Option<usize>,
    /// Node count for `dagpath`.
    pub nodes: Option<usize>,
    /// Edge list for `dagpath`.
    pub edges: Option<Vec<(usize, usize)>>,
    pub source: Option<usize>,
    pub sink: Option<usize>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    Mab,
    Mset,
    Matching,
    Dagpath,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicyConfig {
    pub name: PolicyName,
    pub tuning: Tuning,
    /// Known bound on the best action's total loss for fixed tuning; when
    /// absent, the exact hindsight optimum of the realized loss sequence is
    /// used.
    pub lstar: Option<f64>,
    pub fixed_numerator: NumeratorChoice,
    /// Explicit fixed parameters; either all three or none.
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub q_method: QMethodName,
    /// Monte Carlo redraw count; 0 picks `max(1000, ceil(10/gamma))` capped
    /// at 100000.
    pub q_samples: usize,
    pub estimator: EstimatorName,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            name: PolicyName::FplTrix,
            tuning: Tuning::Adaptive,
            lstar: None,
            fixed_numerator: NumeratorChoice::LogBased,
            eta: None,
            gamma: None,
            beta: None,
            q_method: QMethodName::MonteCarlo,
            q_samples: 0,
            estimator: EstimatorName::Ix,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyName {
    FplTrix,
    FplIx,
    Uniform,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Tuning {
    Adaptive,
    Fixed,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum NumeratorChoice {
    /// `3 log(d/m) + 1` under the square root.
    LogBased,
    /// `3 (log(d/m) + 1)`.
    ThreeD,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum QMethodName {
    MonteCarlo,
    Quadrature,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorName {
    Ix,
    GeometricResampling,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    pub kind: EnvKind,
    /// Per-component means for `bernoulli`.
    pub means: Option<Vec<f64>>,
    /// Gap-instance parameters.
    pub eps: f64,
    pub mu: f64,
    pub best_count: usize,
    pub deterministic: bool,
    /// Loss CSV path for `file`.
    pub path: Option<String>,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            kind: EnvKind::UniformMeans,
            means: None,
            eps: 0.01,
            mu: 0.3,
            best_count: 1,
            deterministic: false,
            path: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum EnvKind {
    Bernoulli,
    UniformMeans,
    EasyGap,
    WorstCaseFlip,
    File,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub horizon: u64,
    #[serde(default = "default_replications")]
    pub replications: u64,
    #[serde(default)]
    pub seed: u64,
    /// Additive constant in the first-order regret bound.
    #[serde(default = "default_bound_const")]
    pub bound_additive_const: f64,
}

fn default_replications() -> u64 {
    1
}

fn default_bound_const() -> f64 {
    crate::policy::DEFAULT_ADDITIVE_CONST
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    pub format: OutputFormat,
    pub write_trace: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: "out".into(),
            format: OutputFormat::Csv,
            write_trace: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    /// Per-round trace CSVs plus the JSON summary.
    Csv,
    /// JSON summary only.
    Json,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading config {}", path.display()), e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    fn validate(&self) -> Result<()> {
        if self.run.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.run.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        let explicit = [self.policy.eta, self.policy.gamma, self.policy.beta];
        if explicit.iter().any(Option::is_some) && !explicit.iter().all(Option::is_some) {
            return Err(Error::Config(
                "explicit fixed parameters need eta, gamma, and beta together".into(),
            ));
        }
        if explicit.iter().any(Option::is_some) && self.policy.tuning != Tuning::Fixed {
            return Err(Error::Config(
                "explicit eta/gamma/beta require tuning = \"fixed\"".into(),
            ));
        }
        self.build_set().map(|_| ())
    }

    pub fn build_set(&self) -> Result<DecisionSet> {
        let need = |opt: Option<usize>, what: &str| {
            opt.ok_or_else(|| Error::Config(format!("set.{what} is required for this kind")))
        };
        match self.set.kind {
            SetKind::Mab => DecisionSet::mab(need(self.set.d, "d")?),
            SetKind::Mset => DecisionSet::mset(need(self.set.d, "d")?, need(self.set.m, "m")?),
            SetKind::Matching => DecisionSet::matching(need(self.set.n, "n")?),
            SetKind::Dagpath => DecisionSet::dag_path(
                need(self.set.nodes, "nodes")?,
                self.set
                    .edges
                    .clone()
                    .ok_or_else(|| Error::Config("set.edges is required for dagpath".into()))?,
                need(self.set.source, "source")?,
                need(self.set.sink, "sink")?,
            ),
        }
    }

    /// Builds the loss source for one replication with the given seed.
    pub fn build_env(&self, set: &DecisionSet, seed: u64) -> Result<LossSource> {
        let d = set.dim();
        let horizon = self.run.horizon;
        let src = match self.env.kind {
            EnvKind::Bernoulli => {
                let means = self
                    .env
                    .means
                    .clone()
                    .ok_or_else(|| Error::Config("env.means is required for bernoulli".into()))?;
                LossSource::bernoulli(means, horizon, seed)?
            }
            EnvKind::UniformMeans => LossSource::uniform_means(d, horizon, seed)?,
            EnvKind::EasyGap => LossSource::easy_gap(
                d,
                self.env.best_count,
                self.env.eps,
                self.env.mu,
                self.env.deterministic,
                horizon,
                seed,
            )?,
            EnvKind::WorstCaseFlip => LossSource::worst_case_flip(d, horizon)?,
            EnvKind::File => {
                let path = self
                    .env
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::Config("env.path is required for file".into()))?;
                let src = LossSource::from_file(path)?;
                if src.horizon() < horizon {
                    return Err(Error::Config(format!(
                        "loss file holds {} rounds, config asks for {horizon}",
                        src.horizon()
                    )));
                }
                src
            }
        };
        if src.dim() != d {
            return Err(Error::Config(format!(
                "environment dimension {} does not match decision set dimension {d}",
                src.dim()
            )));
        }
        Ok(src)
    }

    /// Builds the policy; `lstar_hint` feeds fixed tuning when `policy.lstar`
    /// is not set in the config.
    pub fn build_policy(
        &self,
        set: &DecisionSet,
        lstar_hint: Option<f64>,
    ) -> Result<ExperimentPolicy> {
        if self.policy.name == PolicyName::Uniform {
            return Ok(ExperimentPolicy::Uniform(UniformPolicy::new(set.clone())));
        }
        let d = set.dim();
        let m = set.max_weight();
        let schedule = match self.policy.tuning {
            Tuning::Adaptive => ParamSchedule::adaptive(d, m)?,
            Tuning::Fixed => {
                if let (Some(eta), Some(gamma), Some(beta)) =
                    (self.policy.eta, self.policy.gamma, self.policy.beta)
                {
                    ParamSchedule::fixed(d, m, eta, gamma, beta)?
                } else {
                    let lstar = self.policy.lstar.or(lstar_hint).ok_or_else(|| {
                        Error::Config(
                            "fixed tuning needs policy.lstar or a realized loss hint".into(),
                        )
                    })?;
                    let numerator = match self.policy.fixed_numerator {
                        NumeratorChoice::LogBased => FixedTuningNumerator::LogBased,
                        NumeratorChoice::ThreeD => FixedTuningNumerator::ThreeD,
                    };
                    ParamSchedule::fixed_from_lstar(d, m, lstar, numerator)?
                }
            }
        };
        let policy = match self.policy.name {
            PolicyName::FplTrix => FplPolicy::truncated(set.clone(), schedule)?,
            PolicyName::FplIx => FplPolicy::untruncated(set.clone(), schedule)?,
            PolicyName::Uniform => unreachable!(),
        };
        let q_method = match self.policy.q_method {
            QMethodName::MonteCarlo => QMethodChoice::MonteCarlo {
                samples: (self.policy.q_samples > 0).then_some(self.policy.q_samples),
            },
            QMethodName::Quadrature => QMethodChoice::Quadrature,
        };
        let estimator = match self.policy.estimator {
            EstimatorName::Ix => LossEstimatorKind::ImplicitExploration,
            EstimatorName::GeometricResampling => LossEstimatorKind::GeometricResampling,
        };
        Ok(ExperimentPolicy::Fpl(Box::new(
            policy.with_q_method(q_method)?.with_loss_estimator(estimator),
        )))
    }
}
