//! Online combinatorial optimization under semi-bandit feedback.
//!
//! The learner repeatedly picks an action from a combinatorial decision set
//! (single arms, m-sets, perfect matchings, or source-sink paths in a DAG),
//! suffers the inner product of its incidence vector with an adversarial loss
//! vector, and observes losses only on the components it played. The core
//! algorithm is follow-the-perturbed-leader with truncated exponential
//! perturbations and implicit-exploration loss estimates ("FPL-TrIX"),
//! together with an untruncated variant, a uniform-play baseline, synthetic
//! loss environments, regret-bound evaluators, and an audit suite that checks
//! the algorithm's key inequalities on real runs.

pub mod action;
pub mod decision_sets;
pub mod environments;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod perturbation;
pub mod policy;
pub(crate) mod quadrature;
pub mod rng;

pub use action::Action;
pub use decision_sets::DecisionSet;
pub use error::{Error, Result};
