//! Loss estimation under semi-bandit feedback.
//!
//! After playing action `V` and observing losses only on its support, the
//! learner forms the implicit-exploration estimate
//! `hat_ell_i = ell_i * V_i / (q_i + gamma)`, where `q_i` is the probability
//! that a fresh perturbed-leader draw would include component `i` given the
//! current cumulative estimates. The additive `gamma > 0` biases the estimate
//! low (optimism) and caps it at `1/gamma`. `q` itself is either estimated by
//! Monte Carlo redraws or, for single arms, computed exactly by quadrature.
//! Geometric resampling is provided as an alternative estimator that replaces
//! `1/(q_i + gamma)` with a capped waiting time.

use rand::Rng;

use crate::action::Action;
use crate::decision_sets::DecisionSet;
use crate::error::{check_dim, check_finite, Error, Result};
use crate::perturbation::{truncated_exp_cdf, TruncationParams};
use crate::quadrature::integrate_with_breakpoints;

/// Per-component inclusion probabilities of a perturbed-leader draw.
#[derive(Clone, Debug)]
pub struct QEstimate {
    q: Vec<f64>,
    method: QMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QMethod {
    /// Empirical frequencies over `samples` independent redraws.
    MonteCarlo { samples: usize },
    /// Exact one-dimensional quadrature (single arms only).
    Quadrature,
}

impl QEstimate {
    pub fn values(&self) -> &[f64] {
        &self.q
    }

    pub fn method(&self) -> QMethod {
        self.method
    }

    pub fn method_name(&self) -> &'static str {
        match self.method {
            QMethod::MonteCarlo { .. } => "monte-carlo",
            QMethod::Quadrature => "quadrature",
        }
    }
}

/// Semi-bandit feedback: the loss value for every played component, `None`
/// elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservedLosses {
    values: Vec<Option<f64>>,
}

impl ObservedLosses {
    pub fn new(values: Vec<Option<f64>>) -> Self {
        ObservedLosses { values }
    }

    /// Masks a full loss vector down to the played components.
    pub fn from_full(full: &[f64], action: &Action) -> Result<Self> {
        check_dim(full, action.dim())?;
        Ok(ObservedLosses {
            values: full
                .iter()
                .zip(action.bits())
                .map(|(&l, &b)| b.then_some(l))
                .collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.values[i]
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }
}

/// Estimates the inclusion probabilities `q_i` by `samples` fresh draws of
/// `argmin_v v . (eta * hat_l - Z)` under the given truncation.
pub fn estimate_q_monte_carlo(
    set: &DecisionSet,
    hat_l: &[f64],
    eta: f64,
    trunc: TruncationParams,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<QEstimate> {
    let d = set.dim();
    check_dim(hat_l, d)?;
    check_finite(hat_l)?;
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "learning rate must be positive and finite, got {eta}"
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter(
            "Monte Carlo q estimation needs at least one sample".into(),
        ));
    }
    let base: Vec<f64> = hat_l.iter().map(|&l| eta * l).collect();
    let scale = (-trunc.bound()).exp_m1(); // -(1 - e^{-B})
    let mut costs = vec![0.0f64; d];
    let mut counts = vec![0u64; d];
    let mut support = Vec::with_capacity(set.max_weight());
    for _ in 0..samples {
        for (slot, &b) in costs.iter_mut().zip(&base) {
            let z = -(rng.gen::<f64>() * scale).ln_1p();
            *slot = b - z;
        }
        set.minimizer_support(&costs, &mut support);
        for &i in &support {
            counts[i] += 1;
        }
    }
    Ok(QEstimate {
        q: counts.iter().map(|&c| c as f64 / samples as f64).collect(),
        method: QMethod::MonteCarlo { samples },
    })
}

/// Exact inclusion probabilities for single arms with a truncated law:
/// `q_i = integral_0^B f_B(z) prod_{j != i} F_B(z + eta (hat_l_j - hat_l_i)) dz`.
///
/// Errors when the truncation bound is not finite; see
/// [`q_exact_mab_quadrature_untruncated`] for the `B = inf` companion used by
/// the audit suite.
pub fn q_exact_mab_quadrature(hat_l: &[f64], eta: f64, bound: f64) -> Result<QEstimate> {
    if !bound.is_finite() || bound <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "quadrature requires a finite positive truncation bound, got {bound}"
        )));
    }
    q_mab_quadrature_impl(hat_l, eta, bound)
}

/// Exact inclusion probabilities for single arms under the untruncated
/// exponential law.
pub fn q_exact_mab_quadrature_untruncated(hat_l: &[f64], eta: f64) -> Result<QEstimate> {
    q_mab_quadrature_impl(hat_l, eta, f64::INFINITY)
}

fn q_mab_quadrature_impl(hat_l: &[f64], eta: f64, bound: f64) -> Result<QEstimate> {
    check_finite(hat_l)?;
    if hat_l.is_empty() {
        return Err(Error::InvalidParameter("empty estimate vector".into()));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "learning rate must be positive and finite, got {eta}"
        )));
    }
    let d = hat_l.len();
    let tol = 1e-12;
    let mut q = vec![0.0; d];
    for i in 0..d {
        if d == 1 {
            q[i] = 1.0;
            continue;
        }
        let shifts: Vec<f64> = (0..d)
            .filter(|&j| j != i)
            .map(|j| eta * (hat_l[j] - hat_l[i]))
            .collect();
        // Arm i wins when every other perturbed cost stays above its own:
        // density of own draw times the product of shifted CDFs.
        let integrand = |z: f64| -> f64 {
            let mut p = (-z).exp();
            if bound.is_finite() {
                p /= -(-bound).exp_m1();
            }
            for &s in &shifts {
                p *= truncated_exp_cdf(bound, z + s);
                if p == 0.0 {
                    break;
                }
            }
            p
        };
        // The CDF factors are non-smooth where their argument crosses 0 or B.
        let mut kinks: Vec<f64> = shifts.iter().map(|&s| -s).collect();
        let upper = if bound.is_finite() {
            kinks.extend(shifts.iter().map(|&s| bound - s));
            bound
        } else {
            // Beyond the last kink the integrand is bounded by e^{-z}; forty
            // extra units push the tail below any tolerance used here.
            kinks.iter().fold(0.0f64, |m, &k| m.max(k)) + 40.0
        };
        q[i] = integrate_with_breakpoints(&integrand, 0.0, upper, &mut kinks, tol);
    }
    Ok(QEstimate {
        q,
        method: QMethod::Quadrature,
    })
}

/// Implicit-exploration loss estimate for one round.
///
/// Played components get `ell_i / (q_i + gamma)`; unplayed components get 0.
/// The feedback must carry a value in `[0, 1]` exactly on the action's
/// support.
pub fn ix_loss_estimate(
    observed: &ObservedLosses,
    action: &Action,
    q: &QEstimate,
    gamma: f64,
) -> Result<Vec<f64>> {
    let d = action.dim();
    if observed.dim() != d || q.values().len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if observed.dim() != d {
                observed.dim()
            } else {
                q.values().len()
            },
        });
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "exploration parameter must be positive and finite, got {gamma}"
        )));
    }
    let mut hat_ell = vec![0.0; d];
    for i in 0..d {
        let qi = q.values()[i];
        if qi.is_nan() || qi < 0.0 {
            return Err(Error::EstimatorState(format!(
                "inclusion probability {qi} at component {i} is negative or NaN"
            )));
        }
        match (action.get(i), observed.get(i)) {
            (true, Some(ell)) => {
                if !(0.0..=1.0).contains(&ell) {
                    return Err(Error::Protocol(format!(
                        "observed loss {ell} at component {i} outside [0, 1]"
                    )));
                }
                hat_ell[i] = ell / (qi + gamma);
            }
            (true, None) => {
                return Err(Error::Protocol(format!(
                    "missing feedback on played component {i}"
                )));
            }
            (false, Some(_)) => {
                return Err(Error::Protocol(format!(
                    "feedback on unplayed component {i}"
                )));
            }
            (false, None) => {}
        }
    }
    Ok(hat_ell)
}

/// Geometric-resampling loss estimate: for each played component, redraw
/// fresh perturbed-leader actions until one includes it (capped at
/// `M = ceil(1/gamma)` redraws) and scale the observed loss by the waiting
/// time. Its conditional expectation is `ell_i (1 - (1 - q_i)^M) / q_i`,
/// which matches the implicit-exploration estimate's optimism: never above
/// `ell_i`, and the estimate itself never exceeds `M <= 1 + 1/gamma` times
/// the loss.
pub fn geometric_resampling_estimate(
    set: &DecisionSet,
    hat_l: &[f64],
    eta: f64,
    trunc: TruncationParams,
    action: &Action,
    observed: &ObservedLosses,
    gamma: f64,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    let d = set.dim();
    check_dim(hat_l, d)?;
    check_finite(hat_l)?;
    if action.dim() != d || observed.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if action.dim() != d {
                action.dim()
            } else {
                observed.dim()
            },
        });
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "exploration parameter must be positive and finite, got {gamma}"
        )));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "learning rate must be positive and finite, got {eta}"
        )));
    }
    let cap = (1.0 / gamma).ceil() as u64;
    let base: Vec<f64> = hat_l.iter().map(|&l| eta * l).collect();
    let scale = (-trunc.bound()).exp_m1();
    let mut costs = vec![0.0f64; d];
    let mut support = Vec::with_capacity(set.max_weight());
    let mut hat_ell = vec![0.0; d];
    for i in 0..d {
        match (action.get(i), observed.get(i)) {
            (true, Some(ell)) => {
                if !(0.0..=1.0).contains(&ell) {
                    return Err(Error::Protocol(format!(
                        "observed loss {ell} at component {i} outside [0, 1]"
                    )));
                }
                if ell == 0.0 {
                    continue;
                }
                let mut waited = cap;
                for k in 1..=cap {
                    for (slot, &b) in costs.iter_mut().zip(&base) {
                        let z = -(rng.gen::<f64>() * scale).ln_1p();
                        *slot = b - z;
                    }
                    set.minimizer_support(&costs, &mut support);
                    if support.contains(&i) {
                        waited = k;
                        break;
                    }
                }
                hat_ell[i] = ell * waited as f64;
            }
            (true, None) => {
                return Err(Error::Protocol(format!(
                    "missing feedback on played component {i}"
                )));
            }
            (false, Some(_)) => {
                return Err(Error::Protocol(format!(
                    "feedback on unplayed component {i}"
                )));
            }
            (false, None) => {}
        }
    }
    Ok(hat_ell)
}

/// Running state of the estimated cumulative losses and their totals, which
/// drive the adaptive parameter schedule.
#[derive(Clone, Debug)]
pub struct EstimatorState {
    hat_l: Vec<f64>,
    s_last: f64,
    s_total: f64,
    rounds: u64,
}

impl EstimatorState {
    /// Fresh state with `hat_L = 0` and the cumulative total seeded at
    /// `1 / d_const`, where `d_const = log(d/m) + 1` in the adaptive tuning.
    pub fn new(d: usize, d_const: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("zero-dimensional state".into()));
        }
        if !(d_const.is_finite() && d_const > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "normalizing constant must be positive and finite, got {d_const}"
            )));
        }
        Ok(EstimatorState {
            hat_l: vec![0.0; d],
            s_last: 0.0,
            s_total: 1.0 / d_const,
            rounds: 0,
        })
    }

    /// Folds one round's estimate vector into the cumulative state. Entries
    /// must be finite and nonnegative.
    pub fn accumulate(&mut self, hat_ell: &[f64]) -> Result<()> {
        check_dim(hat_ell, self.hat_l.len())?;
        let mut round_total = 0.0;
        for (i, &e) in hat_ell.iter().enumerate() {
            if !e.is_finite() || e < 0.0 {
                return Err(Error::EstimatorState(format!(
                    "estimate entry {e} at component {i} is negative or non-finite"
                )));
            }
            round_total += e;
        }
        for (slot, &e) in self.hat_l.iter_mut().zip(hat_ell) {
            *slot += e;
        }
        self.s_last = round_total;
        self.s_total += round_total;
        self.rounds += 1;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.hat_l.len()
    }

    /// Cumulative estimated losses `hat_L_t`.
    pub fn hat_l(&self) -> &[f64] {
        &self.hat_l
    }

    /// Last round's estimate total `s_t = sum_i hat_ell_{t,i}`.
    pub fn last_round_total(&self) -> f64 {
        self.s_last
    }

    /// Running total `S_t = 1/d_const + sum_{k <= t} s_k`.
    pub fn cumulative_total(&self) -> f64 {
        self.s_total
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn mc_q_estimates_are_frequencies() {
        let set = DecisionSet::mab(3).unwrap();
        let trunc = TruncationParams::from_bound(2.0).unwrap();
        let mut rng = stream_rng(1, &[1]);
        let q = estimate_q_monte_carlo(&set, &[0.0, 0.0, 0.0], 0.5, trunc, 10_000, &mut rng)
            .unwrap();
        // Single arms: exactly one component per draw, so frequencies sum to 1.
        let total: f64 = q.values().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // Symmetric estimates: each arm near 1/3.
        for &qi in q.values() {
            assert!((qi - 1.0 / 3.0).abs() < 0.02, "{qi}");
        }
        assert_eq!(q.method(), QMethod::MonteCarlo { samples: 10_000 });
    }

    #[test]
    fn mc_q_rejects_bad_arguments() {
        let set = DecisionSet::mab(2).unwrap();
        let trunc = TruncationParams::untruncated();
        let mut rng = stream_rng(1, &[2]);
        assert!(estimate_q_monte_carlo(&set, &[0.0], 0.5, trunc, 10, &mut rng).is_err());
        assert!(estimate_q_monte_carlo(&set, &[0.0, 0.0], 0.0, trunc, 10, &mut rng).is_err());
        assert!(estimate_q_monte_carlo(&set, &[0.0, 0.0], 0.5, trunc, 0, &mut rng).is_err());
        assert!(
            estimate_q_monte_carlo(&set, &[0.0, f64::NAN], 0.5, trunc, 10, &mut rng).is_err()
        );
    }

    #[test]
    fn quadrature_symmetric_arms_split_evenly() {
        let q = q_exact_mab_quadrature(&[0.0, 0.0], 0.7, 1.0).unwrap();
        assert!((q.values()[0] - 0.5).abs() < 1e-9);
        assert!((q.values()[1] - 0.5).abs() < 1e-9);
        let q = q_exact_mab_quadrature_untruncated(&[3.0, 3.0, 3.0], 0.2).unwrap();
        for &qi in q.values() {
            assert!((qi - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn quadrature_sums_to_one_and_handles_saturation() {
        // A cost gap of eta * delta >= B freezes the ordering: arm 0 always
        // wins, the rest never do.
        let eta = 0.5;
        let q = q_exact_mab_quadrature(&[0.0, 20.0, 20.0], eta, 5.0).unwrap();
        assert!((q.values()[0] - 1.0).abs() < 1e-12);
        assert!(q.values()[1].abs() < 1e-12);
        assert!(q.values()[2].abs() < 1e-12);
        // Generic spread: probabilities sum to one.
        let q = q_exact_mab_quadrature(&[0.0, 1.0, 2.5, 4.0], 0.9, 3.0).unwrap();
        let total: f64 = q.values().iter().sum();
        assert!((total - 1.0).abs() < 1e-9, "{total}");
        assert!(q.values().windows(2).all(|w| w[0] >= w[1] - 1e-12));
    }

    #[test]
    fn quadrature_rejects_unbounded_or_bad_input() {
        assert!(q_exact_mab_quadrature(&[0.0, 1.0], 0.5, f64::INFINITY).is_err());
        assert!(q_exact_mab_quadrature(&[0.0, 1.0], 0.5, 0.0).is_err());
        assert!(q_exact_mab_quadrature(&[], 0.5, 1.0).is_err());
        assert!(q_exact_mab_quadrature(&[0.0, 1.0], -0.5, 1.0).is_err());
    }

    #[test]
    fn quadrature_matches_monte_carlo() {
        let eta = 0.7;
        let bound = 3.0;
        let hat_l = [0.0, 1.0 / eta, 2.0 / eta];
        let set = DecisionSet::mab(3).unwrap();
        let trunc = TruncationParams::from_bound(bound).unwrap();
        let exact = q_exact_mab_quadrature(&hat_l, eta, bound).unwrap();
        let mut rng = stream_rng(7, &[3]);
        let k = 1_000_000;
        let mc = estimate_q_monte_carlo(&set, &hat_l, eta, trunc, k, &mut rng).unwrap();
        for i in 0..3 {
            let q = exact.values()[i];
            let sigma = (q * (1.0 - q) / k as f64).sqrt();
            let diff = (mc.values()[i] - q).abs();
            assert!(
                diff <= 3.0 * sigma + 1e-6,
                "component {i}: exact {q}, mc {}, diff {diff}",
                mc.values()[i]
            );
        }
    }

    #[test]
    fn ix_estimate_values_and_errors() {
        let action = Action::from_support(3, &[1]).unwrap();
        let observed = ObservedLosses::from_full(&[0.2, 0.5, 0.9], &action).unwrap();
        let q = QEstimate {
            q: vec![0.3, 0.4, 0.3],
            method: QMethod::Quadrature,
        };
        let hat = ix_loss_estimate(&observed, &action, &q, 0.1).unwrap();
        // 0.5 / (0.4 + 0.1) is exactly 1.
        assert_eq!(hat, vec![0.0, 1.0, 0.0]);
        // Cap: estimates never exceed 1/gamma.
        assert!(hat.iter().all(|&e| e <= 10.0));

        // gamma must be positive.
        assert!(ix_loss_estimate(&observed, &action, &q, 0.0).is_err());
        // Negative q entry is an estimator-state error.
        let bad_q = QEstimate {
            q: vec![0.3, -0.1, 0.3],
            method: QMethod::Quadrature,
        };
        assert!(matches!(
            ix_loss_estimate(&observed, &action, &bad_q, 0.1),
            Err(Error::EstimatorState(_))
        ));
        // Feedback on an unplayed component.
        let bad_obs = ObservedLosses::new(vec![Some(0.2), Some(0.5), None]);
        assert!(matches!(
            ix_loss_estimate(&bad_obs, &action, &q, 0.1),
            Err(Error::Protocol(_))
        ));
        // Missing feedback on the played component.
        let missing = ObservedLosses::new(vec![None, None, None]);
        assert!(matches!(
            ix_loss_estimate(&missing, &action, &q, 0.1),
            Err(Error::Protocol(_))
        ));
        // Observed loss outside [0, 1].
        let out_of_range = ObservedLosses::new(vec![None, Some(1.5), None]);
        assert!(matches!(
            ix_loss_estimate(&out_of_range, &action, &q, 0.1),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn ix_estimate_is_optimistic_in_expectation() {
        // E[hat_ell_i] = q_i * ell_i / (q_i + gamma) <= ell_i, checked here
        // directly from the formula's algebra on a grid.
        for &q in &[0.0, 0.1, 0.5, 1.0] {
            for &gamma in &[0.01, 0.3] {
                for &ell in &[0.0, 0.4, 1.0] {
                    let expected = q * (ell / (q + gamma));
                    assert!(expected <= ell + 1e-15);
                }
            }
        }
    }

    #[test]
    fn geometric_resampling_mean_matches_closed_form() {
        // Two symmetric arms: q = 1/2. With gamma = 1/2 the cap is M = 2 and
        // E[min(K, M)] = (1 - (1 - q)^M) / q = 1.5, so a unit loss estimates
        // to 1.5 on average.
        let set = DecisionSet::mab(2).unwrap();
        let trunc = TruncationParams::from_bound(1.0).unwrap();
        let action = Action::from_support(2, &[0]).unwrap();
        let observed = ObservedLosses::new(vec![Some(1.0), None]);
        let mut rng = stream_rng(13, &[4]);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let hat = geometric_resampling_estimate(
                &set,
                &[0.0, 0.0],
                0.5,
                trunc,
                &action,
                &observed,
                0.5,
                &mut rng,
            )
            .unwrap();
            assert_eq!(hat[1], 0.0);
            assert!(hat[0] == 1.0 || hat[0] == 2.0);
            sum += hat[0];
            sumsq += hat[0] * hat[0];
        }
        let mean = sum / n as f64;
        let var = (sumsq / n as f64 - mean * mean).max(0.0);
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.5).abs() < 4.0 * se + 1e-9, "mean {mean} se {se}");
    }

    #[test]
    fn geometric_resampling_zero_loss_is_zero() {
        let set = DecisionSet::mab(2).unwrap();
        let trunc = TruncationParams::untruncated();
        let action = Action::from_support(2, &[1]).unwrap();
        let observed = ObservedLosses::new(vec![None, Some(0.0)]);
        let mut rng = stream_rng(13, &[5]);
        let hat = geometric_resampling_estimate(
            &set,
            &[0.0, 0.0],
            0.5,
            trunc,
            &action,
            &observed,
            0.25,
            &mut rng,
        )
        .unwrap();
        assert_eq!(hat, vec![0.0, 0.0]);
    }

    #[test]
    fn estimator_state_accumulates_totals() {
        // With d_const = 2 the total starts at 1/2; accumulating a round with
        // s_1 = 3 gives S_1 = 3.5.
        let mut st = EstimatorState::new(3, 2.0).unwrap();
        assert_eq!(st.cumulative_total(), 0.5);
        assert_eq!(st.rounds(), 0);
        st.accumulate(&[1.0, 0.0, 2.0]).unwrap();
        assert_eq!(st.last_round_total(), 3.0);
        assert_eq!(st.cumulative_total(), 3.5);
        assert_eq!(st.hat_l(), &[1.0, 0.0, 2.0]);
        assert_eq!(st.rounds(), 1);
        st.accumulate(&[0.5, 0.5, 0.0]).unwrap();
        assert_eq!(st.last_round_total(), 1.0);
        assert_eq!(st.cumulative_total(), 4.5);
        assert_eq!(st.hat_l(), &[1.5, 0.5, 2.0]);

        assert!(st.accumulate(&[0.1, -0.2, 0.0]).is_err());
        assert!(st.accumulate(&[0.1, f64::INFINITY, 0.0]).is_err());
        assert!(st.accumulate(&[0.1, 0.2]).is_err());
        assert!(EstimatorState::new(0, 2.0).is_err());
        assert!(EstimatorState::new(3, 0.0).is_err());
    }
}
