//! Empirical audits of the algorithm's key inequalities.
//!
//! Each audit checks one inequality that the regret analysis relies on,
//! either exactly (quadrature on single arms, closed forms) or within
//! explicit Monte Carlo confidence slack. Reports carry the worst margin
//! (slack remaining before the inequality would break; nonnegative means
//! pass) plus a human-readable detail line.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::action::Action;
use crate::decision_sets::DecisionSet;
use crate::error::{Error, Result};
use crate::estimator::{estimate_q_monte_carlo, ix_loss_estimate, q_exact_mab_quadrature, q_exact_mab_quadrature_untruncated, QEstimate};
use crate::perturbation::{sample_perturbation_vector, TruncationParams};
use crate::policy::RoundParams;

use super::ReplicationOutcome;

/// Outcome of one audit.
#[derive(Clone, Debug)]
pub struct AuditReport {
    pub name: &'static str,
    pub pass: bool,
    /// Slack remaining before the audited inequality would break;
    /// nonnegative iff `pass`.
    pub margin: f64,
    pub details: String,
}

impl AuditReport {
    fn from_margin(name: &'static str, margin: f64, details: String) -> Self {
        AuditReport {
            name,
            pass: margin >= 0.0,
            margin,
            details,
        }
    }
}

impl std::fmt::Display for AuditReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: margin {:.6e} ({})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.margin,
            self.details
        )
    }
}

/// Truncation total-variation audit: on `d` single arms, the probability of
/// any action under the truncated draw differs from the untruncated draw by
/// at most `beta * d`.
///
/// Several base cost vectors are tried; frequencies come from `samples`
/// draws per law, and the bound is checked with three-standard-error slack.
pub fn audit_truncation_tv(
    d: usize,
    bound: f64,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<AuditReport> {
    let set = DecisionSet::mab(d)?;
    let trunc = TruncationParams::from_bound(bound)?;
    let beta_d = trunc.beta() * d as f64;
    let mut scenarios: Vec<Vec<f64>> = vec![vec![0.0; d]];
    for _ in 0..2 {
        scenarios.push((0..d).map(|_| rng.gen_range(0.0..1.5 * bound)).collect());
    }
    let mut worst_margin = f64::INFINITY;
    let mut worst_gap = 0.0;
    for base in &scenarios {
        let truncated = argmin_frequencies(&set, base, trunc, samples, rng);
        let untruncated =
            argmin_frequencies(&set, base, TruncationParams::untruncated(), samples, rng);
        for i in 0..d {
            let (p, q) = (truncated[i], untruncated[i]);
            let gap = (p - q).abs();
            let sigma =
                ((p * (1.0 - p) + q * (1.0 - q)) / samples as f64).sqrt();
            let margin = beta_d + 3.0 * sigma - gap;
            if margin < worst_margin {
                worst_margin = margin;
                worst_gap = gap;
            }
        }
    }
    Ok(AuditReport::from_margin(
        "truncation-tv",
        worst_margin,
        format!(
            "worst action-probability gap {worst_gap:.6} vs beta*d = {beta_d:.6} \
             over {} scenarios x {samples} draws",
            scenarios.len()
        ),
    ))
}

fn argmin_frequencies(
    set: &DecisionSet,
    base: &[f64],
    trunc: TruncationParams,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let d = set.dim();
    let mut counts = vec![0u64; d];
    let mut costs = vec![0.0; d];
    let mut support = Vec::with_capacity(set.max_weight());
    let scale = (-trunc.bound()).exp_m1();
    for _ in 0..samples {
        for (slot, &b) in costs.iter_mut().zip(base) {
            let z = -(rng.gen::<f64>() * scale).ln_1p();
            *slot = b - z;
        }
        set.minimizer_support(&costs, &mut support);
        for &i in &support {
            counts[i] += 1;
        }
    }
    counts
        .iter()
        .map(|&c| c as f64 / samples as f64)
        .collect()
}

/// Loss-closeness audit: at the end of a truncated run, every component's
/// cumulative estimate is within `m (D + B_T) / eta_T + 1 / gamma_T` of the
/// best action's total estimate. This is a pathwise inequality, checked to
/// tolerance 1e-9.
pub fn audit_loss_closeness(outcome: &ReplicationOutcome, set: &DecisionSet) -> AuditReport {
    let name = "loss-closeness";
    let tol = 1e-9;
    let Some(last) = outcome.trace.last() else {
        return AuditReport::from_margin(name, f64::NEG_INFINITY, "empty trace".into());
    };
    if outcome.final_hat_l.is_empty() {
        return AuditReport::from_margin(
            name,
            f64::NEG_INFINITY,
            "policy keeps no estimates".into(),
        );
    }
    let best = match set.best_fixed_action(&outcome.final_hat_l) {
        Ok((_, v)) => v,
        Err(e) => return AuditReport::from_margin(name, f64::NEG_INFINITY, e.to_string()),
    };
    let m = outcome.max_weight as f64;
    let slack = m * (outcome.d_const + last.bound) / last.eta + 1.0 / last.gamma;
    let rhs = best + slack;
    let max_component = outcome
        .final_hat_l
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let margin = rhs + tol - max_component;
    AuditReport::from_margin(
        name,
        margin,
        format!(
            "max component estimate {max_component:.4} vs best-action total {best:.4} \
             + slack {slack:.4}"
        ),
    )
}

/// A frozen mid-run situation for the estimate-level audits: structure,
/// parameters, the drawn action, true losses, the inclusion probabilities of
/// the draw, and the resulting loss estimates.
#[derive(Clone, Debug)]
pub struct RoundSnapshot {
    pub set: DecisionSet,
    pub hat_l: Vec<f64>,
    pub params: RoundParams,
    pub action: Action,
    pub losses: Vec<f64>,
    pub q: QEstimate,
    pub hat_ell: Vec<f64>,
}

/// Draws a random but internally consistent snapshot: adaptive-style
/// parameters (`gamma = m eta`, `beta = (m/d) eta`, so `beta d = gamma`),
/// cumulative estimates with overlapping perturbed costs, a real draw, and
/// implicit-exploration estimates. On single arms the inclusion
/// probabilities are exact (quadrature); otherwise Monte Carlo with
/// `q_samples` redraws.
pub fn random_snapshot(
    set: &DecisionSet,
    q_samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<RoundSnapshot> {
    let d = set.dim();
    let m = set.max_weight() as f64;
    let eta = rng.gen_range(0.1..1.0f64);
    let gamma = m * eta;
    let beta = (m / d as f64) * eta;
    let trunc = TruncationParams::from_beta(beta)?;
    let params = RoundParams { eta, gamma, trunc };
    let hat_l: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..3.0 / eta)).collect();
    let z = sample_perturbation_vector(d, trunc, rng);
    let costs: Vec<f64> = (0..d).map(|i| eta * hat_l[i] - z[i]).collect();
    let action = set.linear_minimizer(&costs)?;
    let losses: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
    let q = match set {
        DecisionSet::Mab { .. } => q_exact_mab_quadrature(&hat_l, eta, trunc.bound())?,
        _ => estimate_q_monte_carlo(set, &hat_l, eta, trunc, q_samples, rng)?,
    };
    let observed = crate::estimator::ObservedLosses::from_full(&losses, &action)?;
    let hat_ell = ix_loss_estimate(&observed, &action, &q, gamma)?;
    Ok(RoundSnapshot {
        set: set.clone(),
        hat_l,
        params,
        action,
        losses,
        q,
        hat_ell,
    })
}

/// Mean and standard error of `f(fresh untruncated draw)` over `samples`
/// draws with the snapshot's `eta` and estimates.
fn untruncated_draw_stats(
    snap: &RoundSnapshot,
    samples: usize,
    rng: &mut ChaCha8Rng,
    f: impl Fn(f64) -> f64,
) -> (f64, f64) {
    let d = snap.set.dim();
    let mut costs = vec![0.0; d];
    let mut support = Vec::with_capacity(snap.set.max_weight());
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..samples {
        for (slot, &l) in costs.iter_mut().zip(&snap.hat_l) {
            let u: f64 = rng.gen();
            // -ln(1 - u): untruncated exponential perturbation.
            *slot = snap.params.eta * l + (-u).ln_1p();
        }
        snap.set.minimizer_support(&costs, &mut support);
        let dot = support.iter().map(|&i| snap.hat_ell[i]).sum::<f64>();
        let x = f(dot);
        sum += x;
        sumsq += x * x;
    }
    let mean = sum / samples as f64;
    let var = (sumsq / samples as f64 - mean * mean).max(0.0);
    (mean, (var / samples as f64).sqrt())
}

/// Exact `E[f(u . hat_ell)]`-style sums for single arms via the untruncated
/// inclusion probabilities: for unit vectors, `u . hat_ell` is a single
/// component.
fn untruncated_mab_exact(snap: &RoundSnapshot, f: impl Fn(f64) -> f64) -> Result<f64> {
    let q = q_exact_mab_quadrature_untruncated(&snap.hat_l, snap.params.eta)?;
    Ok(q.values()
        .iter()
        .zip(&snap.hat_ell)
        .map(|(&qi, &e)| qi * f(e))
        .sum())
}

/// Quadratic-term audit: with `beta d <= gamma`, the untruncated draw
/// satisfies `E[(u . hat_ell)^2] <= m * sum_i hat_ell_i`.
pub fn audit_quadratic_term(
    snap: &RoundSnapshot,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<AuditReport> {
    let name = "quadratic-term";
    let m = snap.set.max_weight() as f64;
    let rhs = m * snap.hat_ell.iter().sum::<f64>();
    let (lhs, slack, how) = if matches!(snap.set, DecisionSet::Mab { .. }) {
        let lhs = untruncated_mab_exact(snap, |x| x * x)?;
        (lhs, 1e-9, "exact".to_string())
    } else {
        let (mean, se) = untruncated_draw_stats(snap, samples, rng, |x| x * x);
        (mean, 3.0 * se, format!("{samples} draws"))
    };
    Ok(AuditReport::from_margin(
        name,
        rhs + slack - lhs,
        format!("E[(u.hat_ell)^2] = {lhs:.6} vs m * sum = {rhs:.6} ({how})"),
    ))
}

/// Estimate-bias audit: with `beta d <= gamma`, the untruncated draw
/// satisfies `E[u . hat_ell] >= V . ell - (gamma + beta d) * sum_i hat_ell_i`.
pub fn audit_estimate_bias(
    snap: &RoundSnapshot,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<AuditReport> {
    let name = "estimate-bias";
    let played_loss = snap.action.dot(&snap.losses)?;
    let total = snap.hat_ell.iter().sum::<f64>();
    let rhs = played_loss - (snap.params.gamma + snap.params.beta() * snap.set.dim() as f64) * total;
    let (lhs, slack, how) = if matches!(snap.set, DecisionSet::Mab { .. }) {
        let lhs = untruncated_mab_exact(snap, |x| x)?;
        (lhs, 1e-9, "exact".to_string())
    } else {
        let (mean, se) = untruncated_draw_stats(snap, samples, rng, |x| x);
        (mean, 3.0 * se, format!("{samples} draws"))
    };
    Ok(AuditReport::from_margin(
        name,
        lhs + slack - rhs,
        format!("E[u.hat_ell] = {lhs:.6} vs V.ell - (gamma + beta d) sum = {rhs:.6} ({how})"),
    ))
}

/// Top-m audit: the expected sum of the `m` largest of `d` independent unit
/// exponentials is at most `m (log(d/m) + 1)`, checked empirically with
/// three-standard-error slack.
pub fn audit_top_m_exponentials(
    d: usize,
    m: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<AuditReport> {
    if d == 0 || m == 0 || m > d {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= m <= d, got d={d}, m={m}"
        )));
    }
    let bound = m as f64 * ((d as f64 / m as f64).ln() + 1.0);
    let mut z = vec![0.0; d];
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..samples {
        for slot in z.iter_mut() {
            let u: f64 = rng.gen();
            *slot = -(-u).ln_1p();
        }
        z.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
        let top: f64 = z[..m].iter().sum();
        sum += top;
        sumsq += top * top;
    }
    let mean = sum / samples as f64;
    let var = (sumsq / samples as f64 - mean * mean).max(0.0);
    let se = (var / samples as f64).sqrt();
    Ok(AuditReport::from_margin(
        "top-m-exponentials",
        bound + 3.0 * se - mean,
        format!("empirical mean {mean:.6} (se {se:.2e}) vs bound {bound:.6} over {samples} draws"),
    ))
}
