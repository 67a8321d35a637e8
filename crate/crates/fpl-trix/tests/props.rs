//! Property tests: randomized invariants that must hold for every input,
//! complementing the fixed-value unit tests and the acceptance gate.

use proptest::prelude::*;

use fpl_trix::decision_sets::DecisionSet;
use fpl_trix::estimator::EstimatorState;
use fpl_trix::perturbation::{sample_truncated_exp, truncated_exp_cdf};
use fpl_trix::policy::{d_const, ParamSchedule};
use fpl_trix::Action;

/// A small path set with parallel routes of different lengths so ties and
/// negative costs exercise the path oracle.
fn diamond_dag() -> DecisionSet {
    DecisionSet::dag_path(4, vec![(0, 1), (0, 2), (1, 3), (2, 3), (0, 3)], 0, 3)
        .expect("valid dag")
}

fn arb_set() -> impl Strategy<Value = DecisionSet> {
    prop_oneof![
        (1usize..=6).prop_map(|d| DecisionSet::mab(d).expect("mab")),
        (2usize..=6)
            .prop_flat_map(|d| (Just(d), 1usize..=d))
            .prop_map(|(d, m)| DecisionSet::mset(d, m).expect("mset")),
        (1usize..=3).prop_map(|n| DecisionSet::matching(n).expect("matching")),
        Just(diamond_dag()),
    ]
}

/// Signed costs mixing a continuous range with a tie-heavy half-integer grid.
fn arb_costs(d: usize) -> impl Strategy<Value = Vec<f64>> {
    let continuous = prop::collection::vec(-5.0f64..5.0, d);
    let quantized =
        prop::collection::vec((-4i32..=4).prop_map(|k| f64::from(k) * 0.5), d);
    prop_oneof![continuous, quantized]
}

fn set_and_costs() -> impl Strategy<Value = (DecisionSet, Vec<f64>)> {
    arb_set().prop_flat_map(|set| {
        let d = set.dim();
        (Just(set), arb_costs(d))
    })
}

fn brute_force_min(set: &DecisionSet, costs: &[f64]) -> Action {
    set.enumerate_actions()
        .expect("enumerable")
        .into_iter()
        .map(|a| (a.dot(costs).expect("dims match"), a))
        .min_by(|(va, aa), (vb, ab)| va.partial_cmp(vb).expect("finite").then_with(|| aa.cmp(ab)))
        .map(|(_, a)| a)
        .expect("non-empty")
}

proptest! {
    /// Inverse-CDF sampling lands in [0, B), is monotone in the uniform
    /// input, and inverts the CDF.
    #[test]
    fn sampler_range_monotone_inverse(
        bound in 0.01f64..20.0,
        u1 in 0.0f64..1.0,
        u2 in 0.0f64..1.0,
    ) {
        let z1 = sample_truncated_exp(bound, u1);
        prop_assert!(z1 >= 0.0);
        prop_assert!(z1 < bound);
        let (lo, hi) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
        prop_assert!(
            sample_truncated_exp(bound, lo) <= sample_truncated_exp(bound, hi),
            "sampling must be monotone in the uniform input"
        );
        let round_trip = truncated_exp_cdf(bound, z1);
        prop_assert!((round_trip - u1).abs() <= 1e-9);
    }

    /// Without truncation the sampler is the plain exponential quantile.
    #[test]
    fn sampler_untruncated_matches_exponential(u in 0.0f64..1.0) {
        let z = sample_truncated_exp(f64::INFINITY, u);
        prop_assert!(z >= 0.0);
        prop_assert!((z - (-(-u).ln_1p())).abs() <= 1e-12);
    }

    /// The linear-minimization oracle equals lexicographic brute force on
    /// every family, for signed and tie-heavy costs alike.
    #[test]
    fn oracle_matches_brute_force((set, costs) in set_and_costs()) {
        let fast = set.linear_minimizer(&costs).expect("oracle runs");
        let slow = brute_force_min(&set, &costs);
        prop_assert_eq!(fast, slow);
    }

    /// The adaptive schedule keeps its invariants under arbitrary valid
    /// estimate streams: eta starts at D and never increases, gamma = m eta,
    /// beta d <= gamma, and eta_t <= sqrt(2 D / S_t) after every update.
    #[test]
    fn adaptive_schedule_invariants(
        (d, m) in (2usize..=8).prop_flat_map(|d| (Just(d), 1usize..d)),
        rounds in prop::collection::vec(
            (prop::collection::vec(0.0f64..1.0, 1..=8), 0.0f64..1.0),
            1..40,
        ),
    ) {
        let dc = d_const(d, m);
        let schedule = ParamSchedule::adaptive(d, m).expect("adaptive schedule");
        let mut est = EstimatorState::new(d, dc).expect("estimator state");
        let mut prev_eta = f64::INFINITY;
        for (weights, scale) in rounds {
            let params = schedule.params_for_round(&est).expect("params");
            if est.rounds() == 0 {
                prop_assert!((params.eta - dc).abs() <= 1e-12);
            }
            prop_assert!(params.eta <= prev_eta + 1e-12);
            prop_assert!((params.gamma - m as f64 * params.eta).abs() <= 1e-12);
            prop_assert!(params.beta() * d as f64 <= params.gamma + 1e-12);

            // A protocol-legal round touches at most m components, each
            // estimate capped by 1/gamma.
            let mut hat_ell = vec![0.0f64; d];
            for (k, w) in weights.iter().take(m).enumerate() {
                hat_ell[k] = w * scale / params.gamma;
            }
            est.accumulate(&hat_ell).expect("accumulate");
            let cap = (2.0 * dc / est.cumulative_total()).sqrt();
            prop_assert!(params.eta <= cap + 1e-12);
            prev_eta = params.eta;
        }
    }

    /// Bit strings round-trip through actions unchanged.
    #[test]
    fn action_bit_string_round_trip(bits in prop::collection::vec(any::<bool>(), 1..24)) {
        let action = Action::new(bits.clone());
        let encoded = action.to_bit_string();
        let decoded = Action::from_bit_string(&encoded).expect("well-formed bit string");
        prop_assert_eq!(decoded.bits(), &bits[..]);
    }
}
