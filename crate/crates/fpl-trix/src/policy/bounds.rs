//! Closed-form regret-bound evaluators for the adaptive algorithm.
//!
//! Two guarantees hold simultaneously; [`adaptive_regret_bound`] returns
//! their minimum:
//!
//! * first-order: `13 m sqrt(d L* D) + C m^2 d log(d T)` with `D = log(d/m) + 1`
//!   and `C = 9` by default, tightening when the best action's total loss
//!   `L*` is small;
//! * horizon fallback: `13 m sqrt(d T D) + 9.49 m`, the worst-case rate.

/// Default additive constant `C` in the first-order bound.
pub const DEFAULT_ADDITIVE_CONST: f64 = 9.0;

/// First-order bound `13 m sqrt(d L* D) + C m^2 d log(d T)`.
pub fn first_order_bound(d: usize, m: usize, lstar: f64, horizon: u64, additive_const: f64) -> f64 {
    let (df, mf) = (d as f64, m as f64);
    let d_const = (df / mf).ln() + 1.0;
    let log_dt = (df * horizon as f64).max(1.0).ln();
    13.0 * mf * (df * lstar.max(0.0) * d_const).sqrt() + additive_const * mf * mf * df * log_dt
}

/// Horizon fallback bound `13 m sqrt(d T D) + 9.49 m`.
pub fn horizon_bound(d: usize, m: usize, horizon: u64) -> f64 {
    let (df, mf) = (d as f64, m as f64);
    let d_const = (df / mf).ln() + 1.0;
    13.0 * mf * (df * horizon as f64 * d_const).sqrt() + 9.49 * mf
}

/// The tighter of the two guarantees for the adaptive algorithm.
pub fn adaptive_regret_bound(
    d: usize,
    m: usize,
    lstar: f64,
    horizon: u64,
    additive_const: f64,
) -> f64 {
    first_order_bound(d, m, lstar, horizon, additive_const)
        .min(horizon_bound(d, m, horizon))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_term_matches_hand_computation() {
        // d = 10, m = 2, L* = 100: 26 sqrt(1000 (log 5 + 1)).
        let lead = first_order_bound(10, 2, 100.0, 1, 0.0);
        assert!((lead - 1328.1490988610624).abs() < 1e-9, "{lead}");
        // The additive part alone: C m^2 d log(d T).
        let add = first_order_bound(10, 2, 0.0, 1000, DEFAULT_ADDITIVE_CONST);
        let expect = 9.0 * 4.0 * 10.0 * (10_000.0f64).ln();
        assert!((add - expect).abs() < 1e-9);
    }

    #[test]
    fn horizon_bound_matches_hand_computation() {
        // d = 10, m = 1, T = 20000: 13 sqrt(10 * 20000 * (log 10 + 1)) + 9.49.
        let b = horizon_bound(10, 1, 20_000);
        assert!((b - 10574.875754585526).abs() < 1e-6, "{b}");
    }

    #[test]
    fn combined_bound_takes_the_minimum() {
        // Tiny L*: the first-order branch wins.
        let small = adaptive_regret_bound(10, 1, 5.0, 100_000, DEFAULT_ADDITIVE_CONST);
        assert_eq!(
            small,
            first_order_bound(10, 1, 5.0, 100_000, DEFAULT_ADDITIVE_CONST)
        );
        // L* near T: the horizon branch wins (it has no additive d log term).
        let large = adaptive_regret_bound(10, 1, 99_000.0, 100_000, DEFAULT_ADDITIVE_CONST);
        assert_eq!(large, horizon_bound(10, 1, 100_000));
        // Monotone in lstar until the cap.
        assert!(
            adaptive_regret_bound(8, 2, 10.0, 1000, 9.0)
                <= adaptive_regret_bound(8, 2, 500.0, 1000, 9.0)
        );
    }

    #[test]
    fn degenerate_horizons_stay_finite() {
        assert!(first_order_bound(3, 1, 0.0, 0, 9.0).is_finite());
        assert!(horizon_bound(3, 1, 0) >= 0.0);
    }
}
