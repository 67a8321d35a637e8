//! Truncated exponential perturbations.
//!
//! The perturbation law on `[0, B)` has density `f_B(z) = e^{-z} / (1 - e^{-B})`;
//! `B = +inf` recovers the plain unit exponential. Sampling uses the inverse
//! CDF `z = -log(1 - u (1 - e^{-B}))`, which handles both cases through one
//! code path and maps `u in [0, 1)` strictly inside `[0, B)`.

use rand::Rng;

use crate::error::{Error, Result};

/// Truncation level of the perturbation law: the bound `B` together with the
/// derived mass parameter `beta = e^{-B}`.
///
/// The untruncated law is represented by `B = +inf`, `beta = 0`; `beta` is
/// always stored as `exp(-B)` of the stored bound, so the pair stays
/// consistent bit-for-bit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationParams {
    bound: f64,
    beta: f64,
}

impl TruncationParams {
    /// Builds the law truncated at `bound`. Accepts `+inf`; rejects
    /// non-positive or NaN bounds.
    pub fn from_bound(bound: f64) -> Result<Self> {
        if bound.is_nan() || bound <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "truncation bound must be positive, got {bound}"
            )));
        }
        Ok(TruncationParams {
            bound,
            beta: (-bound).exp(),
        })
    }

    /// Builds the law with truncated mass `beta = e^{-B}`; `beta = 0` yields
    /// the untruncated law. Rejects `beta >= 1`, negative, or NaN.
    pub fn from_beta(beta: f64) -> Result<Self> {
        if beta.is_nan() || !(0.0..1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!(
                "truncated mass must lie in [0, 1), got {beta}"
            )));
        }
        let bound = if beta == 0.0 { f64::INFINITY } else { -beta.ln() };
        // Re-derive beta from the stored bound so beta == exp(-bound) exactly.
        Ok(TruncationParams {
            bound,
            beta: (-bound).exp(),
        })
    }

    pub fn untruncated() -> Self {
        TruncationParams {
            bound: f64::INFINITY,
            beta: 0.0,
        }
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_truncated(&self) -> bool {
        self.bound.is_finite()
    }
}

/// Density of the truncated law at `z`.
///
/// Returns 0 outside `[0, B]`. Errors on non-positive or NaN `bound`;
/// `bound = +inf` gives the unit exponential density.
pub fn truncated_exp_density(bound: f64, z: f64) -> Result<f64> {
    if bound.is_nan() || bound <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "truncation bound must be positive, got {bound}"
        )));
    }
    if z < 0.0 || z > bound {
        return Ok(0.0);
    }
    // 1 - e^{-B} computed as -expm1(-B) to keep precision for small B.
    Ok((-z).exp() / -(-bound).exp_m1())
}

/// CDF of the truncated law at `z`, clamped to `[0, 1]`.
pub fn truncated_exp_cdf(bound: f64, z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else if z >= bound {
        1.0
    } else {
        (-(-z).exp_m1()) / (-(-bound).exp_m1())
    }
}

/// Inverse-CDF sample of the truncated law from a uniform variate
/// `u in [0, 1)`. Strictly increasing in `u`; lands in `[0, B)`.
pub fn sample_truncated_exp(bound: f64, u: f64) -> f64 {
    // z = -log(1 - u (1 - e^{-B})), with 1 - e^{-B} = -expm1(-B).
    -(u * (-bound).exp_m1()).ln_1p()
}

/// Draws the `d` i.i.d. perturbation components for one round.
pub fn sample_perturbation_vector(
    d: usize,
    trunc: TruncationParams,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let mut z = vec![0.0; d];
    fill_perturbations(&mut z, trunc, rng);
    z
}

/// Allocation-free variant of [`sample_perturbation_vector`] for hot loops.
pub(crate) fn fill_perturbations(out: &mut [f64], trunc: TruncationParams, rng: &mut impl Rng) {
    let scale = (-trunc.bound()).exp_m1(); // -(1 - e^{-B})
    for slot in out.iter_mut() {
        *slot = -(rng.gen::<f64>() * scale).ln_1p();
    }
}
