//! Adaptive Simpson quadrature for the closed-form inclusion probabilities.
//!
//! The integrands are smooth except at a known, finite list of kink points
//! (where a clamped CDF enters or leaves saturation), so the driver splits the
//! domain at the kinks and runs adaptive Simpson with Richardson correction on
//! each smooth piece.

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub(crate) fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Integrates `f` over `[a, b]`, splitting the domain at the given interior
/// breakpoints (values outside `(a, b)` are ignored).
pub(crate) fn integrate_with_breakpoints(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    breakpoints: &mut Vec<f64>,
    tol: f64,
) -> f64 {
    breakpoints.retain(|&x| x > a && x < b && x.is_finite());
    breakpoints.push(b);
    breakpoints.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
    breakpoints.dedup();
    let pieces = breakpoints.len();
    let mut lo = a;
    let mut total = 0.0;
    for &hi in breakpoints.iter() {
        total += adaptive_simpson(f, lo, hi, tol / pieces as f64);
        lo = hi;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_functions() {
        let got = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((got - 2.0).abs() < 1e-10);
        let got = adaptive_simpson(&|x: f64| (-x).exp(), 0.0, 30.0, 1e-12);
        assert!((got - 1.0).abs() < 1e-10);
    }

    #[test]
    fn breakpoints_handle_kinks() {
        // |x - 0.3| on [0, 1] integrates to (0.3^2 + 0.7^2)/2 = 0.29.
        let f = |x: f64| (x - 0.3).abs();
        let mut kinks = vec![0.3, -5.0, 2.0];
        let got = integrate_with_breakpoints(&f, 0.0, 1.0, &mut kinks, 1e-12);
        assert!((got - 0.29).abs() < 1e-10);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(adaptive_simpson(&|_| 1.0, 1.0, 1.0, 1e-9), 0.0);
        assert_eq!(adaptive_simpson(&|_| 1.0, 2.0, 1.0, 1e-9), 0.0);
    }
}
