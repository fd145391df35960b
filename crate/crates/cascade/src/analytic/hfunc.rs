//! The fixed-point locus function `h_R` and its derivative.
//!
//! `h_R(omega) = omega / Gamma(omega)` with
//! `Gamma(omega) = sum_{r=1..R} q^{r-1}` and `q = 1 - e^{-omega}(1-omega)`.
//! Interior fixed points of the utilization iteration at load `rho` are
//! exactly the solutions of `h_R(omega) = rho`, so the shape of `h_R`
//! (in particular its maximum) decides which regimes are reachable.

use super::{check_range, check_retry_limit, search, AnalyticError};

/// Retry limit for the `h` family: a finite cap or the `R -> infinity`
/// closed form `h_inf(omega) = e^{-omega}(1-omega) omega`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetryLimit {
    Finite(u32),
    Unbounded,
}

impl From<u32> for RetryLimit {
    fn from(r: u32) -> Self {
        RetryLimit::Finite(r)
    }
}

/// The constant `(3 - sqrt 5) / 2`, below which `h_R` is strictly
/// increasing for every retry limit. It is the root of `1 - 3w + w^2`
/// in `[0, 1]`, where the unbounded-limit derivative changes sign.
pub fn omega_bar() -> f64 {
    (3.0 - 5.0_f64.sqrt()) / 2.0
}

/// `Gamma(omega) = sum_{r=1..R} q^{r-1}`, the mean retry count expressed in
/// the collision probability `q(omega)`. Direct summation keeps the value
/// monotone in `q` and exact at `q = 0` (the r = 1 term is 1, so
/// `Gamma(0) = 1` and `f(0) = rho` without a special case).
pub(crate) fn gamma(omega: f64, retry_limit: u32) -> f64 {
    let q = 1.0 - (-omega).exp() * (1.0 - omega);
    let mut sum = 0.0;
    let mut term = 1.0;
    for _ in 0..retry_limit {
        sum += term;
        term *= q;
    }
    sum
}

/// `Gamma'(omega) = q'(omega) * sum_{r=2..R} (r-1) q^{r-2}` with
/// `q'(omega) = e^{-omega}(2-omega)`.
pub(crate) fn gamma_prime(omega: f64, retry_limit: u32) -> f64 {
    let q = 1.0 - (-omega).exp() * (1.0 - omega);
    let qp = (-omega).exp() * (2.0 - omega);
    let mut sum = 0.0;
    let mut term = 1.0; // q^{r-2} for r = 2
    for r in 2..=retry_limit {
        sum += (r - 1) as f64 * term;
        term *= q;
    }
    qp * sum
}

/// Evaluate `h_R(omega)` on `[0, 1]`, continuously extended to `h(0) = 0`.
///
/// Identities used as test anchors: `h_R(0) = 0` and `h_R(1) = 1/R` for
/// every finite `R`; the unbounded limit is `e^{-omega}(1-omega) omega`.
pub fn h_of_omega(omega: f64, retry_limit: RetryLimit) -> Result<f64, AnalyticError> {
    check_range("omega", omega, 0.0, 1.0)?;
    match retry_limit {
        RetryLimit::Finite(r) => {
            check_retry_limit(r)?;
            if omega == 0.0 {
                // Gamma(0) = 1, so the ratio extends continuously to 0.
                return Ok(0.0);
            }
            Ok(omega / gamma(omega, r))
        }
        RetryLimit::Unbounded => Ok((-omega).exp() * (1.0 - omega) * omega),
    }
}

/// Closed-form derivative `h_R'(omega) = 1/Gamma - omega Gamma' / Gamma^2`,
/// or `e^{-omega}(1 - 3 omega + omega^2)` in the unbounded mode.
///
/// `omega = 0` is rejected; `h` is strictly increasing near 0, so callers
/// needing one-sided behaviour can evaluate slightly inside the interval.
pub fn h_derivative(omega: f64, retry_limit: RetryLimit) -> Result<f64, AnalyticError> {
    check_range("omega", omega, 0.0, 1.0)?;
    if omega == 0.0 {
        return Err(AnalyticError::OutOfRange {
            what: "omega (h_derivative needs omega > 0)",
            value: 0.0,
            min: f64::MIN_POSITIVE,
            max: 1.0,
        });
    }
    match retry_limit {
        RetryLimit::Finite(r) => {
            check_retry_limit(r)?;
            let g = gamma(omega, r);
            let gp = gamma_prime(omega, r);
            Ok(1.0 / g - omega * gp / (g * g))
        }
        RetryLimit::Unbounded => Ok((-omega).exp() * (1.0 - 3.0 * omega + omega * omega)),
    }
}

/// Global maximum of `h_R` on `[0, 1]`: grid scan at the requested
/// resolution, golden-section refinement of the bracketing interval, then a
/// floor at `max(h(1), h(omega_bar))` so the returned value never drops
/// below the analytically guaranteed evaluations.
///
/// Returns `(omega_star, value)`. `grid` must be at least 1000.
pub fn h_max(retry_limit: u32, grid: usize) -> Result<(f64, f64), AnalyticError> {
    check_retry_limit(retry_limit)?;
    if grid < 1000 {
        return Err(AnalyticError::GridTooCoarse {
            got: grid,
            min: 1000,
        });
    }
    let h = |w: f64| h_of_omega(w, RetryLimit::Finite(retry_limit)).expect("omega in range");

    let mut best_i = 0usize;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=grid {
        let w = i as f64 / grid as f64;
        let v = h(w);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let lo = if best_i == 0 { 0.0 } else { (best_i - 1) as f64 / grid as f64 };
    let hi = if best_i == grid { 1.0 } else { (best_i + 1) as f64 / grid as f64 };
    let (mut w_star, mut v_star) = search::golden_section_max(&h, lo, hi, 1e-12);

    // Guaranteed evaluations: the maximum can never be below either of these.
    for w in [1.0, omega_bar()] {
        let v = h(w);
        if v > v_star {
            v_star = v;
            w_star = w;
        }
    }
    Ok((w_star, v_star))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn endpoints_are_exact() {
        for r in 1..=64 {
            assert_eq!(h_of_omega(0.0, RetryLimit::Finite(r)).unwrap(), 0.0);
            let h1 = h_of_omega(1.0, RetryLimit::Finite(r)).unwrap();
            assert_abs_diff_eq!(h1, 1.0 / r as f64, epsilon = 1e-15);
        }
    }

    #[test]
    fn unbounded_mode_at_omega_bar() {
        // e^{-wbar}(1-wbar)wbar, wbar = (3-sqrt5)/2. The exact value is
        // 0.1611207...; the paper rounds it to 0.161.
        let v = h_of_omega(omega_bar(), RetryLimit::Unbounded).unwrap();
        assert_abs_diff_eq!(v, 0.16118, epsilon = 1e-4);
        assert_abs_diff_eq!(v, 0.161_120_703_062_021_96, epsilon = 1e-12);
    }

    #[test]
    fn h_max_reference_values() {
        let (_, v7) = h_max(7, 10_000).unwrap();
        assert_abs_diff_eq!(v7, 0.166, epsilon = 1e-3);
        let (w4, v4) = h_max(4, 10_000).unwrap();
        assert_abs_diff_eq!(v4, 0.25, epsilon = 1e-3);
        assert_abs_diff_eq!(w4, 1.0, epsilon = 1e-6);
        let (_, v10) = h_max(10, 10_000).unwrap();
        assert_abs_diff_eq!(v10, 0.162, epsilon = 2e-3);
    }

    #[test]
    fn h_max_refinement_beats_grid() {
        // Independent fine-scan oracle for the R = 7 maximum.
        let mut brute = f64::NEG_INFINITY;
        for i in 0..=2_000_000u64 {
            let w = i as f64 / 2e6;
            brute = brute.max(h_of_omega(w, RetryLimit::Finite(7)).unwrap());
        }
        let (_, v) = h_max(7, 10_000).unwrap();
        assert_abs_diff_eq!(v, brute, epsilon = 1e-10);
    }

    #[test]
    fn derivative_signs_at_r10_fixed_points() {
        assert!(h_derivative(0.2, RetryLimit::Finite(10)).unwrap() > 0.0);
        assert!(h_derivative(0.7, RetryLimit::Finite(10)).unwrap() < 0.0);
    }

    #[test]
    fn derivative_unbounded_closed_form() {
        let v = h_derivative(0.1, RetryLimit::Unbounded).unwrap();
        assert_abs_diff_eq!(v, 0.642, epsilon = 1e-3);
    }

    #[test]
    fn derivative_matches_central_difference() {
        // 1e-6 step central difference must agree to 1e-5 relative.
        for &r in &[4u32, 7, 10, 32] {
            for i in 1..1000 {
                let w = i as f64 / 1000.0;
                let step = 1e-6;
                let hi = h_of_omega((w + step).min(1.0), RetryLimit::Finite(r)).unwrap();
                let lo = h_of_omega(w - step, RetryLimit::Finite(r)).unwrap();
                let fd = (hi - lo) / ((w + step).min(1.0) - (w - step));
                let an = h_derivative(w, RetryLimit::Finite(r)).unwrap();
                let scale = an.abs().max(1e-3);
                assert!(
                    (an - fd).abs() / scale < 1e-5,
                    "R={r} w={w}: analytic {an} vs fd {fd}"
                );
            }
        }
    }

    #[test]
    fn increasing_below_omega_bar() {
        let wb = omega_bar();
        for r in 1..=64 {
            for i in 1..200 {
                let w = wb * i as f64 / 200.0;
                assert!(
                    h_derivative(w, RetryLimit::Finite(r)).unwrap() > 0.0,
                    "h' must be positive on (0, omega_bar), R={r} w={w}"
                );
            }
        }
    }

    #[test]
    fn zero_omega_rejected_for_derivative() {
        assert!(h_derivative(0.0, RetryLimit::Finite(7)).is_err());
    }

    #[test]
    fn coarse_grid_rejected() {
        assert!(matches!(
            h_max(7, 999),
            Err(AnalyticError::GridTooCoarse { .. })
        ));
    }
}
