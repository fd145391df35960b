//! Regime classification and explicit phase-transition bounds.

use serde::Serialize;

use super::hfunc::{h_max, h_of_omega, omega_bar, RetryLimit};
use super::{
    check_retry_limit, find_fixed_points, AnalyticError, FixedPointSet, BOUNDARY_TOL_HMAX,
    BOUNDARY_TOL_INV_R, DEFAULT_FIXED_POINT_TOL, DEFAULT_H_MAX_GRID,
};

/// Which of the three regimes a `(rho, R)` pair falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `rho < 1/R`: the chain stays uncongested for every initial
    /// utilization.
    AlwaysUncongested,
    /// `rho > h_R^max`: the chain congests for every initial utilization.
    AlwaysCongested,
    /// `1/R < rho < h_R^max`: the limit jumps at the transition point
    /// `omega_{K-1}`.
    PhaseTransition,
}

/// Classification of a `(rho, R)` pair together with its fixed points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// `omega_{K-1}`, present only in the phase-transition regime.
    pub transition_point: Option<f64>,
    pub fixed_points: FixedPointSet,
}

/// Explicit bounds on the load interval in which a phase transition exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseBounds {
    /// Lower edge of the transition interval, exactly `1/R`.
    pub lower: f64,
    /// Upper edge, the numerically located `h_R^max`.
    pub upper: f64,
    /// Easily computed lower bound on `upper`: `h_R(omega_bar)`. A phase
    /// transition is guaranteed for any load in `(lower, guaranteed_upper)`
    /// whenever that interval is nonempty.
    pub guaranteed_upper: f64,
    /// The constant `(3 - sqrt 5)/2` at which the bound is evaluated.
    pub omega_bar: f64,
    /// The retry-limit-independent floor `h_inf(omega_bar)`, about 0.161.
    /// Strictly below `guaranteed_upper` for every finite retry limit.
    pub asymptotic_bound: f64,
}

impl PhaseBounds {
    /// True when the guaranteed interval `(1/R, h_R(omega_bar))` is
    /// nonempty, i.e. a phase transition provably exists for this retry
    /// limit without computing `h_R^max`.
    pub fn guaranteed_nonempty(&self) -> bool {
        self.guaranteed_upper > self.lower
    }
}

/// Classify `(rho, R)` into one of the three regimes.
///
/// Loads within [`BOUNDARY_TOL_INV_R`] of `1/R` or [`BOUNDARY_TOL_HMAX`] of
/// `h_R^max` are refused with a boundary error: at a tangency the root
/// structure degenerates and any classification would be numerical noise.
pub fn classify_regime(rho: f64, retry_limit: u32) -> Result<RegimeReport, AnalyticError> {
    check_retry_limit(retry_limit)?;
    if !rho.is_finite() || rho <= 0.0 || rho >= 1.0 {
        return Err(AnalyticError::OutOfRange {
            what: "rho",
            value: rho,
            min: f64::MIN_POSITIVE,
            max: 1.0 - f64::EPSILON,
        });
    }
    let inv_r = 1.0 / retry_limit as f64;
    let (_, hmax) = h_max(retry_limit, DEFAULT_H_MAX_GRID)?;

    if (rho - inv_r).abs() < BOUNDARY_TOL_INV_R {
        return Err(AnalyticError::RegimeBoundary {
            rho,
            threshold: inv_r,
            tol: BOUNDARY_TOL_INV_R,
            name: "1/R",
        });
    }
    if (rho - hmax).abs() < BOUNDARY_TOL_HMAX {
        return Err(AnalyticError::RegimeBoundary {
            rho,
            threshold: hmax,
            tol: BOUNDARY_TOL_HMAX,
            name: "h_max",
        });
    }

    let fixed_points = find_fixed_points(rho, retry_limit, DEFAULT_FIXED_POINT_TOL)?;
    if rho < inv_r {
        return Ok(RegimeReport {
            regime: Regime::AlwaysUncongested,
            transition_point: None,
            fixed_points,
        });
    }
    if rho > hmax {
        return Ok(RegimeReport {
            regime: Regime::AlwaysCongested,
            transition_point: None,
            fixed_points,
        });
    }
    let transition = fixed_points.transition_candidate().ok_or_else(|| {
        AnalyticError::InternalInconsistency(format!(
            "phase-transition regime (rho = {rho}, R = {retry_limit}) but \
             no omega_(K-1) below the congested point"
        ))
    })?;
    Ok(RegimeReport {
        regime: Regime::PhaseTransition,
        transition_point: Some(transition),
        fixed_points,
    })
}

/// The explicit bounds of the phase-transition interval for a retry limit.
pub fn phase_transition_bounds(retry_limit: u32) -> Result<PhaseBounds, AnalyticError> {
    check_retry_limit(retry_limit)?;
    let wb = omega_bar();
    let (_, upper) = h_max(retry_limit, DEFAULT_H_MAX_GRID)?;
    Ok(PhaseBounds {
        lower: 1.0 / retry_limit as f64,
        upper,
        guaranteed_upper: h_of_omega(wb, RetryLimit::Finite(retry_limit))?,
        omega_bar: wb,
        asymptotic_bound: h_of_omega(wb, RetryLimit::Unbounded)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn three_regime_examples() {
        let r = classify_regime(0.10, 4).unwrap();
        assert_eq!(r.regime, Regime::AlwaysUncongested);
        assert_eq!(r.transition_point, None);

        let r = classify_regime(0.15, 7).unwrap();
        assert_eq!(r.regime, Regime::PhaseTransition);
        assert_abs_diff_eq!(r.transition_point.unwrap(), 0.777, epsilon = 1e-3);

        let r = classify_regime(0.30, 4).unwrap();
        assert_eq!(r.regime, Regime::AlwaysCongested);
        assert_eq!(r.fixed_points.omegas(), vec![1.0]);
    }

    #[test]
    fn boundary_is_flagged_not_classified() {
        let err = classify_regime(0.25, 4).unwrap_err();
        assert!(matches!(err, AnalyticError::RegimeBoundary { .. }));
        let err = classify_regime(1.0 / 7.0, 7).unwrap_err();
        assert!(matches!(err, AnalyticError::RegimeBoundary { .. }));
    }

    #[test]
    fn bounds_reference_values() {
        let b = phase_transition_bounds(7).unwrap();
        assert_abs_diff_eq!(b.lower, 0.142_857, epsilon = 1e-6);
        assert_abs_diff_eq!(b.upper, 0.166, epsilon = 1e-3);
        assert!(b.guaranteed_upper <= b.upper);
        assert!(b.asymptotic_bound < b.guaranteed_upper);
        assert!(b.guaranteed_nonempty());

        let b10 = phase_transition_bounds(10).unwrap();
        assert_abs_diff_eq!(b10.lower, 0.10, epsilon = 1e-12);
        assert_abs_diff_eq!(b10.upper, 0.162, epsilon = 2e-3);
    }

    #[test]
    fn guaranteed_interval_per_retry_limit() {
        // Independent accumulation oracle for h_R(omega_bar): for R <= 5 the
        // guaranteed interval is empty, from R = 6 on it is not. (R = 6 sits
        // just above the threshold: h_6(omega_bar) = 0.16737 > 1/6; only the
        // looser asymptotic bound 0.161 needs R >= 7.)
        for r in 1..=12u32 {
            let wb = omega_bar();
            let q = 1.0 - (-wb).exp() * (1.0 - wb);
            let mut gamma = 0.0;
            let mut term = 1.0;
            for _ in 0..r {
                gamma += term;
                term *= q;
            }
            let oracle = wb / gamma;
            let b = phase_transition_bounds(r).unwrap();
            assert_abs_diff_eq!(b.guaranteed_upper, oracle, epsilon = 1e-14);
            assert_eq!(b.guaranteed_nonempty(), oracle > 1.0 / r as f64);
            assert_eq!(b.guaranteed_nonempty(), r >= 6);
        }
    }

    #[test]
    fn asymptotic_bound_strict_for_finite_r() {
        for r in 1..=64u32 {
            let b = phase_transition_bounds(r).unwrap();
            assert!(
                b.guaranteed_upper > b.asymptotic_bound,
                "R = {r}: {} vs {}",
                b.guaranteed_upper,
                b.asymptotic_bound
            );
        }
    }
}
