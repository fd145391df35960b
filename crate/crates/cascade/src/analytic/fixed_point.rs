//! Enumeration and stability of fixed points of the utilization iteration.

use serde::Serialize;

use super::hfunc::{gamma, h_of_omega, RetryLimit};
use super::{
    check_range, check_retry_limit, h_derivative, search, AnalyticError, FIXED_POINT_GRID,
    MARGINAL_EPS, RESIDUAL_TOL,
};

/// Stability label of a fixed point.
///
/// Interior points are stable when `h_R'(omega) > 0` and unstable when
/// `h_R'(omega) < 0`. A derivative smaller in magnitude than
/// [`MARGINAL_EPS`], and the congested point at exactly `rho = 1/R`, are
/// reported as `Marginal` rather than guessed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

/// A fixed point `omega = min{f(omega), 1}` with its stability label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub omega: f64,
    pub stability: Stability,
    /// True only for the congested point `omega = 1`.
    pub is_congested_point: bool,
}

/// The ordered set `Omega = {omega_1 < ... < omega_K}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointSet {
    pub points: Vec<FixedPoint>,
}

impl FixedPointSet {
    pub fn count(&self) -> usize {
        self.points.len()
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.omega).collect()
    }

    /// The candidate phase-transition point `omega_{K-1}`, defined when the
    /// set ends at the congested point and has at least two members.
    pub fn transition_candidate(&self) -> Option<f64> {
        let last = self.points.last()?;
        if last.is_congested_point && self.points.len() >= 2 {
            Some(self.points[self.points.len() - 2].omega)
        } else {
            None
        }
    }
}

/// Residual of the fixed-point equation at `omega`.
fn residual(omega: f64, rho: f64, retry_limit: u32) -> f64 {
    let f = rho * gamma(omega, retry_limit);
    (f.min(1.0) - omega).abs()
}

/// Locate every fixed point of the iteration for load `rho` and retry limit
/// `retry_limit`.
///
/// Interior solutions of `h_R(omega) = rho` are found by scanning
/// [`FIXED_POINT_GRID`] uniform intervals for sign changes and bisecting
/// each bracket to `tol`; the congested point `omega = 1` is appended
/// whenever `rho >= 1/R`. The result is strictly increasing and every point
/// satisfies the [`RESIDUAL_TOL`] residual bound. A load below `1/R` with no
/// interior solution contradicts the continuity argument that guarantees one
/// and is reported as an internal consistency failure.
pub fn find_fixed_points(
    rho: f64,
    retry_limit: u32,
    tol: f64,
) -> Result<FixedPointSet, AnalyticError> {
    check_open_load(rho)?;
    check_retry_limit(retry_limit)?;
    if !(tol > 0.0) {
        return Err(AnalyticError::OutOfRange {
            what: "tol",
            value: tol,
            min: f64::MIN_POSITIVE,
            max: f64::MAX,
        });
    }

    let g = |w: f64| h_of_omega(w, RetryLimit::Finite(retry_limit)).expect("in range") - rho;
    let inv_r = 1.0 / retry_limit as f64;

    let n = FIXED_POINT_GRID;
    let mut roots: Vec<f64> = Vec::new();
    let mut prev_w = 0.0;
    let mut prev_g = g(0.0); // -rho, always negative
    for i in 1..=n {
        let w = i as f64 / n as f64;
        let cur_g = g(w);
        if cur_g == 0.0 {
            if w < 1.0 {
                roots.push(w);
            }
        } else if prev_g == 0.0 {
            // Root recorded at the previous grid point; no bracket here.
        } else if prev_g * cur_g < 0.0 {
            let root = search::bisect(&g, prev_w, w, tol);
            if root < 1.0 {
                roots.push(root);
            }
        }
        prev_w = w;
        prev_g = cur_g;
    }

    let congested = rho >= inv_r;
    if congested {
        // Drop an interior root indistinguishable from 1 before appending
        // the congested point itself.
        let sep = (10.0 * tol).max(1e-8);
        roots.retain(|&r| (1.0 - r) > sep);
    }

    if roots.is_empty() && rho < inv_r {
        return Err(AnalyticError::InternalInconsistency(format!(
            "no interior fixed point found for rho = {rho}, R = {retry_limit} \
             although h(0) = 0 < rho < 1/R = h(1) guarantees one"
        )));
    }

    let mut points: Vec<FixedPoint> = Vec::with_capacity(roots.len() + 1);
    for &w in &roots {
        let res = residual(w, rho, retry_limit);
        if res >= RESIDUAL_TOL {
            return Err(AnalyticError::InternalInconsistency(format!(
                "interior root omega = {w} has residual {res:.3e} >= {RESIDUAL_TOL:.1e}"
            )));
        }
        points.push(FixedPoint {
            omega: w,
            stability: interior_stability(w, retry_limit)?,
            is_congested_point: false,
        });
    }
    if congested {
        points.push(FixedPoint {
            omega: 1.0,
            stability: congested_stability(rho, inv_r),
            is_congested_point: true,
        });
    }

    for pair in points.windows(2) {
        if pair[0].omega >= pair[1].omega {
            return Err(AnalyticError::InternalInconsistency(format!(
                "fixed points not strictly increasing: {} then {}",
                pair[0].omega, pair[1].omega
            )));
        }
    }
    Ok(FixedPointSet { points })
}

fn interior_stability(omega: f64, retry_limit: u32) -> Result<Stability, AnalyticError> {
    let d = h_derivative(omega, RetryLimit::Finite(retry_limit))?;
    Ok(if d.abs() < MARGINAL_EPS {
        Stability::Marginal
    } else if d > 0.0 {
        Stability::Stable
    } else {
        Stability::Unstable
    })
}

fn congested_stability(rho: f64, inv_r: f64) -> Stability {
    // Strictly above 1/R the congested point attracts everything past
    // omega_{K-1}; at equality nothing decides a side.
    if rho > inv_r + super::BOUNDARY_TOL_INV_R {
        Stability::Stable
    } else {
        Stability::Marginal
    }
}

/// Classify the stability of a fixed point of the map at `(rho, R)`.
///
/// The input must actually be a fixed point: its residual under the map has
/// to be below [`RESIDUAL_TOL`], otherwise the call is rejected.
pub fn classify_stability(
    omega: f64,
    rho: f64,
    retry_limit: u32,
) -> Result<Stability, AnalyticError> {
    check_range("omega", omega, 0.0, 1.0)?;
    check_open_load(rho)?;
    check_retry_limit(retry_limit)?;

    let res = residual(omega, rho, retry_limit);
    if res >= RESIDUAL_TOL {
        return Err(AnalyticError::NotAFixedPoint {
            omega,
            residual: res,
        });
    }
    if omega >= 1.0 - f64::EPSILON {
        return Ok(congested_stability(rho, 1.0 / retry_limit as f64));
    }
    interior_stability(omega, retry_limit)
}

fn check_open_load(rho: f64) -> Result<(), AnalyticError> {
    if !rho.is_finite() || rho <= 0.0 || rho >= 1.0 {
        return Err(AnalyticError::OutOfRange {
            what: "rho",
            value: rho,
            min: f64::MIN_POSITIVE,
            max: 1.0 - f64::EPSILON,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn paper_example_r7() {
        let set = find_fixed_points(0.15, 7, 1e-9).unwrap();
        let omegas = set.omegas();
        assert_eq!(omegas.len(), 3);
        assert_abs_diff_eq!(omegas[0], 0.265, epsilon = 1e-3);
        assert_abs_diff_eq!(omegas[1], 0.777, epsilon = 1e-3);
        assert_eq!(omegas[2], 1.0);
        assert!(set.points[2].is_congested_point);
        assert_eq!(set.transition_candidate(), Some(omegas[1]));
    }

    #[test]
    fn paper_example_r10() {
        let set = find_fixed_points(0.13, 10, 1e-9).unwrap();
        let omegas = set.omegas();
        assert_eq!(omegas.len(), 3);
        assert_abs_diff_eq!(omegas[0], 0.2, epsilon = 5e-3);
        assert_abs_diff_eq!(omegas[1], 0.7, epsilon = 5e-3);
        assert_eq!(omegas[2], 1.0);
    }

    #[test]
    fn below_inv_r_has_single_interior_point() {
        // rho = 0.10 < 1/4, so min{f(1), 1} = 4 rho < 1: no congested point.
        let set = find_fixed_points(0.10, 4, 1e-9).unwrap();
        assert_eq!(set.count(), 1);
        assert!(!set.points[0].is_congested_point);
        assert!(set.points[0].omega < 1.0);
        // Independent bisection oracle on f(w) - w directly.
        let f = |w: f64| {
            let p = 1.0 - (-w).exp() * (1.0 - w);
            let mut s = 0.0;
            let mut t = 1.0;
            for _ in 0..4 {
                s += t;
                t *= p;
            }
            0.10 * s - w
        };
        let mut lo = 1e-6;
        let mut hi = 0.99;
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_abs_diff_eq!(set.points[0].omega, 0.5 * (lo + hi), epsilon = 1e-7);
    }

    #[test]
    fn residuals_below_bound() {
        for &(rho, r) in &[(0.15, 7u32), (0.13, 10), (0.10, 4), (0.16, 7), (0.05, 20)] {
            let set = find_fixed_points(rho, r, 1e-9).unwrap();
            for p in &set.points {
                assert!(residual(p.omega, rho, r) < RESIDUAL_TOL);
            }
        }
    }

    #[test]
    fn stability_labels_match_paper_example() {
        let set = find_fixed_points(0.13, 10, 1e-9).unwrap();
        assert_eq!(
            classify_stability(set.points[0].omega, 0.13, 10).unwrap(),
            Stability::Stable
        );
        assert_eq!(
            classify_stability(set.points[1].omega, 0.13, 10).unwrap(),
            Stability::Unstable
        );
        assert_eq!(classify_stability(1.0, 0.15, 7).unwrap(), Stability::Stable);
    }

    #[test]
    fn non_fixed_point_rejected() {
        let err = classify_stability(0.5, 0.15, 7).unwrap_err();
        assert!(matches!(err, AnalyticError::NotAFixedPoint { .. }));
    }
}
