//! Stylized dynamical-system model of a hidden-node chain.
//!
//! Node `i+1`'s packets collide whenever they overlap a transmission of the
//! hidden node `i`. Treating each node's transmission process as memoryless
//! gives a scalar map from the utilization `u_i` of one node to the
//! utilization of the next:
//!
//! ```text
//! p(u)        = 1 - e^{-u} (1 - u)                 collision probability
//! rbar(p, R)  = sum_{r=1..R} p^{r-1}               mean attempts per packet
//! u_{i+1}     = min{ rho * rbar(p(u_i), R), 1 }    utilization iteration
//! ```
//!
//! where `rho` is the offered load of a node and `R` the retry limit. The
//! fixed points of the iteration, and hence the limiting utilization of a
//! long chain, are the solutions of `h_R(omega) = rho` with
//! `h_R(omega) = omega / rbar(p(omega), R)`, plus the congested point
//! `omega = 1` whenever `rho >= 1/R`. Everything in this module is a pure
//! function of its arguments; callers may invoke any of it concurrently.
//!
//! Numerical conventions (all tolerances are pinned here, not configurable
//! per call site unless the operation takes an explicit `tol`):
//!
//! * fixed-point search scans [`FIXED_POINT_GRID`] uniform intervals for
//!   sign changes of `h(omega) - rho` and bisects each bracket,
//! * a returned fixed point must satisfy `|min{f(omega),1} - omega| <`
//!   [`RESIDUAL_TOL`],
//! * `|h'(omega)| <` [`MARGINAL_EPS`] is reported as [`Stability::Marginal`]
//!   rather than guessing a sign,
//! * regime classification refuses to classify loads within
//!   [`BOUNDARY_TOL_INV_R`] of `1/R` or [`BOUNDARY_TOL_HMAX`] of `h_R^max`
//!   and reports a boundary case instead; near-tangency classification is
//!   numerically unreliable at that scale.

mod backoff;
mod fixed_point;
mod hfunc;
mod map;
mod regime;
pub(crate) mod search;

pub use backoff::backoff_success_probability;
pub use fixed_point::{
    classify_stability, find_fixed_points, FixedPoint, FixedPointSet, Stability,
};
pub use hfunc::{h_derivative, h_max, h_of_omega, omega_bar, RetryLimit};
pub use map::{
    collision_probability, limit_of_sequence, mean_retry_count, next_utilization,
    utilization_sequence, ModelParams, UtilizationSequence,
};
pub use regime::{classify_regime, phase_transition_bounds, PhaseBounds, Regime, RegimeReport};

use thiserror::Error;

/// Grid intervals scanned for sign changes when locating fixed points.
pub const FIXED_POINT_GRID: usize = 10_000;

/// Default bisection tolerance for fixed-point location.
pub const DEFAULT_FIXED_POINT_TOL: f64 = 1e-9;

/// Residual bound every returned fixed point must satisfy:
/// `|min{f(omega), 1} - omega| < RESIDUAL_TOL`.
pub const RESIDUAL_TOL: f64 = 1e-6;

/// `|h'(omega)|` below this reports marginal stability instead of a sign.
pub const MARGINAL_EPS: f64 = 1e-8;

/// Regime boundary band around `rho = 1/R` (exact quantity).
pub const BOUNDARY_TOL_INV_R: f64 = 1e-9;

/// Regime boundary band around `rho = h_R^max` (numerically located maximum).
pub const BOUNDARY_TOL_HMAX: f64 = 1e-6;

/// Default iteration tolerance for [`utilization_sequence`]. Convergence of
/// the iteration is monotone, so a tight tolerance is cheap.
pub const DEFAULT_ITER_TOL: f64 = 1e-10;

/// Default step cap for [`utilization_sequence`].
pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

/// Default grid resolution for [`h_max`].
pub const DEFAULT_H_MAX_GRID: usize = 10_000;

/// Errors from the analytic model.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum AnalyticError {
    /// An argument fell outside its admissible interval.
    #[error("{what} = {value} outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    /// The retry limit must be at least 1.
    #[error("retry limit must be >= 1, got {0}")]
    InvalidRetryLimit(u32),

    /// The load list for a sequence run was empty.
    #[error("load list is empty")]
    EmptyLoads,

    /// A value claimed to be a fixed point is not one.
    #[error("omega = {omega} is not a fixed point (residual {residual:.3e})")]
    NotAFixedPoint { omega: f64, residual: f64 },

    /// The load sits within the boundary band of a regime threshold, where
    /// classification is numerically unreliable.
    #[error("rho = {rho} within {tol:.1e} of the {name} threshold {threshold}; not classified")]
    RegimeBoundary {
        rho: f64,
        threshold: f64,
        tol: f64,
        name: &'static str,
    },

    /// A structural guarantee of the theory failed to hold numerically.
    #[error("internal consistency failure: {0}")]
    InternalInconsistency(String),

    /// The resolution argument was below the documented minimum.
    #[error("grid resolution {got} below minimum {min}")]
    GridTooCoarse { got: usize, min: usize },
}

pub(crate) fn check_range(
    what: &'static str,
    value: f64,
    min: f64,
    max: f64,
) -> Result<(), AnalyticError> {
    if !value.is_finite() || value < min || value > max {
        return Err(AnalyticError::OutOfRange {
            what,
            value,
            min,
            max,
        });
    }
    Ok(())
}

pub(crate) fn check_retry_limit(retry_limit: u32) -> Result<(), AnalyticError> {
    if retry_limit < 1 {
        return Err(AnalyticError::InvalidRetryLimit(retry_limit));
    }
    Ok(())
}
