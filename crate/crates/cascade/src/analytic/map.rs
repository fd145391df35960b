//! The node-to-node utilization iteration and its limiting behaviour.

use serde::Serialize;

use super::{
    check_range, check_retry_limit, find_fixed_points, AnalyticError, DEFAULT_FIXED_POINT_TOL,
};

/// Parameters of the analytic map: retry limit, per-node loads, and the
/// attacker's load that seeds the iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelParams {
    /// Retry limit `R >= 1` (attempts per packet, including the first).
    pub retry_limit: u32,
    /// Offered load of each non-attacker node, each strictly inside (0, 1).
    /// A single entry models the homogeneous case.
    pub loads: Vec<f64>,
    /// Attacker load `rho_0` in [0, 1]; the iteration starts at
    /// `u_0 = min{rho_0, 1}`.
    pub attacker_load: f64,
}

impl ModelParams {
    pub fn new(retry_limit: u32, loads: Vec<f64>, attacker_load: f64) -> Result<Self, AnalyticError> {
        check_retry_limit(retry_limit)?;
        if loads.is_empty() {
            return Err(AnalyticError::EmptyLoads);
        }
        for &rho in &loads {
            check_open_unit("load", rho)?;
        }
        check_range("attacker_load", attacker_load, 0.0, 1.0)?;
        Ok(Self {
            retry_limit,
            loads,
            attacker_load,
        })
    }

    /// Homogeneous chain: every non-attacker node offers the same load.
    pub fn homogeneous(rho: f64, retry_limit: u32, attacker_load: f64) -> Result<Self, AnalyticError> {
        Self::new(retry_limit, vec![rho], attacker_load)
    }

    /// Utilization of the attacker node, `u_0 = min{rho_0, 1}`.
    pub fn initial_utilization(&self) -> f64 {
        self.attacker_load.min(1.0)
    }

    /// Run the iteration from `u_0` with this parameter set.
    pub fn sequence(&self, max_steps: usize, tol: f64) -> Result<UtilizationSequence, AnalyticError> {
        utilization_sequence(
            self.initial_utilization(),
            &self.loads,
            self.retry_limit,
            max_steps,
            tol,
        )
    }
}

/// A realized trajectory of the iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilizationSequence {
    /// `u_0, u_1, ..., u_n`, all in [0, 1].
    pub values: Vec<f64>,
    /// True when two successive values differed by less than the tolerance.
    pub converged: bool,
    /// The final value, present only when converged.
    pub limit: Option<f64>,
}

fn check_open_unit(what: &'static str, value: f64) -> Result<(), AnalyticError> {
    if !value.is_finite() || value <= 0.0 || value >= 1.0 {
        return Err(AnalyticError::OutOfRange {
            what,
            value,
            min: f64::MIN_POSITIVE,
            max: 1.0 - f64::EPSILON,
        });
    }
    Ok(())
}

/// Probability that a packet transmitted against a neighbour of utilization
/// `u` collides: `1 - e^{-u}(1 - u)`. Monotone increasing, 0 at 0, 1 at 1.
pub fn collision_probability(u: f64) -> Result<f64, AnalyticError> {
    check_range("u", u, 0.0, 1.0)?;
    Ok(1.0 - (-u).exp() * (1.0 - u))
}

/// Mean number of attempts per packet under per-attempt collision
/// probability `p` and retry limit `R`: `sum_{r=1..R} p^{r-1}`.
///
/// Summed directly rather than via the geometric closed form so the value
/// stays exact at `p = 0` (one attempt) and `p = 1` (all `R` attempts) and
/// monotone in `p` throughout.
pub fn mean_retry_count(p: f64, retry_limit: u32) -> Result<f64, AnalyticError> {
    check_range("p", p, 0.0, 1.0)?;
    check_retry_limit(retry_limit)?;
    let mut sum = 0.0;
    let mut term = 1.0;
    for _ in 0..retry_limit {
        sum += term;
        term *= p;
    }
    Ok(sum)
}

/// One step of the iteration: `min{ rho * rbar(p(u), R), 1 }`.
pub fn next_utilization(u: f64, rho: f64, retry_limit: u32) -> Result<f64, AnalyticError> {
    check_range("u", u, 0.0, 1.0)?;
    check_open_unit("rho", rho)?;
    let p = collision_probability(u)?;
    let rbar = mean_retry_count(p, retry_limit)?;
    Ok((rho * rbar).min(1.0))
}

/// Iterate the map from `u0`, taking the load for step `i` from `loads`
/// cyclically (a single-entry list is the homogeneous chain). Stops as soon
/// as two successive values differ by less than `tol`, or after `max_steps`
/// steps, in which case the sequence is returned with `converged = false`
/// rather than silently treated as a limit.
pub fn utilization_sequence(
    u0: f64,
    loads: &[f64],
    retry_limit: u32,
    max_steps: usize,
    tol: f64,
) -> Result<UtilizationSequence, AnalyticError> {
    check_range("u0", u0, 0.0, 1.0)?;
    check_retry_limit(retry_limit)?;
    if loads.is_empty() {
        return Err(AnalyticError::EmptyLoads);
    }
    for &rho in loads {
        check_open_unit("load", rho)?;
    }
    if !(tol > 0.0) {
        return Err(AnalyticError::OutOfRange {
            what: "tol",
            value: tol,
            min: f64::MIN_POSITIVE,
            max: f64::MAX,
        });
    }

    let mut values = Vec::with_capacity(max_steps.min(4096) + 1);
    values.push(u0);
    let mut u = u0;
    for step in 0..max_steps {
        let rho = loads[step % loads.len()];
        let next = next_utilization(u, rho, retry_limit)?;
        values.push(next);
        let delta = (next - u).abs();
        u = next;
        if delta < tol {
            return Ok(UtilizationSequence {
                values,
                converged: true,
                limit: Some(u),
            });
        }
    }
    Ok(UtilizationSequence {
        values,
        converged: false,
        limit: None,
    })
}

/// Predicted limit of the iteration from `u0`, decided from the fixed-point
/// set alone: inside each interval between adjacent fixed points the sign of
/// `f(u) - u` is constant, so a single evaluation at `u0` picks the endpoint
/// the trajectory converges to.
pub fn limit_of_sequence(u0: f64, rho: f64, retry_limit: u32) -> Result<f64, AnalyticError> {
    check_range("u0", u0, 0.0, 1.0)?;
    let set = find_fixed_points(rho, retry_limit, DEFAULT_FIXED_POINT_TOL)?;
    let omegas: Vec<f64> = set.points.iter().map(|p| p.omega).collect();

    // A fixed point maps to itself; snap only at the resolution the points
    // were located to.
    const SNAP: f64 = 1e-9;
    if let Some(&w) = omegas.iter().find(|&&w| (w - u0).abs() <= SNAP) {
        return Ok(w);
    }
    if u0 < omegas[0] {
        return Ok(omegas[0]);
    }
    if u0 > *omegas.last().expect("nonempty") {
        // Only reachable when omega_K < 1; the sequence decreases to omega_K.
        return Ok(*omegas.last().expect("nonempty"));
    }
    let k = omegas
        .windows(2)
        .position(|w| w[0] < u0 && u0 < w[1])
        .ok_or_else(|| {
            AnalyticError::InternalInconsistency(format!(
                "u0 = {u0} not bracketed by fixed points {omegas:?}"
            ))
        })?;
    let f_u0 = next_utilization(u0, rho, retry_limit)?;
    if f_u0 > u0 {
        Ok(omegas[k + 1])
    } else if f_u0 < u0 {
        Ok(omegas[k])
    } else {
        Ok(u0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn collision_probability_anchors() {
        assert_eq!(collision_probability(0.0).unwrap(), 0.0);
        assert_eq!(collision_probability(1.0).unwrap(), 1.0);
        // Independently computed value of 1 - e^{-0.5} * 0.5.
        assert_abs_diff_eq!(
            collision_probability(0.5).unwrap(),
            0.696_735,
            epsilon = 1e-6
        );
        assert!(collision_probability(-0.1).is_err());
        assert!(collision_probability(1.1).is_err());
    }

    #[test]
    fn mean_retry_anchors() {
        assert_eq!(mean_retry_count(0.0, 7).unwrap(), 1.0);
        assert_eq!(mean_retry_count(1.0, 7).unwrap(), 7.0);
        // Brute-force accumulation oracle for the finite geometric sum.
        let mut acc = 0.0;
        for r in 1..=7u32 {
            acc += 0.5_f64.powi(r as i32 - 1);
        }
        assert_eq!(mean_retry_count(0.5, 7).unwrap(), acc);
        assert_abs_diff_eq!(mean_retry_count(0.5, 7).unwrap(), 1.984_375, epsilon = 1e-12);
        assert!(mean_retry_count(0.5, 0).is_err());
    }

    #[test]
    fn mean_retry_monotone_in_p_and_r() {
        let mut last = 0.0;
        for i in 0..=100 {
            let p = i as f64 / 100.0;
            let v = mean_retry_count(p, 7).unwrap();
            assert!(v >= last);
            last = v;
        }
        for r in 1..32 {
            assert!(mean_retry_count(0.6, r + 1).unwrap() >= mean_retry_count(0.6, r).unwrap());
        }
    }

    #[test]
    fn next_utilization_anchors() {
        // f(0) = rho: only the r = 1 term survives.
        assert_abs_diff_eq!(next_utilization(0.0, 0.13, 7).unwrap(), 0.13, epsilon = 1e-15);
        // rho > 1/R clips f(1) = R rho at 1.
        assert_eq!(next_utilization(1.0, 0.15, 7).unwrap(), 1.0);
        // omega_1 = 0.265 is (approximately) a fixed point at rho = 0.15.
        assert_abs_diff_eq!(next_utilization(0.265, 0.15, 7).unwrap(), 0.265, epsilon = 1e-3);
        assert!(next_utilization(0.5, 0.0, 7).is_err());
        assert!(next_utilization(0.5, 1.0, 7).is_err());
    }

    #[test]
    fn sequence_converges_to_omega1_from_below() {
        let seq = utilization_sequence(0.0, &[0.15; 40], 7, 40, 1e-6).unwrap();
        assert!(seq.converged);
        assert_abs_diff_eq!(seq.limit.unwrap(), 0.265, epsilon = 1e-2);
        assert!(seq.values.iter().all(|&u| (0.0..=1.0).contains(&u)));
    }

    #[test]
    fn sequence_stays_at_congested_point() {
        let seq = utilization_sequence(1.0, &[0.15], 7, 40, 1e-12).unwrap();
        assert!(seq.converged);
        assert!(seq.values.iter().all(|&u| u == 1.0));
    }

    #[test]
    fn sequence_from_above_unstable_point_congests() {
        let seq = utilization_sequence(0.9, &[0.13; 60], 10, 60, 1e-12).unwrap();
        assert!(seq.converged);
        assert_eq!(seq.limit, Some(1.0));
    }

    #[test]
    fn non_convergence_is_reported() {
        let seq = utilization_sequence(0.0, &[0.15], 7, 3, 1e-15).unwrap();
        assert!(!seq.converged);
        assert_eq!(seq.limit, None);
        assert_eq!(seq.values.len(), 4);
    }

    #[test]
    fn predicted_limits_match_paper_example() {
        // rho = 0.15, R = 7: omega = {0.265, 0.777, 1}.
        assert_abs_diff_eq!(limit_of_sequence(0.5, 0.15, 7).unwrap(), 0.265, epsilon = 1e-3);
        assert_eq!(limit_of_sequence(0.9, 0.15, 7).unwrap(), 1.0);
        // A fixed point maps to itself.
        let set = find_fixed_points(0.15, 7, 1e-9).unwrap();
        let w2 = set.points[1].omega;
        assert_eq!(limit_of_sequence(w2, 0.15, 7).unwrap(), w2);
    }

    #[test]
    fn model_params_validation() {
        assert!(ModelParams::homogeneous(0.15, 7, 0.5).is_ok());
        assert!(ModelParams::homogeneous(0.0, 7, 0.5).is_err());
        assert!(ModelParams::homogeneous(1.0, 7, 0.5).is_err());
        assert!(ModelParams::homogeneous(0.15, 0, 0.5).is_err());
        assert!(ModelParams::homogeneous(0.15, 7, 1.5).is_err());
        assert!(ModelParams::new(7, vec![], 0.5).is_err());
    }
}
