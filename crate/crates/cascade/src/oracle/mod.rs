//! Independent oracles for the closed forms in [`crate::analytic`].
//!
//! Each oracle re-derives a quantity from the model's own assumptions by
//! direct sampling or exhaustive enumeration. None of them call into the
//! analytic module or share arithmetic helpers with it; that separation is
//! the point, so keep it when editing. An estimate "passes" when its
//! confidence interval brackets the closed-form value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OracleError {
    #[error("{what} = {value} outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("trials must be >= {min}, got {got}")]
    TooFewTrials { got: u64, min: u64 },
}

/// Monte-Carlo run configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Sample count; at least 10^5 so the normal approximation of the
    /// confidence interval is sound.
    pub trials: u64,
    pub seed: u64,
    /// Two-sided confidence level for the half-width, default 0.99.
    pub confidence: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            trials: 1_000_000,
            seed: 0x5eed_cafe,
            confidence: 0.99,
        }
    }
}

impl OracleConfig {
    fn validate(&self) -> Result<(), OracleError> {
        if self.trials < 100_000 {
            return Err(OracleError::TooFewTrials {
                got: self.trials,
                min: 100_000,
            });
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(OracleError::OutOfRange {
                what: "confidence",
                value: self.confidence,
                min: f64::MIN_POSITIVE,
                max: 1.0 - f64::EPSILON,
            });
        }
        Ok(())
    }

    /// Two-sided normal quantile for this confidence level,
    /// `Phi^{-1}(1 - (1 - confidence)/2)`.
    pub fn z_value(&self) -> f64 {
        inverse_normal_cdf(1.0 - (1.0 - self.confidence) / 2.0)
    }
}

/// A Monte-Carlo estimate with its confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub half_width: f64,
    pub trials: u64,
}

impl Estimate {
    /// Does the confidence interval contain `truth`?
    pub fn brackets(&self, truth: f64) -> bool {
        (self.value - truth).abs() <= self.half_width
    }
}

/// Sample the two-branch collision experiment behind the collision
/// probability: the neighbour is busy with probability `u` (certain
/// collision); otherwise a collision happens only if its next transmission,
/// exponential with rate `u / packet_time`, starts within one packet time.
///
/// `packet_time` is accepted to mirror the derivation even though the result
/// depends on `u` alone (the rate and the window cancel).
pub fn mc_collision_probability(
    u: f64,
    packet_time: Duration,
    cfg: &OracleConfig,
) -> Result<Estimate, OracleError> {
    if !(0.0..=1.0).contains(&u) || !u.is_finite() {
        return Err(OracleError::OutOfRange {
            what: "u",
            value: u,
            min: 0.0,
            max: 1.0,
        });
    }
    cfg.validate()?;
    let t = packet_time.as_secs_f64().max(f64::MIN_POSITIVE);
    let rate = u / t;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut hits = 0u64;
    for _ in 0..cfg.trials {
        let busy = rng.gen::<f64>() < u;
        let collided = if busy {
            true
        } else if rate > 0.0 {
            // Next start of the neighbour after our attempt instant.
            let gap = -(1.0 - rng.gen::<f64>()).ln() / rate;
            gap < t
        } else {
            false
        };
        if collided {
            hits += 1;
        }
    }
    let n = cfg.trials as f64;
    let p_hat = hits as f64 / n;
    let half_width = cfg.z_value() * (p_hat * (1.0 - p_hat) / n).sqrt();
    Ok(Estimate {
        value: p_hat,
        half_width,
        trials: cfg.trials,
    })
}

/// Simulate per-attempt independent collisions with probability `p` and
/// count attempts until success, capped at the retry limit.
pub fn mc_mean_retry_count(
    p: f64,
    retry_limit: u32,
    cfg: &OracleConfig,
) -> Result<Estimate, OracleError> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(OracleError::OutOfRange {
            what: "p",
            value: p,
            min: 0.0,
            max: 1.0,
        });
    }
    if retry_limit < 1 {
        return Err(OracleError::OutOfRange {
            what: "retry_limit",
            value: retry_limit as f64,
            min: 1.0,
            max: u32::MAX as f64,
        });
    }
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for _ in 0..cfg.trials {
        let mut attempts = 1u32;
        while attempts < retry_limit && rng.gen::<f64>() < p {
            attempts += 1;
        }
        let a = attempts as f64;
        sum += a;
        sum_sq += a * a;
    }
    let n = cfg.trials as f64;
    let mean = sum / n;
    let var = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
    let half_width = cfg.z_value() * (var / n).sqrt();
    Ok(Estimate {
        value: mean,
        half_width,
        trials: cfg.trials,
    })
}

/// Exhaustive evaluation of the backoff-window success sum: every draw
/// `n` in `0..=cw_max`, accumulated in ascending order. Deliberately a
/// free-standing loop rather than a call into the analytic module.
pub fn brute_force_backoff_success(
    tx_time: Duration,
    slot: Duration,
    cw_max: u32,
) -> Result<f64, OracleError> {
    let tx_ns = tx_time.as_nanos();
    let slot_ns = slot.as_nanos();
    if slot_ns == 0 {
        return Err(OracleError::OutOfRange {
            what: "slot",
            value: 0.0,
            min: f64::MIN_POSITIVE,
            max: f64::MAX,
        });
    }
    let mut sum = 0.0;
    for n in 0..=cw_max as u128 {
        let b_ns = slot_ns * n;
        if b_ns > tx_ns {
            sum += (b_ns - tx_ns) as f64 / (b_ns + tx_ns) as f64;
        }
    }
    Ok(sum / (cw_max as f64 + 1.0))
}

/// Inverse of the standard normal CDF (Acklam's rational approximation,
/// absolute error below 1.2e-9 on (0, 1)).
fn inverse_normal_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}
