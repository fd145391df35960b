//! Probability that a hidden node's backoff window lets a packet through.
//!
//! While a saturated hidden node cycles through retransmissions, the only
//! opening for its neighbour is a backoff draw long enough to contain an
//! entire packet. Conditioning on the draw `n` (uniform on `0..=cw_max`)
//! and on a transmission start uniform over the busy-plus-backoff cycle
//! gives
//!
//! ```text
//! sum over n with slot*n > tx of  1/(cw_max+1) * (slot*n - tx)/(slot*n + tx)
//! ```
//!
//! At 1 Mb/s with 1500-byte packets (12 ms), 20 us slots and `cw_max` 1023
//! this evaluates to about 0.059, which is why a congested neighbour almost
//! never lets a packet through.

use std::time::Duration;

use super::AnalyticError;

/// Evaluate the backoff-window success sum.
///
/// Returns 0 when no draw is long enough (`tx_time >= slot * cw_max`).
pub fn backoff_success_probability(
    tx_time: Duration,
    slot: Duration,
    cw_max: u32,
) -> Result<f64, AnalyticError> {
    // Integer nanoseconds keep the draw predicate exact at boundaries like
    // tx_time == slot * cw_max.
    let tx_ns = tx_time.as_nanos();
    let slot_ns = slot.as_nanos();
    if slot_ns == 0 {
        return Err(AnalyticError::OutOfRange {
            what: "slot",
            value: 0.0,
            min: f64::MIN_POSITIVE,
            max: f64::MAX,
        });
    }
    if cw_max < 1 {
        return Err(AnalyticError::OutOfRange {
            what: "cw_max",
            value: cw_max as f64,
            min: 1.0,
            max: u32::MAX as f64,
        });
    }
    if tx_ns >= slot_ns * cw_max as u128 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for n in 1..=cw_max as u128 {
        let b_ns = slot_ns * n;
        if b_ns > tx_ns {
            sum += (b_ns - tx_ns) as f64 / (b_ns + tx_ns) as f64;
        }
    }
    Ok(sum / (cw_max as f64 + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn saturated_neighbour_reference_value() {
        // 12 ms packet, 20 us slots, cw_max 1023.
        let v = backoff_success_probability(
            Duration::from_millis(12),
            Duration::from_micros(20),
            1023,
        )
        .unwrap();
        assert_abs_diff_eq!(v, 0.059, epsilon = 1e-3);
    }

    #[test]
    fn window_too_short_gives_zero() {
        // 1023 slots of 20 us is 20.46 ms; nothing longer fits.
        let v = backoff_success_probability(
            Duration::from_micros(20_460),
            Duration::from_micros(20),
            1023,
        )
        .unwrap();
        assert_eq!(v, 0.0);
        let v = backoff_success_probability(
            Duration::from_millis(25),
            Duration::from_micros(20),
            1023,
        )
        .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn zero_tx_time_counts_every_positive_draw() {
        let v = backoff_success_probability(Duration::ZERO, Duration::from_micros(20), 1023)
            .unwrap();
        assert_abs_diff_eq!(v, 1023.0 / 1024.0, epsilon = 1e-15);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(
            backoff_success_probability(Duration::from_millis(1), Duration::ZERO, 1023).is_err()
        );
        assert!(backoff_success_probability(
            Duration::from_millis(1),
            Duration::from_micros(20),
            0
        )
        .is_err());
    }
}
