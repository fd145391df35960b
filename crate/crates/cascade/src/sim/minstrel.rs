//! Simplified Minstrel rate adaptation over the 802.11b ladder.
//!
//! Per rate, the policy keeps an EWMA of the per-window success ratio
//! (new-sample weight 0.25, window 100 ms) and an estimated throughput.
//! A rate whose smoothed success probability is below 10% is treated as
//! unusable (zero estimated throughput), which is what drives the observed
//! collapse to the 1 Mb/s baserate under persistent collisions: once every
//! rate looks unusable, the retry chain degenerates to the lowest rate and
//! stays there until probes succeed again.
//!
//! 90% of packets use the normal chain; the remaining 10% are lookaround
//! packets that probe one randomly chosen rate, ordered against the best
//! rate exactly as in the Minstrel retry-chain table.

/// The 802.11b rate ladder, bits per second, lowest first.
pub const MINSTREL_RATES_BPS: [f64; 4] = [1e6, 2e6, 5.5e6, 11e6];

/// Fraction of packets transmitted on a lookaround chain.
pub const LOOKAROUND_FRACTION: f64 = 0.10;

/// Weight of the newest window in the EWMA success probability.
pub const EWMA_WEIGHT: f64 = 0.25;

/// Statistics refresh interval: ten updates per second.
pub const UPDATE_INTERVAL: f64 = 0.1;

/// Smoothed success probability below which a rate is considered unusable.
pub const USABLE_PROB_FLOOR: f64 = 0.10;

/// Per-rate bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateStats {
    /// Attempts since the start of the run.
    pub attempts: u64,
    pub successes: u64,
    /// EWMA of the per-window success ratio, optimistic at start.
    pub ewma_prob: f64,
    /// `ewma_prob * rate` when usable, else 0.
    pub est_throughput: f64,
}

/// The adaptation state of one transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct RateState {
    pub rates: [RateStats; 4],
    /// Chain targets recomputed at every update.
    pub best_tp: usize,
    pub second_tp: usize,
    pub best_prob: usize,
    window_attempts: [u64; 4],
    window_successes: [u64; 4],
}

impl Default for RateState {
    fn default() -> Self {
        Self::new()
    }
}

impl RateState {
    /// Optimistic initial state: every rate assumed to work, so the chain
    /// starts at the top of the ladder.
    pub fn new() -> Self {
        let mut s = RateState {
            rates: [RateStats {
                attempts: 0,
                successes: 0,
                ewma_prob: 1.0,
                est_throughput: 0.0,
            }; 4],
            best_tp: 0,
            second_tp: 0,
            best_prob: 0,
            window_attempts: [0; 4],
            window_successes: [0; 4],
        };
        s.recompute();
        s
    }

    /// Record the outcome of one transmission attempt at ladder index
    /// `rate`.
    pub fn record_attempt(&mut self, rate: usize, success: bool) {
        self.rates[rate].attempts += 1;
        self.window_attempts[rate] += 1;
        if success {
            self.rates[rate].successes += 1;
            self.window_successes[rate] += 1;
        }
    }

    /// Fold the last window into the EWMA and recompute the chain targets.
    /// Called once per [`UPDATE_INTERVAL`]; rates not attempted in the
    /// window keep their previous estimate.
    pub fn update(&mut self) {
        for i in 0..4 {
            if self.window_attempts[i] > 0 {
                let cur = self.window_successes[i] as f64 / self.window_attempts[i] as f64;
                self.rates[i].ewma_prob =
                    (1.0 - EWMA_WEIGHT) * self.rates[i].ewma_prob + EWMA_WEIGHT * cur;
            }
            self.window_attempts[i] = 0;
            self.window_successes[i] = 0;
        }
        self.recompute();
    }

    fn recompute(&mut self) {
        for i in 0..4 {
            let p = self.rates[i].ewma_prob;
            self.rates[i].est_throughput = if p < USABLE_PROB_FLOOR {
                0.0
            } else {
                p * MINSTREL_RATES_BPS[i]
            };
        }
        // Strictly-greater scans from the bottom of the ladder: ties fall to
        // the lowest rate, so an all-unusable table degenerates to the
        // baserate.
        let mut best = 0;
        for i in 1..4 {
            if self.rates[i].est_throughput > self.rates[best].est_throughput {
                best = i;
            }
        }
        let mut second = if best == 0 { 1 } else { 0 };
        for i in 0..4 {
            if i != best && self.rates[i].est_throughput > self.rates[second].est_throughput {
                second = i;
            }
        }
        if self.rates[second].est_throughput == 0.0 {
            second = 0;
        }
        let mut prob = 0;
        for i in 1..4 {
            let better = self.rates[i].ewma_prob > self.rates[prob].ewma_prob
                || (self.rates[i].ewma_prob == self.rates[prob].ewma_prob
                    && self.rates[i].est_throughput > self.rates[prob].est_throughput);
            if better {
                prob = i;
            }
        }
        self.best_tp = best;
        self.second_tp = second;
        self.best_prob = prob;
    }
}

/// The Minstrel retry chain for one packet, as ladder indices.
///
/// Normal packets descend best throughput, second best, best probability,
/// lowest baserate. A lookaround packet swaps one probe rate in: the probe
/// goes first only when it is faster than the current best. The chain
/// always ends at the baserate; if that attempt fails too, the packet is
/// dropped by the retry limit.
pub fn select_retry_chain(state: &RateState, is_lookaround: bool, random_rate: usize) -> [usize; 4] {
    if is_lookaround {
        if MINSTREL_RATES_BPS[random_rate] < MINSTREL_RATES_BPS[state.best_tp] {
            [state.best_tp, random_rate, state.best_prob, 0]
        } else {
            [random_rate, state.best_tp, state.best_prob, 0]
        }
    } else {
        [state.best_tp, state.second_tp, state.best_prob, 0]
    }
}

/// Distribute the retry budget over the four chain stages, favouring the
/// earlier stages when it does not divide evenly. A budget below four
/// truncates the tail of the chain.
pub fn stage_allocation(retry_limit: u32) -> [u32; 4] {
    let base = retry_limit / 4;
    let extra = retry_limit % 4;
    let mut alloc = [base; 4];
    for stage in alloc.iter_mut().take(extra as usize) {
        *stage += 1;
    }
    alloc
}

/// Chain stage used by attempt number `retry` (1-based).
pub fn stage_of_attempt(retry: u32, alloc: &[u32; 4]) -> usize {
    let mut cum = 0;
    for (stage, &n) in alloc.iter().enumerate() {
        cum += n;
        if retry <= cum {
            return stage;
        }
    }
    3
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_windows(state: &mut RateState, windows: u32, outcome: impl Fn(usize) -> bool) {
        for _ in 0..windows {
            for rate in 0..4 {
                for _ in 0..8 {
                    state.record_attempt(rate, outcome(rate));
                }
            }
            state.update();
        }
    }

    #[test]
    fn all_success_orders_chain_by_nominal_rate() {
        let mut s = RateState::new();
        run_windows(&mut s, 5, |_| true);
        let chain = select_retry_chain(&s, false, 0);
        assert_eq!(MINSTREL_RATES_BPS[chain[0]], 11e6);
        assert_eq!(MINSTREL_RATES_BPS[chain[1]], 5.5e6);
        assert_eq!(chain[3], 0);
    }

    #[test]
    fn persistent_collisions_collapse_to_baserate() {
        let mut s = RateState::new();
        run_windows(&mut s, 12, |_| false);
        // 0.75^12 < 0.1: every rate has dropped below the usable floor.
        assert!(s.rates.iter().all(|r| r.ewma_prob < USABLE_PROB_FLOOR));
        assert_eq!(s.best_tp, 0);
        assert_eq!(select_retry_chain(&s, false, 0), [0, 0, 0, 0]);
    }

    #[test]
    fn lookaround_order_follows_probe_speed() {
        let mut s = RateState::new();
        run_windows(&mut s, 5, |_| true); // best_tp = 11 Mb/s
        // Probe slower than best: best goes first.
        let chain = select_retry_chain(&s, true, 1);
        assert_eq!(chain[0], s.best_tp);
        assert_eq!(chain[1], 1);
        // Probe faster than best: force best down to 5.5 first.
        let mut s2 = RateState::new();
        run_windows(&mut s2, 8, |rate| rate <= 2); // 11 Mb/s always fails
        assert_eq!(s2.best_tp, 2);
        let chain = select_retry_chain(&s2, true, 3);
        assert_eq!(chain[0], 3);
        assert_eq!(chain[1], 2);
        assert_eq!(chain[3], 0);
    }

    #[test]
    fn recovery_after_probes_succeed() {
        let mut s = RateState::new();
        run_windows(&mut s, 12, |_| false);
        assert_eq!(s.best_tp, 0);
        run_windows(&mut s, 12, |_| true);
        assert_eq!(s.best_tp, 3);
    }

    #[test]
    fn stage_allocation_covers_budget() {
        assert_eq!(stage_allocation(7), [2, 2, 2, 1]);
        assert_eq!(stage_allocation(4), [1, 1, 1, 1]);
        assert_eq!(stage_allocation(10), [3, 3, 2, 2]);
        assert_eq!(stage_allocation(2), [1, 1, 0, 0]);
        for r in 1..=16 {
            assert_eq!(stage_allocation(r).iter().sum::<u32>(), r);
        }
    }

    #[test]
    fn stage_of_attempt_walks_the_chain() {
        let alloc = stage_allocation(7);
        let stages: Vec<usize> = (1..=7).map(|r| stage_of_attempt(r, &alloc)).collect();
        assert_eq!(stages, vec![0, 0, 1, 1, 2, 2, 3]);
        // Attempts past the allocation stick to the last stage.
        assert_eq!(stage_of_attempt(9, &alloc), 3);
    }
}
