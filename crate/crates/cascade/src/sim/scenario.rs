//! Declarative description of one simulation run.

use super::rng::{stream_rng, Purpose};
use super::SimError;
use rand::Rng;

/// Shape of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyKind {
    /// Open chain: the first receiver has no hidden interferer.
    Linear,
    /// Closed chain: the last transmitter interferes at the first receiver.
    Ring,
}

/// Per-node arrival rate of the non-attacker nodes, packets per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadModel {
    /// Every node i >= 1 generates at the same rate.
    Fixed(f64),
    /// Rates drawn independently per node, uniform on [lo, hi]; the draw is
    /// part of the seeded scenario, so it is reproducible.
    Uniform { lo: f64, hi: f64 },
}

impl LoadModel {
    /// Largest rate the model can produce, used for feasibility checks.
    pub fn max_rate(&self) -> f64 {
        match *self {
            LoadModel::Fixed(r) => r,
            LoadModel::Uniform { hi, .. } => hi,
        }
    }
}

/// Bit-rate selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatePolicy {
    /// All frames at this rate, bits per second.
    FixedBitRate(f64),
    /// Simplified Minstrel over the 802.11b ladder {1, 2, 5.5, 11} Mb/s.
    Minstrel,
}

/// A temporary increase of the attacker's packet generation rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackerBurst {
    /// Rate during the burst, packets per second.
    pub rate: f64,
    /// Burst interval [start, end) in seconds.
    pub start: f64,
    pub end: f64,
}

/// Everything a run depends on. See the field docs for defaults; a spec is
/// validated as a whole before the engine touches it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub topology: TopologyKind,
    /// Number of transmitter/receiver pairs, at least 2. Node 0 is the
    /// attacker.
    pub n_pairs: usize,
    /// Arrival rate of nodes i >= 1.
    pub arrival_rate: LoadModel,
    /// Baseline arrival rate of node 0, packets per second.
    pub attacker_rate: f64,
    pub burst: Option<AttackerBurst>,
    /// Payload size in bytes.
    pub packet_size: u32,
    pub rate_policy: RatePolicy,
    /// Attempts per packet including the first, at least 1.
    pub retry_limit: u32,
    /// Initial contention window, slots (default 31).
    pub cw1: u32,
    /// Contention window cap, slots (default 1023).
    pub cw_max: u32,
    /// Backoff slot duration, seconds (default 20 us).
    pub slot: f64,
    /// DIFS idle period before backoff, seconds (default 50 us).
    pub difs: f64,
    /// SIFS, seconds (default 10 us). Carried for completeness; the engine
    /// decides success at data-frame end and models no ACK airtime, so SIFS
    /// never enters the timeline.
    pub sifs: f64,
    /// Idealized RTS/CTS: adjacent transmitters never overlap.
    pub rts_cts: bool,
    /// Simulated seconds.
    pub duration: f64,
    /// Seconds excluded from steady-state statistics (default 10% of the
    /// duration).
    pub warmup: f64,
    pub seed: u64,
    /// Width of the time-series sampling window, seconds (default 1).
    pub sample_window: f64,
}

impl ScenarioSpec {
    /// A spec with the 802.11b MAC constants filled in; callers override the
    /// traffic and topology fields.
    pub fn new(topology: TopologyKind, n_pairs: usize) -> Self {
        ScenarioSpec {
            topology,
            n_pairs,
            arrival_rate: LoadModel::Fixed(0.0),
            attacker_rate: 0.0,
            burst: None,
            packet_size: 2000,
            rate_policy: RatePolicy::FixedBitRate(1e6),
            retry_limit: 7,
            cw1: 31,
            cw_max: 1023,
            slot: 20e-6,
            difs: 50e-6,
            sifs: 10e-6,
            rts_cts: false,
            duration: 1000.0,
            warmup: 100.0,
            seed: 1,
            sample_window: 1.0,
        }
    }

    /// Duration of one transmission attempt at the fixed bit rate.
    pub fn fixed_attempt_time(&self) -> Option<f64> {
        match self.rate_policy {
            RatePolicy::FixedBitRate(bps) => Some(self.packet_bits() / bps),
            RatePolicy::Minstrel => None,
        }
    }

    pub fn packet_bits(&self) -> f64 {
        self.packet_size as f64 * 8.0
    }

    /// Arrival rate per node, resolved from the load model. Index 0 is the
    /// attacker's baseline rate. Uniform loads are drawn from a dedicated
    /// seeded stream so they do not perturb the traffic streams.
    pub fn resolved_rates(&self) -> Vec<f64> {
        let mut rates = Vec::with_capacity(self.n_pairs);
        rates.push(self.attacker_rate);
        match self.arrival_rate {
            LoadModel::Fixed(r) => rates.resize(self.n_pairs, r),
            LoadModel::Uniform { lo, hi } => {
                for node in 1..self.n_pairs {
                    let mut rng = stream_rng(self.seed, node as u64, Purpose::LoadDraw);
                    rates.push(lo + (hi - lo) * rng.gen::<f64>());
                }
            }
        }
        rates
    }

    /// Reject a spec the engine cannot run faithfully.
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_pairs < 2 {
            return Err(SimError::invalid("n_pairs", "need at least 2 pairs"));
        }
        if self.retry_limit < 1 {
            return Err(SimError::invalid("retry_limit", "must be >= 1"));
        }
        if self.packet_size == 0 {
            return Err(SimError::invalid("packet_size", "must be positive"));
        }
        if self.cw1 < 1 {
            return Err(SimError::invalid("cw1", "must be >= 1"));
        }
        if self.cw_max < self.cw1 {
            return Err(SimError::invalid("cw_max", "must be >= cw1"));
        }
        for (field, v) in [("slot", self.slot), ("difs", self.difs), ("duration", self.duration)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SimError::invalid(field, format!("must be positive, got {v}")));
            }
        }
        if self.sifs < 0.0 || !self.sifs.is_finite() {
            return Err(SimError::invalid("sifs", "must be nonnegative"));
        }
        if !(self.warmup >= 0.0 && self.warmup < self.duration) {
            return Err(SimError::invalid(
                "warmup",
                format!("must lie in [0, duration), got {}", self.warmup),
            ));
        }
        if !(self.sample_window > 0.0) {
            return Err(SimError::invalid("sample_window", "must be positive"));
        }
        if self.attacker_rate < 0.0 || !self.attacker_rate.is_finite() {
            return Err(SimError::invalid("attacker_rate", "must be nonnegative"));
        }
        match self.arrival_rate {
            LoadModel::Fixed(r) => {
                if r < 0.0 || !r.is_finite() {
                    return Err(SimError::invalid("arrival_rate", "must be nonnegative"));
                }
            }
            LoadModel::Uniform { lo, hi } => {
                if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
                    return Err(SimError::invalid(
                        "arrival_rate",
                        format!("uniform bounds invalid: [{lo}, {hi}]"),
                    ));
                }
            }
        }
        if let Some(b) = self.burst {
            if !(b.start >= 0.0 && b.end > b.start) {
                return Err(SimError::invalid("burst", "need 0 <= start < end"));
            }
            if b.rate < 0.0 || !b.rate.is_finite() {
                return Err(SimError::invalid("burst_rate", "must be nonnegative"));
            }
        }
        match self.rate_policy {
            RatePolicy::FixedBitRate(bps) => {
                if !(bps > 0.0) || !bps.is_finite() {
                    return Err(SimError::invalid("bit_rate", "must be positive"));
                }
                // A non-attacker node whose single-attempt load already
                // exceeds the channel can never be stable; reject it.
                let t = self.packet_bits() / bps;
                let rho = self.arrival_rate.max_rate() * t;
                if rho >= 1.0 {
                    return Err(SimError::invalid(
                        "arrival_rate",
                        format!("implied load rho = {rho:.3} >= 1 at the fixed bit rate"),
                    ));
                }
            }
            RatePolicy::Minstrel => {
                let t_best = self.packet_bits() / super::minstrel::MINSTREL_RATES_BPS[3];
                let rho = self.arrival_rate.max_rate() * t_best;
                if rho >= 1.0 {
                    return Err(SimError::invalid(
                        "arrival_rate",
                        format!("implied load rho = {rho:.3} >= 1 even at the top rate"),
                    ));
                }
            }
        }
        Ok(())
    }
}
