//! Per-node counters and sampled time series of a run.

use super::ScenarioSpec;

/// Whole-run counters plus steady-state measures for one transmitter.
///
/// The counters cover the entire run so that the conservation identity
/// `generated = delivered + dropped + queued_at_end` holds exactly;
/// `busy_seconds`, `utilization`, `delivered_in_window` and
/// `throughput_bps` are measured over the post-warmup window only.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStats {
    pub node: usize,
    pub generated: u64,
    pub delivered: u64,
    /// Receptions destroyed by a hidden interferer (failed attempts).
    pub collided: u64,
    /// Packets abandoned after the retry limit.
    pub dropped: u64,
    pub queued_at_end: u64,
    /// Airtime within the measurement window, seconds.
    pub busy_seconds: f64,
    /// `busy_seconds / (duration - warmup)`.
    pub utilization: f64,
    pub delivered_in_window: u64,
    /// Delivered payload bits per second over the measurement window.
    pub throughput_bps: f64,
    /// Packets that started service under Minstrel (0 under a fixed rate).
    pub minstrel_packets: u64,
    pub lookaround_packets: u64,
}

/// One sampling bucket of the time series.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Bucket {
    /// Airtime inside the bucket, seconds.
    pub busy: f64,
    /// Packets delivered inside the bucket.
    pub delivered: u64,
    /// Airtime of all attempts that ended in the bucket, for the mean
    /// transmitted bit rate under Minstrel.
    pub attempt_airtime: f64,
    /// Payload bits of those attempts.
    pub attempt_bits: f64,
}

/// Per-node bucketed samples over the full run (warmup included; consumers
/// slice as needed).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    window: f64,
    n_buckets: usize,
    buckets: Vec<Vec<Bucket>>,
}

impl TimeSeries {
    pub(crate) fn new(n_nodes: usize, window: f64, duration: f64) -> Self {
        let n_buckets = (duration / window).ceil() as usize;
        TimeSeries {
            window,
            n_buckets,
            buckets: vec![vec![Bucket::default(); n_buckets]; n_nodes],
        }
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn n_buckets(&self) -> usize {
        self.n_buckets
    }

    /// Start time of bucket `b`.
    pub fn bucket_start(&self, b: usize) -> f64 {
        b as f64 * self.window
    }

    pub fn node(&self, node: usize) -> &[Bucket] {
        &self.buckets[node]
    }

    /// Utilization of `node` within bucket `b`.
    pub fn utilization(&self, node: usize, b: usize) -> f64 {
        self.buckets[node][b].busy / self.window
    }

    /// Delivered bits per second of `node` within bucket `b`.
    pub fn throughput_bps(&self, node: usize, b: usize, packet_bits: f64) -> f64 {
        self.buckets[node][b].delivered as f64 * packet_bits / self.window
    }

    pub(crate) fn add_airtime(&mut self, node: usize, start: f64, end: f64, bits: f64) {
        if end <= start {
            return;
        }
        let first = (start / self.window) as usize;
        let last = ((end / self.window) as usize).min(self.n_buckets - 1);
        for b in first..=last {
            let lo = self.bucket_start(b).max(start);
            let hi = (self.bucket_start(b) + self.window).min(end);
            if hi > lo {
                self.buckets[node][b].busy += hi - lo;
            }
        }
        // Attribute the attempt to the bucket where it ended.
        let b = ((end / self.window) as usize).min(self.n_buckets - 1);
        self.buckets[node][b].attempt_airtime += end - start;
        self.buckets[node][b].attempt_bits += bits;
    }

    pub(crate) fn add_delivery(&mut self, node: usize, t: f64) {
        let b = ((t / self.window) as usize).min(self.n_buckets - 1);
        self.buckets[node][b].delivered += 1;
    }
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub spec: ScenarioSpec,
    pub nodes: Vec<NodeStats>,
    pub series: TimeSeries,
}

impl SimResult {
    pub fn utilization(&self, node: usize) -> f64 {
        self.nodes[node].utilization
    }

    /// Mean delivered bits per second of `nodes` over `[from, to)`.
    pub fn mean_throughput_bps(&self, nodes: impl Iterator<Item = usize>, from: f64, to: f64) -> f64 {
        let bits = self.spec.packet_bits();
        let mut total = 0.0;
        let mut count = 0usize;
        for node in nodes {
            let mut delivered = 0u64;
            for b in 0..self.series.n_buckets() {
                let t = self.series.bucket_start(b);
                if t >= from && t + self.series.window() <= to {
                    delivered += self.series.node(node)[b].delivered;
                }
            }
            let span = (to - from).max(self.series.window());
            total += delivered as f64 * bits / span;
            count += 1;
        }
        if count == 0 {
            0.0
        } else {
            total / count as f64
        }
    }
}
