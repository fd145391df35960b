//! The event-driven MAC engine.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::minstrel::{
    select_retry_chain, stage_allocation, stage_of_attempt, RateState, LOOKAROUND_FRACTION,
    MINSTREL_RATES_BPS, UPDATE_INTERVAL,
};
use super::rng::{exp_interarrival, stream_rng, Purpose};
use super::stats::{NodeStats, SimResult, TimeSeries};
use super::topology::build_topology;
use super::{RatePolicy, ScenarioSpec, SimError};

/// Contention window for attempt `r` (1-based): `2^{r-1} (cw1 + 1) - 1`,
/// capped at `cw_max`.
pub fn contention_window(retry: u32, cw1: u32, cw_max: u32) -> u32 {
    debug_assert!(retry >= 1);
    let doubled = (cw1 as u64 + 1)
        .checked_shl(retry - 1)
        .map(|w| w - 1)
        .unwrap_or(u64::MAX);
    doubled.min(cw_max as u64) as u32
}

#[derive(Debug, Clone, Copy)]
enum EventKind {
    TxEnd,
    BurstChange { rate: f64 },
    RateUpdate,
    Arrival { epoch: u32 },
    DifsEnd { epoch: u32 },
    BackoffEnd { epoch: u32 },
}

impl EventKind {
    fn rank(&self) -> u8 {
        match self {
            EventKind::TxEnd => 0,
            EventKind::BurstChange { .. } => 1,
            EventKind::RateUpdate => 2,
            EventKind::Arrival { .. } => 3,
            EventKind::DifsEnd { .. } => 4,
            EventKind::BackoffEnd { .. } => 5,
        }
    }
}

#[derive(Debug)]
struct Event {
    time: f64,
    node: u32,
    kind: EventKind,
    seq: u64,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.time
            .total_cmp(&other.time)
            .then_with(|| self.node.cmp(&other.node))
            .then_with(|| self.kind.rank().cmp(&other.kind.rank()))
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    /// Nothing to send.
    Idle,
    /// Work pending, waiting for the channel to go idle (RTS/CTS mode).
    WaitIdle,
    /// Counting out the DIFS.
    Difs,
    /// Counting down backoff slots.
    Backoff { started: f64, remaining: f64 },
    /// Frame on the air.
    Tx,
}

struct Node {
    lambda: f64,
    phase: Phase,
    /// Invalidates in-flight DifsEnd/BackoffEnd events after interruptions.
    epoch: u32,
    arrival_epoch: u32,
    queue: u64,
    /// Attempt index of the head packet, 1-based.
    retry: u32,
    /// Backoff remaining from before a channel-busy freeze.
    pending_backoff: Option<f64>,
    /// Number of currently transmitting suppressors (RTS/CTS mode).
    sensed_busy: u32,
    tx_start: f64,
    tx_end: f64,
    tx_collided: bool,
    tx_rate_idx: usize,
    rate_state: Option<RateState>,
    chain: [usize; 4],
    chain_ready: bool,
    is_lookaround: bool,
    rng_arrival: ChaCha8Rng,
    rng_backoff: ChaCha8Rng,
    rng_lookaround: ChaCha8Rng,
    // Whole-run counters.
    generated: u64,
    delivered: u64,
    collided: u64,
    dropped: u64,
    minstrel_packets: u64,
    lookaround_packets: u64,
    // Measurement-window accumulators.
    busy_window: f64,
    delivered_window: u64,
}

struct Engine {
    spec: ScenarioSpec,
    nodes: Vec<Node>,
    /// interferers[j]: transmitters that destroy receptions at receiver j.
    interferers: Vec<Vec<usize>>,
    /// victims[k]: receivers destroyed by transmitter k.
    victims: Vec<Vec<usize>>,
    /// suppression[k]: nodes frozen while k transmits (RTS/CTS mode).
    suppression: Vec<Vec<usize>>,
    heap: BinaryHeap<Reverse<Event>>,
    seq: u64,
    now: f64,
    alloc: [u32; 4],
    series: TimeSeries,
}

/// Run one scenario to completion and return per-node statistics plus the
/// sampled time series. Deterministic in the spec, seed included.
pub fn run_simulation(spec: &ScenarioSpec) -> Result<SimResult, SimError> {
    spec.validate()?;
    let topology = build_topology(spec.topology, spec.n_pairs)?;
    let rates = spec.resolved_rates();
    let minstrel = spec.rate_policy == RatePolicy::Minstrel;

    let nodes = (0..spec.n_pairs)
        .map(|i| Node {
            lambda: rates[i],
            phase: Phase::Idle,
            epoch: 0,
            arrival_epoch: 0,
            queue: 0,
            retry: 1,
            pending_backoff: None,
            sensed_busy: 0,
            tx_start: 0.0,
            tx_end: 0.0,
            tx_collided: false,
            tx_rate_idx: 0,
            rate_state: minstrel.then(RateState::new),
            chain: [0; 4],
            chain_ready: false,
            is_lookaround: false,
            rng_arrival: stream_rng(spec.seed, i as u64, Purpose::Arrival),
            rng_backoff: stream_rng(spec.seed, i as u64, Purpose::Backoff),
            rng_lookaround: stream_rng(spec.seed, i as u64, Purpose::Lookaround),
            generated: 0,
            delivered: 0,
            collided: 0,
            dropped: 0,
            minstrel_packets: 0,
            lookaround_packets: 0,
            busy_window: 0.0,
            delivered_window: 0,
        })
        .collect();

    let interferers: Vec<Vec<usize>> = (0..spec.n_pairs)
        .map(|j| topology.interferers(j).to_vec())
        .collect();
    let victims: Vec<Vec<usize>> = (0..spec.n_pairs).map(|k| topology.victims(k)).collect();
    let suppression: Vec<Vec<usize>> = (0..spec.n_pairs)
        .map(|k| {
            let mut s = interferers[k].clone();
            for &v in &victims[k] {
                if !s.contains(&v) {
                    s.push(v);
                }
            }
            s.sort_unstable();
            s
        })
        .collect();

    let mut engine = Engine {
        nodes,
        interferers,
        victims,
        suppression,
        heap: BinaryHeap::new(),
        seq: 0,
        now: 0.0,
        alloc: stage_allocation(spec.retry_limit),
        series: TimeSeries::new(spec.n_pairs, spec.sample_window, spec.duration),
        spec: spec.clone(),
    };
    engine.init();
    engine.run();
    Ok(engine.finalize())
}

impl Engine {
    fn push(&mut self, time: f64, node: usize, kind: EventKind) {
        if time > self.spec.duration {
            return;
        }
        self.seq += 1;
        self.heap.push(Reverse(Event {
            time,
            node: node as u32,
            kind,
            seq: self.seq,
        }));
    }

    fn init(&mut self) {
        for i in 0..self.nodes.len() {
            let lambda = self.nodes[i].lambda;
            if lambda > 0.0 {
                let dt = exp_interarrival(&mut self.nodes[i].rng_arrival, lambda);
                self.push(dt, i, EventKind::Arrival { epoch: 0 });
            }
            if self.nodes[i].rate_state.is_some() {
                self.push(UPDATE_INTERVAL, i, EventKind::RateUpdate);
            }
        }
        if let Some(burst) = self.spec.burst {
            self.push(burst.start, 0, EventKind::BurstChange { rate: burst.rate });
            self.push(
                burst.end,
                0,
                EventKind::BurstChange {
                    rate: self.spec.attacker_rate,
                },
            );
        }
    }

    fn run(&mut self) {
        while let Some(Reverse(ev)) = self.heap.pop() {
            self.now = ev.time;
            let node = ev.node as usize;
            match ev.kind {
                EventKind::Arrival { epoch } => self.on_arrival(node, epoch),
                EventKind::DifsEnd { epoch } => self.on_difs_end(node, epoch),
                EventKind::BackoffEnd { epoch } => self.on_backoff_end(node, epoch),
                EventKind::TxEnd => self.on_tx_end(node),
                EventKind::RateUpdate => self.on_rate_update(node),
                EventKind::BurstChange { rate } => self.on_burst_change(node, rate),
            }
        }
    }

    fn on_arrival(&mut self, i: usize, epoch: u32) {
        if epoch != self.nodes[i].arrival_epoch {
            return;
        }
        let lambda = self.nodes[i].lambda;
        let dt = exp_interarrival(&mut self.nodes[i].rng_arrival, lambda);
        self.push(self.now + dt, i, EventKind::Arrival { epoch });

        self.nodes[i].generated += 1;
        self.nodes[i].queue += 1;
        if self.nodes[i].phase == Phase::Idle {
            self.begin_access(i);
        }
    }

    /// Head-of-line packet wants the channel: DIFS if it is idle, otherwise
    /// wait for the busy period to clear.
    fn begin_access(&mut self, i: usize) {
        debug_assert!(self.nodes[i].queue > 0);
        if self.nodes[i].sensed_busy > 0 {
            self.nodes[i].phase = Phase::WaitIdle;
        } else {
            self.nodes[i].phase = Phase::Difs;
            self.nodes[i].epoch += 1;
            let epoch = self.nodes[i].epoch;
            self.push(self.now + self.spec.difs, i, EventKind::DifsEnd { epoch });
        }
    }

    fn on_difs_end(&mut self, i: usize, epoch: u32) {
        if epoch != self.nodes[i].epoch || self.nodes[i].phase != Phase::Difs {
            return;
        }
        let remaining = match self.nodes[i].pending_backoff.take() {
            Some(rem) => rem,
            None => {
                let cw = contention_window(self.nodes[i].retry, self.spec.cw1, self.spec.cw_max);
                let slots = self.nodes[i].rng_backoff.gen_range(0..=cw);
                slots as f64 * self.spec.slot
            }
        };
        if remaining <= 0.0 {
            self.start_tx(i);
        } else {
            self.nodes[i].phase = Phase::Backoff {
                started: self.now,
                remaining,
            };
            self.push(self.now + remaining, i, EventKind::BackoffEnd { epoch });
        }
    }

    fn on_backoff_end(&mut self, i: usize, epoch: u32) {
        if epoch != self.nodes[i].epoch || !matches!(self.nodes[i].phase, Phase::Backoff { .. }) {
            return;
        }
        self.start_tx(i);
    }

    fn attempt_bitrate(&mut self, i: usize) -> f64 {
        if self.nodes[i].rate_state.is_none() {
            match self.spec.rate_policy {
                RatePolicy::FixedBitRate(bps) => return bps,
                RatePolicy::Minstrel => unreachable!("minstrel nodes carry rate state"),
            }
        }
        if self.nodes[i].retry == 1 && !self.nodes[i].chain_ready {
            // Chain and lookaround decision are per packet, made at its
            // first attempt.
            let best_tp = self.nodes[i].rate_state.as_ref().expect("minstrel").best_tp;
            let look = self.nodes[i].rng_lookaround.gen::<f64>() < LOOKAROUND_FRACTION;
            let random_rate = if look {
                // Probe any rung other than the current best.
                let mut r = self.nodes[i]
                    .rng_lookaround
                    .gen_range(0..MINSTREL_RATES_BPS.len() - 1);
                if r >= best_tp {
                    r += 1;
                }
                r
            } else {
                0
            };
            let state = self.nodes[i].rate_state.as_ref().expect("minstrel");
            self.nodes[i].chain = select_retry_chain(state, look, random_rate);
            self.nodes[i].chain_ready = true;
            self.nodes[i].is_lookaround = look;
            self.nodes[i].minstrel_packets += 1;
            if look {
                self.nodes[i].lookaround_packets += 1;
            }
        }
        let stage = stage_of_attempt(self.nodes[i].retry, &self.alloc);
        let idx = self.nodes[i].chain[stage];
        self.nodes[i].tx_rate_idx = idx;
        MINSTREL_RATES_BPS[idx]
    }

    fn start_tx(&mut self, i: usize) {
        debug_assert_eq!(self.nodes[i].sensed_busy, 0);
        let bps = self.attempt_bitrate(i);
        let dur = self.spec.packet_bits() / bps;
        self.nodes[i].phase = Phase::Tx;
        self.nodes[i].tx_start = self.now;
        self.nodes[i].tx_end = self.now + dur;
        self.nodes[i].tx_collided = false;

        // A hidden interferer already on the air kills this frame; this
        // frame kills any reception in progress at the receivers it reaches.
        for k in self.interferers[i].clone() {
            if self.nodes[k].phase == Phase::Tx {
                self.nodes[i].tx_collided = true;
            }
        }
        for v in self.victims[i].clone() {
            if self.nodes[v].phase == Phase::Tx {
                self.nodes[v].tx_collided = true;
            }
        }

        if self.spec.rts_cts {
            for k in self.suppression[i].clone() {
                self.suppress(k);
            }
        }
        let end = self.nodes[i].tx_end;
        // The frame may outlive the horizon; its airtime up to the horizon
        // is accounted in finalize.
        self.push(end, i, EventKind::TxEnd);
    }

    fn suppress(&mut self, k: usize) {
        self.nodes[k].sensed_busy += 1;
        if self.nodes[k].sensed_busy > 1 {
            return;
        }
        match self.nodes[k].phase {
            Phase::Difs => {
                // DIFS must be one uninterrupted idle period; restart later.
                self.nodes[k].epoch += 1;
                self.nodes[k].phase = Phase::WaitIdle;
            }
            Phase::Backoff { started, remaining } => {
                let left = (remaining - (self.now - started)).max(0.0);
                self.nodes[k].pending_backoff = Some(left);
                self.nodes[k].epoch += 1;
                self.nodes[k].phase = Phase::WaitIdle;
            }
            Phase::Tx => {
                // Unreachable under the idealized switch: a transmitting
                // node would have suppressed us first.
                debug_assert!(false, "suppressed while transmitting");
            }
            Phase::Idle | Phase::WaitIdle => {}
        }
    }

    fn unsuppress(&mut self, k: usize) {
        debug_assert!(self.nodes[k].sensed_busy > 0);
        self.nodes[k].sensed_busy -= 1;
        if self.nodes[k].sensed_busy == 0 && self.nodes[k].phase == Phase::WaitIdle {
            self.nodes[k].phase = Phase::Difs;
            self.nodes[k].epoch += 1;
            let epoch = self.nodes[k].epoch;
            self.push(self.now + self.spec.difs, k, EventKind::DifsEnd { epoch });
        }
    }

    fn on_tx_end(&mut self, i: usize) {
        debug_assert_eq!(self.nodes[i].phase, Phase::Tx);
        let (start, end) = (self.nodes[i].tx_start, self.nodes[i].tx_end);
        let collided = self.nodes[i].tx_collided;
        self.account_airtime(i, start, end);

        let rate_idx = self.nodes[i].tx_rate_idx;
        if let Some(state) = self.nodes[i].rate_state.as_mut() {
            state.record_attempt(rate_idx, !collided);
        }
        if self.spec.rts_cts {
            for k in self.suppression[i].clone() {
                self.unsuppress(k);
            }
        }

        if !collided {
            self.nodes[i].delivered += 1;
            if end > self.spec.warmup {
                self.nodes[i].delivered_window += 1;
                self.series.add_delivery(i, end);
            }
            self.complete_packet(i);
        } else {
            self.nodes[i].collided += 1;
            if self.nodes[i].retry >= self.spec.retry_limit {
                self.nodes[i].dropped += 1;
                self.complete_packet(i);
            } else {
                self.nodes[i].retry += 1;
            }
        }

        if self.nodes[i].queue > 0 {
            self.begin_access(i);
        } else {
            self.nodes[i].phase = Phase::Idle;
        }
    }

    fn complete_packet(&mut self, i: usize) {
        self.nodes[i].queue -= 1;
        self.nodes[i].retry = 1;
        self.nodes[i].chain_ready = false;
    }

    fn account_airtime(&mut self, i: usize, start: f64, end: f64) {
        let w_lo = self.spec.warmup;
        let w_hi = self.spec.duration;
        let overlap = (end.min(w_hi) - start.max(w_lo)).max(0.0);
        self.nodes[i].busy_window += overlap;
        self.series
            .add_airtime(i, start, end.min(w_hi), self.spec.packet_bits());
    }

    fn on_rate_update(&mut self, i: usize) {
        if let Some(state) = self.nodes[i].rate_state.as_mut() {
            state.update();
        }
        self.push(self.now + UPDATE_INTERVAL, i, EventKind::RateUpdate);
    }

    fn on_burst_change(&mut self, i: usize, rate: f64) {
        self.nodes[i].lambda = rate;
        self.nodes[i].arrival_epoch += 1;
        let epoch = self.nodes[i].arrival_epoch;
        if rate > 0.0 {
            let dt = exp_interarrival(&mut self.nodes[i].rng_arrival, rate);
            self.push(self.now + dt, i, EventKind::Arrival { epoch });
        }
    }

    fn finalize(mut self) -> SimResult {
        // Frames still on the air at the horizon contribute their airtime up
        // to it; the packet itself stays queued.
        for i in 0..self.nodes.len() {
            if self.nodes[i].phase == Phase::Tx && self.nodes[i].tx_end > self.spec.duration {
                let (s, e) = (self.nodes[i].tx_start, self.nodes[i].tx_end);
                self.account_airtime(i, s, e.min(self.spec.duration));
            }
        }
        let window = self.spec.duration - self.spec.warmup;
        let bits = self.spec.packet_bits();
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| NodeStats {
                node: i,
                generated: n.generated,
                delivered: n.delivered,
                collided: n.collided,
                dropped: n.dropped,
                queued_at_end: n.queue,
                busy_seconds: n.busy_window,
                utilization: n.busy_window / window,
                delivered_in_window: n.delivered_window,
                throughput_bps: n.delivered_window as f64 * bits / window,
                minstrel_packets: n.minstrel_packets,
                lookaround_packets: n.lookaround_packets,
            })
            .collect();
        SimResult {
            spec: self.spec,
            nodes,
            series: self.series,
        }
    }
}
