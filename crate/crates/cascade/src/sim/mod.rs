//! Deterministic discrete-event simulator of hidden-node chains.
//!
//! The simulated network is a row (or ring) of transmitter/receiver pairs.
//! Each transmitter runs a reduced 802.11 MAC: Poisson packet arrivals into
//! an unbounded FIFO queue, DIFS plus a uniform backoff drawn from the
//! doubling contention window before every attempt, a retry limit, and a
//! binary capture-free collision rule (a reception fails if any hidden
//! interferer transmits during any part of the frame). ACKs occupy no
//! airtime; success is decided at data-frame end. Optional extras are an
//! idealized RTS/CTS switch (adjacent transmitters simply never overlap) and
//! a simplified Minstrel rate policy over the 802.11b ladder.
//!
//! A single run is strictly single-threaded over one event queue and is a
//! pure function of its [`ScenarioSpec`], seed included: identical specs
//! give bit-identical statistics. Sweeps fan independent runs out across
//! threads.
//!
//! Simultaneous events are ordered by (time, node index, event-kind rank,
//! insertion order), so ties cannot introduce nondeterminism.

mod engine;
mod minstrel;
mod rng;
mod scenario;
mod stats;
mod stylized;
mod sweep;
mod topology;

pub use engine::{contention_window, run_simulation};
pub use minstrel::{
    select_retry_chain, stage_allocation, stage_of_attempt, RateState, RateStats, EWMA_WEIGHT,
    LOOKAROUND_FRACTION, MINSTREL_RATES_BPS, UPDATE_INTERVAL, USABLE_PROB_FLOOR,
};
pub use scenario::{AttackerBurst, LoadModel, RatePolicy, ScenarioSpec, TopologyKind};
pub use stats::{Bucket, NodeStats, SimResult, TimeSeries};
pub use stylized::run_stylized;
pub use sweep::{sweep_attacker_load, sweep_node_load, NodeLoadPoint, SweepPoint};
pub use topology::{build_topology, Topology};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error("invalid scenario: {field}: {message}")]
    InvalidSpec { field: &'static str, message: String },

    #[error("unsupported scenario: {0}")]
    Unsupported(&'static str),
}

impl SimError {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        SimError::InvalidSpec {
            field,
            message: message.into(),
        }
    }
}
