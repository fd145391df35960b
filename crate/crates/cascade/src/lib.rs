//! Laboratory for cascading congestion in chains of hidden-node Wi-Fi pairs.
//!
//! A chain of transmitter/receiver pairs in which each transmitter is a
//! hidden node with respect to the next one couples the pairs together:
//! retransmissions triggered at one node inflate the channel occupancy seen
//! by the next, which can push the whole chain into a congestion collapse
//! once a single node (the attacker) offers enough traffic.
//!
//! The crate has four parts:
//!
//! * [`analytic`] — the stylized dynamical-system model of the chain: the
//!   collision-probability map, the node-to-node utilization iteration, fixed
//!   points of the iteration, their stability, and the resulting regime
//!   classification (always uncongested, always congested, or a phase
//!   transition in between) with explicit bounds on the transition region.
//! * [`sim`] — a deterministic discrete-event simulator of linear and ring
//!   chains with Poisson traffic, 802.11-style DIFS/backoff/retry MAC,
//!   an optional idealized RTS/CTS switch, and an optional simplified
//!   Minstrel rate-adaptation policy.
//! * [`oracle`] — independent Monte-Carlo and brute-force oracles that
//!   validate the closed forms in [`analytic`] under the model's own
//!   assumptions. They deliberately share no arithmetic code with the
//!   implementations they check.
//! * [`runner`] — scenario-file parsing, CSV emission, run manifests with
//!   checksums, and the canned experiment presets behind the `cascade`
//!   command-line tool.
//!
//! The `examples/` directory is the guided tour: one runnable example per
//! capability (`cargo run --release -p cascade --example fixed_points`, and
//! so on). The thin `cascade` binary exposes the same machinery as
//! `analyze`, `sweep`, `simulate`, `validate`, and `reproduce` subcommands.

pub mod analytic;
pub mod oracle;
pub mod runner;
pub mod sim;
