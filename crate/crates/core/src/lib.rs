//! Deterministic simulator for phase-synchronisation consensus.
//!
//! Nodes on a Watts-Strogatz small-world graph carry noisy Kuramoto phase
//! oscillators. A node commits once the order parameter of its neighbourhood
//! crosses a binding threshold, voting with the values it received that round
//! and dealing Shamir shares of the committed digest through a
//! coherence-dependent bit-flip channel.
//!
//! | module | contents |
//! |---|---|
//! | [`params`] | [`OrchidParams`], validation, critical coupling |
//! | [`topology`] | small-world graph generation |
//! | [`oscillator`] | phase update, order parameters, binding entropy |
//! | [`qss`] | prime-field secret sharing, decoherence, fidelity scans |
//! | [`consensus`] | the node state machine and full runs |
//! | [`experiments`] | sweeps, baselines, summary table |
//! | [`output`] | CSV writers and run manifests |
//! | [`cli`] | the `orchid` command |
//!
//! Runnable walkthroughs for each capability live in `examples/`:
//!
//! ```bash
//! cargo run --release --example oscillate
//! cargo run --release --example qss_threshold
//! ```
//!
//! Every stochastic entry point takes an explicit seed and derives
//! independent substreams from it, so results are reproducible and do not
//! depend on thread count.

pub mod cli;
pub mod consensus;
pub mod error;
pub mod experiments;
pub mod oscillator;
pub mod output;
pub mod params;
pub mod qss;
pub mod rng;
pub mod stats;
pub mod topology;

pub use error::{OrchidError, Result};
pub use params::OrchidParams;
