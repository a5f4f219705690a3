//! Packet-level discrete-event simulator for TCP congestion control
//! experiments on a dumbbell topology.
//!
//! The crate is organised around a small set of subsystems:
//!
//! - [`sim`]: the event engine, links, drop-tail queues, a seeded Bernoulli
//!   loss model and the dumbbell topology builder.
//! - [`tcp`]: per-flow reliable-transfer machinery (sequencing, RTT/RTO,
//!   duplicate-ACK and timeout loss detection) behind a pluggable
//!   congestion-controller trait.
//! - [`bayes`]: online probabilistic delay/loss estimation over per-round
//!   observations with a sliding-window likelihood table.
//! - [`cc`]: the PHCC controller plus Reno, Vegas and HSTCP baselines.
//! - [`metrics`]: throughput series, utilization, Jain's fairness index and
//!   queue statistics computed from completed traces.
//!
//! A simulation instance is single-threaded and owns all of its state;
//! independent instances can run concurrently without sharing anything.

pub mod bayes;
pub mod cc;
pub mod error;
pub mod metrics;
pub mod sim;
pub mod tcp;

pub use error::SimError;
pub use sim::engine::{Engine, EngineConfig, FlowSetup, RunStats};
pub use sim::time::SimTime;
pub use sim::topology::{Topology, TopologyConfig};
