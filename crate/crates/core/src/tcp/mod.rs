//! Per-flow reliable-transfer machinery: sequence/ACK bookkeeping, RTT and
//! RTO estimation, duplicate-ACK and timeout loss detection, and the
//! congestion-controller contract shared by PHCC and the baselines.

pub mod connection;
pub mod controller;
pub mod rtt;

pub use connection::{AckReaction, Connection, TimerReaction};
pub use controller::{AckEvent, CongestionController, CwndBounds, LossKind, LossSignal, RoundSummary};
pub use rtt::RttEstimator;
