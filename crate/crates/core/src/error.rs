use thiserror::Error;

/// Errors produced by the simulator and its components.
#[derive(Debug, Error)]
pub enum SimError {
    /// Rejected configuration (zero bandwidth, empty buffer, bad ranges...).
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Bug guard: an internal contract was violated (e.g. an event scheduled
    /// in the past or a non-positive RTT sample).
    #[error("internal error: {0}")]
    Internal(String),

    /// Estimator asked to operate on degenerate state (e.g. rto <= d_min).
    #[error("invalid estimator state: {0}")]
    InvalidEstimatorState(String),

    /// A round summary was requested for a round with no packets sent.
    #[error("empty round: no packets sent")]
    EmptyRound,

    /// Controller math hit a zero denominator that has no guarded fallback.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Jain's fairness index is undefined when every throughput is zero.
    #[error("undefined fairness index: all throughputs are zero")]
    UndefinedFairness,
}

pub type Result<T> = std::result::Result<T, SimError>;
