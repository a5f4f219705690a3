use super::rtt::RttEstimator;

/// Smallest window any controller may hold.
pub const CWND_MIN_PKTS: f64 = 2.0;

/// Window bounds enforced by every controller after every hook.
#[derive(Debug, Clone, Copy)]
pub struct CwndBounds {
    pub min_pkts: f64,
    pub max_pkts: f64,
}

impl CwndBounds {
    pub fn new(max_pkts: f64) -> Self {
        CwndBounds {
            min_pkts: CWND_MIN_PKTS,
            max_pkts: max_pkts.max(CWND_MIN_PKTS),
        }
    }

    pub fn clamp(&self, cwnd: f64) -> f64 {
        cwnd.max(self.min_pkts).min(self.max_pkts)
    }
}

/// Outcome of processing one ACK at the sender.
#[derive(Debug, Clone, Copy)]
pub struct AckEvent {
    pub newly_acked_pkts: u64,
    /// Present when the ACK echoes a timed (non-retransmitted) packet.
    pub rtt_sample_s: Option<f64>,
    pub is_dupack: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    TripleDupack,
    Timeout,
}

/// A detected loss, fixed at creation.
#[derive(Debug, Clone, Copy)]
pub struct LossSignal {
    pub kind: LossKind,
    /// Most recent RTT sample at detection time.
    pub delay_at_loss_s: f64,
    /// Outstanding packets (next_seq - lastack) at detection time.
    pub inflight_pkts: u64,
}

/// Aggregate view of one RTT round, handed to controllers at round
/// boundaries.
#[derive(Debug, Clone, Copy)]
pub struct RoundSummary {
    pub acked_pkts: u64,
    pub sent_pkts: u64,
    pub lost_pkts: u64,
    /// Wall-clock span of the round; approximately one RTT when ack-clocked.
    pub duration_s: f64,
    /// Outstanding packets (next_seq - lastack) at the boundary.
    pub inflight_pkts: u64,
    /// True while loss recovery is still filling holes; controllers should
    /// not grow the window off a half-recovered round.
    pub in_recovery: bool,
    pub srtt_s: f64,
    pub last_rtt_s: f64,
    pub d_min_s: f64,
    pub rto_s: f64,
}

/// Behavioral contract between the transfer machinery and a congestion
/// controller. One instance per flow, single-threaded ownership.
pub trait CongestionController {
    /// Current window in packets; release quantization is floor().
    fn cwnd_pkts(&self) -> f64;

    fn on_ack(&mut self, ev: &AckEvent, rtt: &RttEstimator);

    fn on_loss(&mut self, sig: &LossSignal);

    fn on_round_end(&mut self, round: &RoundSummary);

    /// Controller name as used in scenario files ("phcc", "reno", ...).
    fn name(&self) -> &'static str;

    /// Current phase or mode, for trace output.
    fn phase_name(&self) -> &'static str;
}
