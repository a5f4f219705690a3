//! TCP Reno: slow start plus AIMD congestion avoidance.

use crate::tcp::{AckEvent, CongestionController, CwndBounds, LossKind, LossSignal, RoundSummary, RttEstimator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    SlowStart,
    CongestionAvoidance,
}

pub struct Reno {
    cwnd_pkts: f64,
    ssthresh_pkts: f64,
    bounds: CwndBounds,
}

impl Reno {
    pub fn new(bounds: CwndBounds) -> Self {
        Reno {
            cwnd_pkts: bounds.min_pkts,
            // Slow start runs until the first loss.
            ssthresh_pkts: bounds.max_pkts,
            bounds,
        }
    }

    fn mode(&self) -> Mode {
        if self.cwnd_pkts < self.ssthresh_pkts {
            Mode::SlowStart
        } else {
            Mode::CongestionAvoidance
        }
    }
}

impl CongestionController for Reno {
    fn cwnd_pkts(&self) -> f64 {
        self.cwnd_pkts
    }

    fn on_ack(&mut self, ev: &AckEvent, _rtt: &RttEstimator) {
        if ev.newly_acked_pkts == 0 {
            return;
        }
        let acked = ev.newly_acked_pkts as f64;
        let next = match self.mode() {
            Mode::SlowStart => self.cwnd_pkts + acked,
            Mode::CongestionAvoidance => self.cwnd_pkts + acked / self.cwnd_pkts,
        };
        self.cwnd_pkts = self.bounds.clamp(next);
    }

    fn on_loss(&mut self, sig: &LossSignal) {
        self.ssthresh_pkts = (self.cwnd_pkts / 2.0).max(self.bounds.min_pkts);
        self.cwnd_pkts = match sig.kind {
            LossKind::TripleDupack => self.ssthresh_pkts,
            // Timeout restarts from one packet (clamped to the floor).
            LossKind::Timeout => self.bounds.clamp(1.0),
        };
    }

    fn on_round_end(&mut self, _round: &RoundSummary) {}

    fn name(&self) -> &'static str {
        "reno"
    }

    fn phase_name(&self) -> &'static str {
        match self.mode() {
            Mode::SlowStart => "slow-start",
            Mode::CongestionAvoidance => "congestion-avoidance",
        }
    }
}
