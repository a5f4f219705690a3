//! HighSpeed TCP: the increase step a(w) and decrease fraction b(w) follow
//! a convex response to the current window, interpolated from the standard
//! published table. Below the low-window cutoff the response is plain Reno.

use crate::tcp::{AckEvent, CongestionController, CwndBounds, LossKind, LossSignal, RoundSummary, RttEstimator};

/// Windows at or below this behave like standard TCP.
pub const LOW_WINDOW_PKTS: f64 = 38.0;

/// 17-point (w, a(w), b(w)) response table; a in packets per round, b as the
/// multiplicative decrease fraction. Interpolation is linear in ln(w).
pub const RESPONSE_TABLE: [(f64, f64, f64); 17] = [
    (38.0, 1.0, 0.50),
    (118.0, 2.0, 0.44),
    (221.0, 3.0, 0.41),
    (347.0, 4.0, 0.38),
    (495.0, 5.0, 0.37),
    (663.0, 6.0, 0.35),
    (851.0, 7.0, 0.34),
    (1058.0, 8.0, 0.33),
    (1284.0, 9.0, 0.32),
    (1529.0, 10.0, 0.31),
    (2076.0, 12.0, 0.29),
    (3039.0, 15.0, 0.27),
    (4596.0, 19.0, 0.25),
    (7009.0, 24.0, 0.23),
    (12082.0, 32.0, 0.20),
    (30975.0, 50.0, 0.15),
    (84035.0, 71.0, 0.10),
];

/// Increase/decrease parameters for window `w`.
pub fn hstcp_params(w_pkts: f64) -> (f64, f64) {
    debug_assert!(w_pkts >= 1.0);
    if w_pkts <= LOW_WINDOW_PKTS {
        return (1.0, 0.5);
    }
    let last = RESPONSE_TABLE[RESPONSE_TABLE.len() - 1];
    if w_pkts >= last.0 {
        return (last.1, last.2);
    }
    let idx = RESPONSE_TABLE
        .windows(2)
        .position(|pair| w_pkts < pair[1].0)
        .expect("w below table end");
    let (w0, a0, b0) = RESPONSE_TABLE[idx];
    let (w1, a1, b1) = RESPONSE_TABLE[idx + 1];
    let t = (w_pkts.ln() - w0.ln()) / (w1.ln() - w0.ln());
    (a0 + t * (a1 - a0), b0 + t * (b1 - b0))
}

pub struct Hstcp {
    cwnd_pkts: f64,
    ssthresh_pkts: f64,
    bounds: CwndBounds,
}

impl Hstcp {
    pub fn new(bounds: CwndBounds) -> Self {
        Hstcp {
            cwnd_pkts: bounds.min_pkts,
            ssthresh_pkts: bounds.max_pkts,
            bounds,
        }
    }
}

impl CongestionController for Hstcp {
    fn cwnd_pkts(&self) -> f64 {
        self.cwnd_pkts
    }

    fn on_ack(&mut self, ev: &AckEvent, _rtt: &RttEstimator) {
        if ev.newly_acked_pkts == 0 {
            return;
        }
        let acked = ev.newly_acked_pkts as f64;
        let next = if self.cwnd_pkts < self.ssthresh_pkts {
            self.cwnd_pkts + acked
        } else {
            let (a, _) = hstcp_params(self.cwnd_pkts);
            self.cwnd_pkts + a * acked / self.cwnd_pkts
        };
        self.cwnd_pkts = self.bounds.clamp(next);
    }

    fn on_loss(&mut self, sig: &LossSignal) {
        let (_, b) = hstcp_params(self.cwnd_pkts);
        self.ssthresh_pkts = (self.cwnd_pkts * (1.0 - b)).max(self.bounds.min_pkts);
        self.cwnd_pkts = match sig.kind {
            LossKind::TripleDupack => self.ssthresh_pkts,
            LossKind::Timeout => self.bounds.clamp(1.0),
        };
    }

    fn on_round_end(&mut self, _round: &RoundSummary) {}

    fn name(&self) -> &'static str {
        "hstcp"
    }

    fn phase_name(&self) -> &'static str {
        if self.cwnd_pkts < self.ssthresh_pkts {
            "slow-start"
        } else {
            "congestion-avoidance"
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_window_regime_is_reno() {
        assert_eq!(hstcp_params(10.0), (1.0, 0.5));
        assert_eq!(hstcp_params(38.0), (1.0, 0.5));
    }

    #[test]
    fn high_window_is_more_aggressive() {
        let (a, b) = hstcp_params(1e4);
        assert!(a > 1.0, "a = {a}");
        assert!(b < 0.5, "b = {b}");
    }

    #[test]
    fn table_anchor_points_are_exact() {
        let (a, b) = hstcp_params(1529.0);
        assert!((a - 10.0).abs() < 1e-9);
        assert!((b - 0.31).abs() < 1e-9);
    }

    #[test]
    fn response_is_monotone() {
        let mut prev = hstcp_params(1.0);
        let mut w = 1.0f64;
        while w < 2e5 {
            let cur = hstcp_params(w);
            assert!(cur.0 >= prev.0 - 1e-12, "a not increasing at w={w}");
            assert!(cur.1 <= prev.1 + 1e-12, "b not decreasing at w={w}");
            prev = cur;
            w *= 1.07;
        }
        // The decrease fraction tails off toward 0.1.
        assert!((hstcp_params(1e6).1 - 0.10).abs() < 1e-9);
    }

    #[test]
    fn loss_applies_table_decrease() {
        let mut h = Hstcp::new(CwndBounds::new(1e6));
        h.cwnd_pkts = 12082.0;
        h.ssthresh_pkts = 100.0;
        h.on_loss(&LossSignal {
            kind: LossKind::TripleDupack,
            delay_at_loss_s: 0.1,
        });
        assert!((h.cwnd_pkts() - 12082.0 * 0.8).abs() < 1e-6);
    }
}
