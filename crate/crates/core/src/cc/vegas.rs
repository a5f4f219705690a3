//! TCP Vegas: delay-based congestion avoidance inside an [alpha, beta]
//! dead-band on the backlog estimate.

use crate::tcp::{AckEvent, CongestionController, CwndBounds, LossKind, LossSignal, RoundSummary, RttEstimator};

pub struct Vegas {
    cwnd_pkts: f64,
    ssthresh_pkts: f64,
    alpha_pkts: f64,
    beta_pkts: f64,
    /// Last computed throughput difference, in packets of backlog.
    delta_pkts: f64,
    bounds: CwndBounds,
}

impl Vegas {
    pub fn new(alpha_pkts: f64, beta_pkts: f64, bounds: CwndBounds) -> Self {
        assert!(alpha_pkts < beta_pkts, "vegas needs alpha < beta");
        Vegas {
            cwnd_pkts: bounds.min_pkts,
            ssthresh_pkts: bounds.max_pkts,
            alpha_pkts,
            beta_pkts,
            delta_pkts: 0.0,
            bounds,
        }
    }

    pub fn delta_pkts(&self) -> f64 {
        self.delta_pkts
    }

    /// Once-per-round window rule on the expected/actual throughput gap.
    pub fn apply_round(&mut self, acked: u64, round_rtt_s: f64, d_min_s: f64) {
        if !(d_min_s > 0.0) || !d_min_s.is_finite() || !(round_rtt_s > 0.0) {
            return;
        }
        let expected = self.cwnd_pkts / d_min_s;
        let actual = acked as f64 / round_rtt_s;
        self.delta_pkts = (expected - actual) * d_min_s;

        let next = if self.cwnd_pkts < self.ssthresh_pkts {
            // Slow start; the dead-band upper bound ends it early.
            if self.delta_pkts > self.beta_pkts {
                self.ssthresh_pkts = self.cwnd_pkts;
                self.cwnd_pkts - 1.0
            } else {
                self.cwnd_pkts * 2.0
            }
        } else if self.delta_pkts < self.alpha_pkts {
            self.cwnd_pkts + 1.0
        } else if self.delta_pkts > self.beta_pkts {
            self.cwnd_pkts - 1.0
        } else {
            self.cwnd_pkts
        };
        self.cwnd_pkts = self.bounds.clamp(next);
    }
}

impl CongestionController for Vegas {
    fn cwnd_pkts(&self) -> f64 {
        self.cwnd_pkts
    }

    fn on_ack(&mut self, _ev: &AckEvent, _rtt: &RttEstimator) {}

    fn on_loss(&mut self, sig: &LossSignal) {
        self.ssthresh_pkts = (self.cwnd_pkts / 2.0).max(self.bounds.min_pkts);
        self.cwnd_pkts = match sig.kind {
            LossKind::TripleDupack => self.ssthresh_pkts,
            LossKind::Timeout => self.bounds.clamp(1.0),
        };
    }

    fn on_round_end(&mut self, round: &RoundSummary) {
        self.apply_round(round.acked_pkts, round.duration_s, round.d_min_s);
    }

    fn name(&self) -> &'static str {
        "vegas"
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

    fn vegas_at(cwnd: f64) -> Vegas {
        let mut v = Vegas::new(1.0, 3.0, CwndBounds::new(10_000.0));
        v.cwnd_pkts = cwnd;
        v.ssthresh_pkts = cwnd; // in congestion avoidance
        v
    }

    #[test]
    fn grows_below_alpha() {
        let mut v = vegas_at(10.0);
        // delta = (10/0.1 - 95/1.0) * 0.1 = 0.5 < alpha
        v.apply_round(95, 1.0, 0.1);
        assert!((v.delta_pkts() - 0.5).abs() < 1e-12);
        assert_eq!(v.cwnd_pkts(), 11.0);
    }

    #[test]
    fn shrinks_above_beta() {
        let mut v = vegas_at(10.0);
        // delta = (100 - 50) * 0.1 = 5 > beta
        v.apply_round(50, 1.0, 0.1);
        assert!((v.delta_pkts() - 5.0).abs() < 1e-12);
        assert_eq!(v.cwnd_pkts(), 9.0);
    }

    #[test]
    fn holds_inside_dead_band() {
        let mut v = vegas_at(10.0);
        // delta = (100 - 80) * 0.1 = 2, inside [1, 3]
        v.apply_round(80, 1.0, 0.1);
        assert!((v.delta_pkts() - 2.0).abs() < 1e-12);
        assert_eq!(v.cwnd_pkts(), 10.0);
    }

    #[test]
    fn stationary_delay_settles_in_band() {
        // Fixed path: d_min 0.1s, capacity 100 pkts/round, queuing delay
        // grows linearly with backlog. The window must stop oscillating by
        // more than 1 packet per round once inside the band.
        let mut v = vegas_at(5.0);
        let d_min = 0.1;
        let capacity_pps = 100.0;
        let mut last = v.cwnd_pkts();
        let mut stable_rounds = 0;
        for _ in 0..200 {
            let backlog = (v.cwnd_pkts() - d_min * capacity_pps).max(0.0);
            let rtt = d_min + backlog / capacity_pps;
            let acked = (v.cwnd_pkts() * d_min / rtt).round() as u64;
            v.apply_round(acked, rtt, d_min);
            if (v.cwnd_pkts() - last).abs() <= 1.0 {
                stable_rounds += 1;
            } else {
                stable_rounds = 0;
            }
            last = v.cwnd_pkts();
        }
        assert!(stable_rounds > 50, "vegas failed to settle");
        let backlog = v.cwnd_pkts() - d_min * capacity_pps;
        assert!(
            (0.0..=4.0).contains(&backlog),
            "backlog {backlog} strayed from the dead-band"
        );
    }
}
