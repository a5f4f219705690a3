use crate::error::{Result, SimError};

/// Default RTO before any sample has been taken.
pub const INITIAL_RTO_S: f64 = 1.0;
/// RTO floor: retransmission never fires faster than this.
pub const RTO_FLOOR_S: f64 = 0.2;
/// RTO cap applied both to the estimate and to exponential backoff.
pub const RTO_CAP_S: f64 = 60.0;

/// Classic SRTT/RTTVAR estimator (gains 1/8 and 1/4) with a monotone
/// minimum-RTT tracker.
#[derive(Debug, Clone)]
pub struct RttEstimator {
    srtt_s: f64,
    rttvar_s: f64,
    rto_s: f64,
    d_min_s: f64,
    last_sample_s: f64,
    floor_s: f64,
    cap_s: f64,
    has_sample: bool,
}

impl Default for RttEstimator {
    fn default() -> Self {
        RttEstimator::new(RTO_FLOOR_S, RTO_CAP_S)
    }
}

impl RttEstimator {
    pub fn new(floor_s: f64, cap_s: f64) -> Self {
        RttEstimator {
            srtt_s: 0.0,
            rttvar_s: 0.0,
            rto_s: INITIAL_RTO_S,
            d_min_s: f64::INFINITY,
            last_sample_s: 0.0,
            floor_s,
            cap_s,
            has_sample: false,
        }
    }

    /// Feeds one RTT sample. Retransmitted packets must never be sampled
    /// (Karn's rule); enforcing that is the caller's job.
    pub fn update(&mut self, sample_s: f64) -> Result<()> {
        if sample_s <= 0.0 {
            return Err(SimError::Internal(format!(
                "non-positive rtt sample: {sample_s}"
            )));
        }
        if self.has_sample {
            // RTTVAR uses the previous SRTT.
            self.rttvar_s = 0.75 * self.rttvar_s + 0.25 * (self.srtt_s - sample_s).abs();
            self.srtt_s = 0.875 * self.srtt_s + 0.125 * sample_s;
        } else {
            self.srtt_s = sample_s;
            self.rttvar_s = sample_s / 2.0;
            self.has_sample = true;
        }
        self.rto_s = (self.srtt_s + 4.0 * self.rttvar_s)
            .max(self.floor_s)
            .min(self.cap_s);
        self.d_min_s = self.d_min_s.min(sample_s);
        self.last_sample_s = sample_s;
        Ok(())
    }

    /// Doubles the RTO after a timeout, up to the cap.
    pub fn backoff(&mut self) {
        self.rto_s = (self.rto_s * 2.0).min(self.cap_s);
    }

    pub fn srtt_s(&self) -> f64 {
        self.srtt_s
    }

    pub fn rttvar_s(&self) -> f64 {
        self.rttvar_s
    }

    pub fn rto_s(&self) -> f64 {
        self.rto_s
    }

    /// Minimum observed RTT; only ever decreases. Infinite until the first
    /// sample arrives.
    pub fn d_min_s(&self) -> f64 {
        self.d_min_s
    }

    pub fn last_sample_s(&self) -> f64 {
        self.last_sample_s
    }

    pub fn has_sample(&self) -> bool {
        self.has_sample
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_sample_initializes_estimator() {
        let mut est = RttEstimator::default();
        est.update(0.1).unwrap();
        assert_eq!(est.srtt_s(), 0.1);
        assert_eq!(est.rttvar_s(), 0.05);
        assert!((est.rto_s() - 0.3).abs() < 1e-12);
        assert_eq!(est.d_min_s(), 0.1);
    }

    #[test]
    fn repeated_samples_are_a_fixed_point_for_srtt() {
        let mut est = RttEstimator::default();
        for _ in 0..100 {
            est.update(0.1).unwrap();
        }
        assert!((est.srtt_s() - 0.1).abs() < 1e-12);
        assert!(est.rttvar_s() < 1e-10, "rttvar should decay toward zero");
        assert_eq!(est.rto_s(), RTO_FLOOR_S, "floor applies once variance dies");
    }

    #[test]
    fn d_min_is_monotone() {
        let mut est = RttEstimator::default();
        est.update(0.05).unwrap();
        est.update(0.04).unwrap();
        assert_eq!(est.d_min_s(), 0.04);
        est.update(0.06).unwrap();
        assert_eq!(est.d_min_s(), 0.04);
    }

    #[test]
    fn backoff_doubles_and_caps() {
        let mut est = RttEstimator::default();
        est.update(0.1).unwrap();
        let r0 = est.rto_s();
        est.backoff();
        assert_eq!(est.rto_s(), r0 * 2.0);
        for _ in 0..20 {
            est.backoff();
        }
        assert_eq!(est.rto_s(), RTO_CAP_S);
    }

    #[test]
    fn rejects_non_positive_samples() {
        let mut est = RttEstimator::default();
        assert!(est.update(0.0).is_err());
        assert!(est.update(-0.1).is_err());
    }
}
