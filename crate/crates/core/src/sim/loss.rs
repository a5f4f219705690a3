/// splitmix64: the RNG behind the Bernoulli loss model.
///
/// The algorithm is fixed here (rather than borrowed from a crate) so the
/// drop sequence for a given seed never changes underneath a scenario.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Independent Bernoulli drops for forward data packets. ACKs are never
/// randomly dropped: loss on the reverse path would confound RTT sampling.
#[derive(Debug, Clone)]
pub struct LossModel {
    drop_prob: f64,
    rng: SplitMix64,
}

impl LossModel {
    pub fn new(drop_prob: f64, seed: u64) -> Self {
        assert!(
            (0.0..=1.0).contains(&drop_prob),
            "drop probability must be in [0, 1]"
        );
        LossModel {
            drop_prob,
            rng: SplitMix64::new(seed),
        }
    }

    pub fn drop_prob(&self) -> f64 {
        self.drop_prob
    }

    /// One Bernoulli draw per data packet; deterministic under the seed.
    pub fn should_drop(&mut self) -> bool {
        if self.drop_prob <= 0.0 {
            return false;
        }
        if self.drop_prob >= 1.0 {
            return true;
        }
        self.rng.next_f64() < self.drop_prob
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_probabilities() {
        let mut keep_all = LossModel::new(0.0, 7);
        let mut drop_all = LossModel::new(1.0, 7);
        for _ in 0..1000 {
            assert!(!keep_all.should_drop());
            assert!(drop_all.should_drop());
        }
    }

    #[test]
    fn same_seed_same_sequence() {
        let mut a = LossModel::new(0.3, 42);
        let mut b = LossModel::new(0.3, 42);
        for _ in 0..10_000 {
            assert_eq!(a.should_drop(), b.should_drop());
        }
    }

    #[test]
    fn empirical_rate_close_to_nominal() {
        // Monte Carlo check: 1e6 draws at p = 0.01 lands within +/-10% relative.
        let mut model = LossModel::new(0.01, 12345);
        let n = 1_000_000u64;
        let drops = (0..n).filter(|_| model.should_drop()).count() as f64;
        let rate = drops / n as f64;
        assert!(
            (0.009..=0.011).contains(&rate),
            "empirical rate {rate} outside [0.009, 0.011]"
        );
    }
}
