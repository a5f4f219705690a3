//! Measurement and post-processing over completed traces: throughput
//! series, utilization, Jain's fairness index and queue statistics.
//!
//! Everything here is a pure function of recorded data; traces from
//! independent runs can be evaluated in parallel.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::sim::packet::FlowId;
use crate::sim::time::SimTime;

/// Point sample of per-flow sender state, taken at the sampling cadence.
#[derive(Debug, Clone, Copy)]
pub struct StateSample {
    pub t_s: f64,
    pub cwnd_pkts: f64,
    pub srtt_s: f64,
    pub phase: &'static str,
}

/// Per-flow record of a run: a timestamped delivery log plus sampled
/// sender state. Timestamps are non-decreasing by construction.
#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub flow: FlowId,
    pub cc_name: String,
    pub duration_s: f64,
    /// (arrival time in ns, bytes) for every data packet reaching the sink.
    pub deliveries: Vec<(u64, u32)>,
    pub samples: Vec<StateSample>,
}

impl FlowTrace {
    pub fn new(flow: FlowId, cc_name: String) -> Self {
        FlowTrace {
            flow,
            cc_name,
            duration_s: 0.0,
            deliveries: Vec::new(),
            samples: Vec::new(),
        }
    }

    pub fn delivered_bytes(&self) -> u64 {
        self.deliveries.iter().map(|(_, b)| *b as u64).sum()
    }
}

/// Tumbling-window throughput: bits delivered per window over the window,
/// sampled at window boundaries. An empty trace yields an empty series.
pub fn throughput_series(trace: &FlowTrace, window_s: f64) -> Vec<(f64, f64)> {
    assert!(window_s > 0.0, "window must be positive");
    if trace.deliveries.is_empty() {
        return Vec::new();
    }
    let window_ns = (window_s * 1e9).round() as u64;
    let last_ns = trace
        .deliveries
        .last()
        .map(|(t, _)| *t)
        .max(Some((trace.duration_s * 1e9) as u64))
        .unwrap();
    let n_windows = (last_ns.div_ceil(window_ns) as usize).max(1);
    let mut bits = vec![0u64; n_windows];
    for (t, bytes) in &trace.deliveries {
        let idx = ((*t / window_ns) as usize).min(n_windows - 1);
        bits[idx] += *bytes as u64 * 8;
    }
    bits.iter()
        .enumerate()
        .map(|(i, b)| ((i as f64 + 1.0) * window_s, *b as f64 / window_s))
        .collect()
}

/// Mean delivered throughput in bps over (warmup, duration].
pub fn mean_throughput_bps(trace: &FlowTrace, warmup_s: f64) -> f64 {
    let span = trace.duration_s - warmup_s;
    if span <= 0.0 {
        return 0.0;
    }
    let warmup_ns = (warmup_s * 1e9).round() as u64;
    let bits: u64 = trace
        .deliveries
        .iter()
        .filter(|(t, _)| *t > warmup_ns)
        .map(|(_, b)| *b as u64 * 8)
        .sum();
    bits as f64 / span
}

/// Fraction of bottleneck capacity used by the given flow throughputs,
/// clamped to [0, 1].
pub fn utilization(flow_throughputs_bps: &[f64], capacity_bps: f64) -> f64 {
    assert!(capacity_bps > 0.0, "capacity must be positive");
    (flow_throughputs_bps.iter().sum::<f64>() / capacity_bps).clamp(0.0, 1.0)
}

/// Jain's fairness index over per-flow average throughputs:
/// (sum x)^2 / (n * sum x^2). All-zero input is undefined.
pub fn jain_fi(throughputs: &[f64]) -> Result<f64> {
    if throughputs.is_empty() {
        return Err(SimError::UndefinedFairness);
    }
    debug_assert!(throughputs.iter().all(|x| *x >= 0.0));
    let sum: f64 = throughputs.iter().sum();
    let sum_sq: f64 = throughputs.iter().map(|x| x * x).sum();
    if sum_sq == 0.0 {
        return Err(SimError::UndefinedFairness);
    }
    Ok(sum * sum / (throughputs.len() as f64 * sum_sq))
}

/// Time-weighted mean queue occupancy from the accumulated integral.
pub fn avg_queue_size(occ_integral_pkt_ns: u128, duration: SimTime) -> Result<f64> {
    if duration.as_nanos() == 0 {
        return Err(SimError::InvalidState(
            "average queue size over an empty run".into(),
        ));
    }
    Ok(occ_integral_pkt_ns as f64 / duration.as_nanos() as f64)
}

/// Per-flow slice of an experiment report.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FlowReport {
    pub flow_id: usize,
    pub cc: String,
    pub start_s: f64,
    /// Mean delivered throughput after warm-up, bps.
    pub throughput_bps: f64,
    pub delivered_pkts: u64,
    pub delivered_bytes: u64,
    pub queue_drops: u64,
    pub random_drops: u64,
    pub retransmits: u64,
}

/// Declarative result of one experiment run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentReport {
    pub scenario: String,
    pub seed: u64,
    pub duration_s: f64,
    pub warmup_s: f64,
    pub config_sha256: String,
    pub bottleneck_bps: f64,
    pub flows: Vec<FlowReport>,
    pub aggregate_throughput_bps: f64,
    /// Aggregate throughput over capacity, in [0, 1].
    pub utilization: f64,
    /// Jain's fairness index over per-flow throughputs, in (0, 1].
    pub jain_fi: f64,
    pub avg_queue_pkts: f64,
    pub bottleneck_queue_drops: u64,
    pub random_drops: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trace_with(deliveries: Vec<(u64, u32)>, duration_s: f64) -> FlowTrace {
        FlowTrace {
            flow: 0,
            cc_name: "test".into(),
            duration_s,
            deliveries,
            samples: Vec::new(),
        }
    }

    #[test]
    fn constant_rate_series_is_flat() {
        // 1000 B every 1 ms for 3 s = 8 Mbps in every 1 s window.
        let deliveries: Vec<(u64, u32)> = (0..3000)
            .map(|i| (i as u64 * 1_000_000 + 1, 1000u32))
            .collect();
        let series = throughput_series(&trace_with(deliveries, 3.0), 1.0);
        assert_eq!(series.len(), 3);
        for (_, bps) in series {
            assert!((bps - 8e6).abs() < 1e-6, "bps = {bps}");
        }
    }

    #[test]
    fn empty_trace_empty_series() {
        assert!(throughput_series(&trace_with(vec![], 5.0), 1.0).is_empty());
    }

    #[test]
    fn single_packet_single_sample() {
        let series = throughput_series(&trace_with(vec![(500_000_000, 1000)], 1.0), 1.0);
        assert_eq!(series.len(), 1);
        assert!((series[0].1 - 8000.0).abs() < 1e-9);
    }

    #[test]
    fn utilization_worked_values() {
        // 187,000 kbps of 200,000 kbps reported as 94% in round figures.
        let u = utilization(&[187_000_000.0], 200_000_000.0);
        assert!((u - 0.935).abs() < 1e-12);
        assert_eq!(utilization(&[0.0, 0.0], 1e6), 0.0);
        assert_eq!(utilization(&[5e5, 5e5], 1e6), 1.0);
    }

    #[test]
    fn jain_fi_worked_values() {
        let fi = jain_fi(&[65_000.0, 62_000.0, 66_000.0]).unwrap();
        assert!((fi - 0.99930).abs() < 1e-4, "fi = {fi}");
        assert!((jain_fi(&[5.0, 5.0, 5.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((jain_fi(&[7.0, 0.0, 0.0]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(jain_fi(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn avg_queue_from_integral() {
        // Occupancy 10 the whole run.
        let avg = avg_queue_size(10 * 1_000_000_000, SimTime::from_secs_f64(1.0)).unwrap();
        assert!((avg - 10.0).abs() < 1e-12);
        // 0 for half, 20 for half.
        let avg = avg_queue_size(20 * 500_000_000, SimTime::from_secs_f64(1.0)).unwrap();
        assert!((avg - 10.0).abs() < 1e-12);
        assert!(avg_queue_size(5, SimTime::ZERO).is_err());
    }

    #[test]
    fn mean_throughput_excludes_warmup() {
        // Nothing in the first second, then 1000 B at 1.5 s.
        let trace = trace_with(vec![(1_500_000_000, 1000)], 2.0);
        let m = mean_throughput_bps(&trace, 1.0);
        assert!((m - 8000.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn jain_bounds_and_scale_invariance(
            xs in proptest::collection::vec(0.0f64..1e6, 1..20),
            c in 0.001f64..1000.0,
        ) {
            prop_assume!(xs.iter().any(|x| *x > 0.0));
            let fi = jain_fi(&xs).unwrap();
            let n = xs.len() as f64;
            prop_assert!(fi >= 1.0 / n - 1e-9 && fi <= 1.0 + 1e-9);
            let scaled: Vec<f64> = xs.iter().map(|x| c * x).collect();
            prop_assert!((jain_fi(&scaled).unwrap() - fi).abs() < 1e-9);
        }

        #[test]
        fn jain_matches_brute_force(
            xs in proptest::collection::vec(0.0f64..1e6, 1..20),
        ) {
            prop_assume!(xs.iter().any(|x| *x > 0.0));
            let fi = jain_fi(&xs).unwrap();
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for x in &xs {
                sum += x;
                sumsq += x * x;
            }
            let brute = (sum * sum) / (xs.len() as f64 * sumsq);
            prop_assert!((fi - brute).abs() < 1e-12);
        }
    }
}
