//! PHCC: probabilistic hybrid congestion control.
//!
//! The controller combines a delay-based target window and a loss-reference
//! window, each discounted by an online probability estimate, and averages
//! the two into the next congestion window. A three-phase machine (light /
//! congestion / critical) built from measured delay thresholds decides when
//! the estimate drives the window, when the flow may still grow greedily,
//! and when it must decay.

use crate::bayes::{
    delay_hardness, summarize_round, LossProbCombine, ProbState, RoundObservation,
    DEFAULT_THETA_D, DEFAULT_WINDOW_ROUNDS,
};
use crate::error::{Result, SimError};
use crate::tcp::{AckEvent, CongestionController, CwndBounds, LossSignal, RoundSummary, RttEstimator};

/// EWMA gain for the smoothed queuing-delay signal.
const D_QUEUE_GAIN: f64 = 1.0 / 8.0;

/// Fallback for the queuing-delay guard when no bandwidth estimate exists
/// yet.
const EPS_FALLBACK_S: f64 = 1e-6;

/// Default damping gain for tracking the estimated window while the queue
/// carries a real backlog. The estimate is a steep function of the backlog
/// (its slope grows with BDP over alpha), so assigning it per round would
/// oscillate; a small gain keeps the tracking stable at the scales the
/// scenarios use.
const DEFAULT_CONGESTION_GAIN: f64 = 1.0 / 16.0;

/// Default per-round relaxation of the loss-reference window toward the
/// current window. Without it the reference freezes on whatever history a
/// flow accumulated, pinning competing flows to unequal equilibria; with it
/// the delay term (shared by all flows on a path) decides the share.
const DEFAULT_LOSS_REF_GAIN: f64 = 1.0 / 32.0;

/// How the two delay references combine into the upper phase threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DMaxCombiner {
    /// Conservative: the smaller reference governs, entering the critical
    /// phase earlier.
    Min,
    Max,
}

/// Congestion phase per the delay thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Queuing is light and bandwidth is not fully used; grow aggressively.
    Light,
    /// Between thresholds; the estimated window governs.
    Congestion,
    /// Delay above the upper threshold but below timeout; decay.
    Critical,
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::Light => "light",
            Phase::Congestion => "congestion",
            Phase::Critical => "critical",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PhccConfig {
    /// Target backlog scale of the delay-based window (packets).
    pub alpha_pkts: f64,
    /// Delay-event threshold on mean round hardness.
    pub theta_d: f64,
    /// Sliding window length of the likelihood table, in rounds.
    pub window_rounds: usize,
    pub loss_prob_combine: LossProbCombine,
    pub d_max_combiner: DMaxCombiner,
    /// Per-round multiplicative decay applied in the critical phase.
    pub critical_decay: f64,
    /// Damping gain toward the estimated window when the queue is loaded.
    pub congestion_gain: f64,
    /// Per-round relaxation of the loss reference toward the current window.
    pub loss_ref_gain: f64,
    /// Initial slow-start threshold; also seeds the loss-reference window.
    pub initial_ssthresh_pkts: f64,
    pub initial_cwnd_pkts: f64,
}

impl Default for PhccConfig {
    fn default() -> Self {
        PhccConfig {
            alpha_pkts: 64.0,
            theta_d: DEFAULT_THETA_D,
            window_rounds: DEFAULT_WINDOW_ROUNDS,
            loss_prob_combine: LossProbCombine::Clamp,
            d_max_combiner: DMaxCombiner::Min,
            critical_decay: 0.9,
            congestion_gain: DEFAULT_CONGESTION_GAIN,
            loss_ref_gain: DEFAULT_LOSS_REF_GAIN,
            initial_ssthresh_pkts: 64.0,
            initial_cwnd_pkts: 2.0,
        }
    }
}

/// Expected and actual bandwidth in packets/second: the window over the
/// least RTT versus the packets actually acked over the tested round RTT.
pub fn vegas_bandwidths(
    cwnd_pkts: f64,
    d_min_s: f64,
    acked_in_round: u64,
    round_rtt_s: f64,
) -> Result<(f64, f64)> {
    if !(d_min_s > 0.0) || !d_min_s.is_finite() || !(round_rtt_s > 0.0) {
        return Err(SimError::InvalidState(format!(
            "vegas bandwidths need d_min ({d_min_s}) > 0 and round rtt ({round_rtt_s}) > 0"
        )));
    }
    Ok((cwnd_pkts / d_min_s, acked_in_round as f64 / round_rtt_s))
}

/// Lower delay threshold: ssthresh over the expected bandwidth. A
/// non-positive bandwidth keeps the previous threshold.
pub fn min_delay_threshold(ssthresh_pkts: f64, bw_expect_pps: f64, prev_s: f64) -> f64 {
    if bw_expect_pps > 0.0 {
        ssthresh_pkts / bw_expect_pps
    } else {
        prev_s
    }
}

/// Backlog estimate in packets from the bandwidth mismatch, floored at zero
/// (a negative backlog is impossible).
pub fn backlog_estimate(bw_expect_pps: f64, bw_actual_pps: f64, d_min_s: f64) -> f64 {
    ((bw_expect_pps - bw_actual_pps) * d_min_s).max(0.0)
}

/// Delay threshold from outstanding packets, queuing delay and the backlog
/// estimate. A backlog under one packet keeps the previous threshold (the
/// ratio is meaningless near zero).
pub fn delay_threshold(
    seqno: u64,
    lastack: u64,
    delay_s: f64,
    d_min_s: f64,
    bfs_pkts: f64,
    prev_s: Option<f64>,
) -> Option<f64> {
    debug_assert!(seqno >= lastack);
    if bfs_pkts < 1.0 {
        return prev_s;
    }
    let queuing = (delay_s - d_min_s).max(0.0);
    Some((seqno - lastack) as f64 * queuing / bfs_pkts)
}

/// Combines the measured and loss-reference delay thresholds into the upper
/// phase boundary.
pub fn max_delay_threshold(d_delay_tr_s: f64, d_loss_tr_s: f64, combiner: DMaxCombiner) -> f64 {
    match combiner {
        DMaxCombiner::Min => d_delay_tr_s.min(d_loss_tr_s),
        DMaxCombiner::Max => d_delay_tr_s.max(d_loss_tr_s),
    }
}

/// Phase partition over the current delay. The thresholds are normalized by
/// ordering if violated, and the upper bound never exceeds the timeout.
pub fn classify_phase(delay_s: f64, d_min_tr_s: f64, d_max_tr_s: f64, rto_s: f64) -> Phase {
    let (lo, hi) = if d_min_tr_s <= d_max_tr_s {
        (d_min_tr_s, d_max_tr_s)
    } else {
        (d_max_tr_s, d_min_tr_s)
    };
    let hi = hi.min(rto_s);
    if delay_s < lo {
        Phase::Light
    } else if delay_s <= hi {
        Phase::Congestion
    } else {
        Phase::Critical
    }
}

/// Delay-based target window: current delay times alpha over the smoothed
/// queuing delay, guarded by one packet serialization time and capped.
pub fn delay_target_window(
    d_i_s: f64,
    d_queue_s: f64,
    alpha_pkts: f64,
    eps_s: f64,
    cwnd_max_pkts: f64,
) -> f64 {
    let denom = d_queue_s.max(eps_s);
    (d_i_s * alpha_pkts / denom).min(cwnd_max_pkts)
}

/// Joint window estimate: each target discounted by its probability, then
/// averaged, floored at the minimum window.
pub fn estimate_window(
    p_d_est: f64,
    p_l_est: f64,
    w_d_tar_pkts: f64,
    w_l_tar_pkts: f64,
    cwnd_min_pkts: f64,
) -> f64 {
    let w_d = (1.0 - p_d_est) * w_d_tar_pkts;
    let w_l = (1.0 - p_l_est) * w_l_tar_pkts;
    ((w_d + w_l) / 2.0).max(cwnd_min_pkts)
}

pub struct Phcc {
    cfg: PhccConfig,
    bounds: CwndBounds,
    cwnd_pkts: f64,
    ssthresh_pkts: f64,
    /// Window at the last loss detection, before halving.
    w_loss_ref_pkts: f64,
    d_min_tr_s: f64,
    /// None until the backlog estimate first reaches one packet; the RTO
    /// stands in as the reference before that.
    d_delay_tr_s: Option<f64>,
    /// None until the first loss; the RTO stands in before that.
    d_loss_tr_s: Option<f64>,
    bw_expect_pps: f64,
    bw_actual_pps: f64,
    /// Last backlog estimate from the bandwidth mismatch, in packets.
    last_bfs_pkts: f64,
    /// EWMA-smoothed queuing delay from per-ACK (rtt - d_min) samples.
    d_queue_s: Option<f64>,
    phase: Phase,
    prob: ProbState,
    prev_obs: Option<RoundObservation>,
    completed_rounds: u64,
    hardness_samples: Vec<f64>,
    last_rto_s: f64,
    last_d_min_s: f64,
}

impl Phcc {
    pub fn new(cfg: PhccConfig, bounds: CwndBounds) -> Self {
        let cwnd = bounds.clamp(cfg.initial_cwnd_pkts);
        Phcc {
            prob: ProbState::new(cfg.window_rounds, cfg.loss_prob_combine),
            cwnd_pkts: cwnd,
            ssthresh_pkts: cfg.initial_ssthresh_pkts,
            w_loss_ref_pkts: cfg.initial_ssthresh_pkts,
            d_min_tr_s: 0.0,
            d_delay_tr_s: None,
            d_loss_tr_s: None,
            bw_expect_pps: 0.0,
            bw_actual_pps: 0.0,
            last_bfs_pkts: 0.0,
            d_queue_s: None,
            phase: Phase::Light,
            prev_obs: None,
            completed_rounds: 0,
            hardness_samples: Vec::new(),
            last_rto_s: 1.0,
            last_d_min_s: 0.0,
            bounds,
            cfg,
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn probabilities(&self) -> (f64, f64) {
        self.prob.cached_estimates()
    }

    /// Queuing-delay guard for the target window, chosen so the guarded
    /// target tops out near twice the current window: below this queuing
    /// level the pipe counts as empty and the flow may keep growing. Scaling
    /// by the flow's own window (not its measured rate) keeps a starved flow
    /// from inheriting a starved target.
    fn eps_s(&self) -> f64 {
        if self.last_d_min_s > 0.0 {
            self.cfg.alpha_pkts * self.last_d_min_s / (2.0 * self.cwnd_pkts.max(1.0))
        } else {
            EPS_FALLBACK_S
        }
    }

    fn effective_d_delay_tr(&self) -> f64 {
        self.d_delay_tr_s.unwrap_or(self.last_rto_s)
    }

    fn effective_d_loss_tr(&self) -> f64 {
        self.d_loss_tr_s.unwrap_or(self.last_rto_s)
    }

    /// Upper phase threshold, floored at the propagation delay: any
    /// reference below d_min is vacuous because delay never undercuts it.
    fn d_max_tr_s(&self) -> f64 {
        max_delay_threshold(
            self.effective_d_delay_tr(),
            self.effective_d_loss_tr(),
            self.cfg.d_max_combiner,
        )
        .max(self.last_d_min_s)
    }

    fn estimated_window(&mut self, d_i_s: f64) -> f64 {
        let (p_d, p_l) = if self.completed_rounds < 2 {
            // Cold start: optimistic so early growth behaves like slow start.
            (0.0, 0.0)
        } else {
            (
                self.prob.estimate_delay_prob(),
                self.prob.estimate_loss_prob(),
            )
        };
        let d_queue = self.d_queue_s.unwrap_or(0.0);
        let w_d_tar = delay_target_window(
            d_i_s,
            d_queue,
            self.cfg.alpha_pkts,
            self.eps_s(),
            self.bounds.max_pkts,
        );
        estimate_window(p_d, p_l, w_d_tar, self.w_loss_ref_pkts, self.bounds.min_pkts)
    }

    /// True while the smoothed queuing delay sits under the guard, i.e. the
    /// path shows no real backlog.
    fn pipe_is_empty(&self) -> bool {
        self.d_queue_s.unwrap_or(0.0) < self.eps_s()
    }
}

impl CongestionController for Phcc {
    fn cwnd_pkts(&self) -> f64 {
        self.cwnd_pkts
    }

    fn on_ack(&mut self, ev: &AckEvent, rtt: &RttEstimator) {
        self.last_rto_s = rtt.rto_s();
        if rtt.d_min_s().is_finite() {
            self.last_d_min_s = rtt.d_min_s();
        }
        let Some(sample_s) = ev.rtt_sample_s else {
            return;
        };
        let d_min = rtt.d_min_s();
        if let Ok(m) = delay_hardness(sample_s, d_min, rtt.rto_s()) {
            self.hardness_samples.push(m);
        }
        let queuing = (sample_s - d_min).max(0.0);
        self.d_queue_s = Some(match self.d_queue_s {
            Some(prev) => (1.0 - D_QUEUE_GAIN) * prev + D_QUEUE_GAIN * queuing,
            None => queuing,
        });
    }

    fn on_loss(&mut self, sig: &LossSignal) {
        // The loss reference is the window the loss was detected at,
        // before halving.
        self.w_loss_ref_pkts = self.cwnd_pkts;
        self.d_loss_tr_s = Some(sig.delay_at_loss_s);
        // A loss is the one moment the backlog estimate reflects an actually
        // exhausted buffer, so the measured delay threshold is sampled here.
        if self.last_d_min_s > 0.0 {
            self.d_delay_tr_s = delay_threshold(
                sig.inflight_pkts,
                0,
                sig.delay_at_loss_s,
                self.last_d_min_s,
                self.last_bfs_pkts,
                self.d_delay_tr_s,
            );
        }
        self.cwnd_pkts = self.bounds.clamp(self.cwnd_pkts / 2.0);
        self.ssthresh_pkts = self.cwnd_pkts;
        // Re-check the policy parameter for the phase we land in.
        self.phase = classify_phase(
            sig.delay_at_loss_s,
            self.d_min_tr_s,
            self.d_max_tr_s(),
            self.last_rto_s,
        );
    }

    fn on_round_end(&mut self, round: &RoundSummary) {
        self.last_rto_s = round.rto_s;
        if round.d_min_s.is_finite() {
            self.last_d_min_s = round.d_min_s;
        }

        // Observation update runs every round regardless of phase. A round
        // can complete without new releases (e.g. during recovery); the
        // denominator then falls back to what moved in the round.
        let denom = round.sent_pkts.max(round.lost_pkts).max(1);
        let cur = summarize_round(
            &self.hardness_samples,
            denom,
            round.lost_pkts.min(denom),
            self.cfg.theta_d,
        )
        .expect("denominator is positive");
        self.hardness_samples.clear();
        if let Some(prev) = self.prev_obs {
            self.prob.table.update(&prev, &cur);
        }
        self.prob.p_d_old = cur.mean_hardness;
        self.prob.p_l_old = cur.loss_fraction;
        self.prev_obs = Some(cur);
        self.completed_rounds += 1;

        // Bandwidths and thresholds; each keeps its previous value when the
        // round carries no usable measurement. The backlog estimate is kept
        // fresh so a loss can snapshot it into the delay threshold.
        if let Ok((bw_e, bw_a)) = vegas_bandwidths(
            self.cwnd_pkts,
            round.d_min_s,
            round.acked_pkts,
            round.duration_s,
        ) {
            self.bw_expect_pps = bw_e;
            self.bw_actual_pps = bw_a;
            self.last_bfs_pkts = backlog_estimate(bw_e, bw_a, round.d_min_s);
            self.d_min_tr_s = min_delay_threshold(self.ssthresh_pkts, bw_e, self.d_min_tr_s);
        }

        // Between losses the reference follows the window the flow actually
        // holds; losses reset it to the window they interrupted. The slow
        // relaxation is what lets competing flows forget unequal history.
        self.w_loss_ref_pkts = (1.0 - self.cfg.loss_ref_gain) * self.w_loss_ref_pkts
            + self.cfg.loss_ref_gain * self.cwnd_pkts;

        let delay = round.srtt_s;
        self.phase = classify_phase(delay, self.d_min_tr_s, self.d_max_tr_s(), round.rto_s);

        let next = match self.phase {
            Phase::Light => {
                if self.cwnd_pkts < self.ssthresh_pkts {
                    self.cwnd_pkts * 2.0
                } else {
                    self.cwnd_pkts + 1.0
                }
            }
            Phase::Congestion => {
                let est = self.estimated_window(delay);
                if self.pipe_is_empty() {
                    // No backlog: track the estimate directly, at most
                    // doubling per round. This is what restores the window
                    // quickly after a non-congestion loss.
                    est.min(self.cwnd_pkts * 2.0)
                } else {
                    // Loaded queue: damped approach, the raw estimate is too
                    // steep in the backlog to assign outright.
                    self.cwnd_pkts + self.cfg.congestion_gain * (est - self.cwnd_pkts)
                }
            }
            Phase::Critical => self.cwnd_pkts.min(self.estimated_window(delay)) * self.cfg.critical_decay,
        };
        self.cwnd_pkts = self.bounds.clamp(next);
    }

    fn name(&self) -> &'static str {
        "phcc"
    }

    fn phase_name(&self) -> &'static str {
        self.phase.name()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn bandwidths_from_window_and_acks() {
        let (bw_e, bw_a) = vegas_bandwidths(200.0, 0.04, 192, 0.04).unwrap();
        assert!((bw_e - 5000.0).abs() < EPS);
        assert!((bw_a - 4800.0).abs() < EPS);
    }

    #[test]
    fn bandwidths_equal_without_queuing() {
        let (bw_e, bw_a) = vegas_bandwidths(100.0, 0.05, 100, 0.05).unwrap();
        assert!((bw_e - bw_a).abs() < EPS);
    }

    #[test]
    fn bandwidths_reject_zero_denominators() {
        assert!(vegas_bandwidths(100.0, 0.0, 10, 0.05).is_err());
        assert!(vegas_bandwidths(100.0, 0.05, 10, 0.0).is_err());
    }

    #[test]
    fn min_threshold_worked_value_and_linearity() {
        let t = min_delay_threshold(100.0, 5000.0, 0.0);
        assert!((t - 0.02).abs() < EPS);
        let doubled = min_delay_threshold(200.0, 5000.0, 0.0);
        assert!((doubled - 2.0 * t).abs() < EPS);
        // Degenerate bandwidth keeps the previous threshold.
        assert_eq!(min_delay_threshold(100.0, 0.0, 0.017), 0.017);
    }

    #[test]
    fn backlog_worked_value_and_floor() {
        assert!((backlog_estimate(5000.0, 4800.0, 0.04) - 8.0).abs() < EPS);
        assert_eq!(backlog_estimate(4800.0, 4800.0, 0.04), 0.0);
        assert_eq!(backlog_estimate(4000.0, 4800.0, 0.04), 0.0);
    }

    #[test]
    fn delay_threshold_worked_value_and_guards() {
        // 40 packets outstanding, 10 ms of queuing over 8 packets of backlog.
        let t = delay_threshold(40, 0, 0.05, 0.04, 8.0, None).unwrap();
        assert!((t - 0.05).abs() < EPS);
        assert_eq!(delay_threshold(40, 0, 0.04, 0.04, 8.0, None), Some(0.0));
        // Backlog under one packet retains the previous threshold.
        assert_eq!(delay_threshold(40, 0, 0.05, 0.04, 0.0, Some(0.031)), Some(0.031));
        assert_eq!(delay_threshold(40, 0, 0.05, 0.04, 0.5, None), None);
    }

    #[test]
    fn d_max_combiners() {
        assert_eq!(max_delay_threshold(0.05, 0.08, DMaxCombiner::Min), 0.05);
        assert_eq!(max_delay_threshold(0.05, 0.08, DMaxCombiner::Max), 0.08);
        assert_eq!(max_delay_threshold(0.06, 0.06, DMaxCombiner::Min), 0.06);
    }

    #[test]
    fn phase_boundaries() {
        assert_eq!(classify_phase(0.015, 0.02, 0.05, 60.0), Phase::Light);
        assert_eq!(classify_phase(0.03, 0.02, 0.05, 60.0), Phase::Congestion);
        assert_eq!(classify_phase(0.06, 0.02, 0.05, 60.0), Phase::Critical);
        // Violated ordering is normalized.
        assert_eq!(classify_phase(0.03, 0.05, 0.02, 60.0), Phase::Congestion);
    }

    #[test]
    fn delay_target_worked_value_and_guards() {
        let w = delay_target_window(0.024, 0.004, 50.0, 1e-6, 1e9);
        assert!((w - 300.0).abs() < 1e-9);
        // d_queue == d_i collapses to alpha.
        let w = delay_target_window(0.02, 0.02, 64.0, 1e-6, 1e9);
        assert!((w - 64.0).abs() < EPS);
        // Vanishing queuing delay hits the cap.
        assert_eq!(delay_target_window(0.02, 0.0, 64.0, 1e-9, 5000.0), 5000.0);
    }

    #[test]
    fn estimate_window_worked_values() {
        let w = estimate_window(0.2, 0.1, 300.0, 200.0, 2.0);
        assert!((w - 210.0).abs() < EPS);
        let unloaded = estimate_window(0.0, 0.0, 300.0, 200.0, 2.0);
        assert!((unloaded - 250.0).abs() < EPS);
        assert_eq!(estimate_window(1.0, 1.0, 300.0, 200.0, 2.0), 2.0);
    }

    #[test]
    fn estimate_window_fixed_point_without_congestion() {
        let w = estimate_window(0.0, 0.0, 123.0, 123.0, 2.0);
        assert!((w - 123.0).abs() < EPS);
    }

    proptest! {
        #[test]
        fn estimate_window_monotone_in_probabilities(
            p1 in 0.0f64..1.0, p2 in 0.0f64..1.0,
            q in 0.0f64..1.0,
            wd in 0.0f64..1e4, wl in 0.0f64..1e4,
        ) {
            let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
            prop_assert!(
                estimate_window(hi, q, wd, wl, 2.0) <= estimate_window(lo, q, wd, wl, 2.0) + 1e-9
            );
            prop_assert!(
                estimate_window(q, hi, wd, wl, 2.0) <= estimate_window(q, lo, wd, wl, 2.0) + 1e-9
            );
        }

        #[test]
        fn estimate_window_symmetric_under_swap(
            pd in 0.0f64..1.0, pl in 0.0f64..1.0,
            wd in 0.0f64..1e4, wl in 0.0f64..1e4,
        ) {
            let a = estimate_window(pd, pl, wd, wl, 2.0);
            let b = estimate_window(pl, pd, wl, wd, 2.0);
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn phase_partition_is_total(
            delay in 0.0f64..1.0,
            lo in 0.0f64..1.0,
            hi in 0.0f64..1.0,
            rto in 0.01f64..2.0,
        ) {
            // Exactly one phase for every delay value.
            let phase = classify_phase(delay, lo, hi, rto);
            let all = [Phase::Light, Phase::Congestion, Phase::Critical];
            prop_assert_eq!(all.iter().filter(|p| **p == phase).count(), 1);
        }
    }
}
