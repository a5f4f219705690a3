//! Online probabilistic estimation of delay and loss from per-round
//! observations.
//!
//! Each RTT round is summarized into a congestion-hardness mean and a loss
//! fraction; consecutive rounds form transitions whose empirical conditional
//! frequencies (with add-one smoothing, over a sliding window of rounds)
//! feed the two total-probability expansions used by the PHCC controller.

use std::collections::VecDeque;

use crate::error::{Result, SimError};

/// Default threshold on mean hardness above which a round counts as a
/// delay event: the midpoint of the [0, 1] hardness space.
pub const DEFAULT_THETA_D: f64 = 0.5;

/// Default sliding-window length in rounds.
pub const DEFAULT_WINDOW_ROUNDS: usize = 32;

/// How the loss-probability expansion maps to [0, 1]. The expansion sums
/// two total-probability decompositions and can reach 2; `Clamp` evaluates
/// it verbatim and clips, `Average` halves the sum instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossProbCombine {
    Clamp,
    Average,
}

/// Congestion hardness of one RTT sample, normalized to [0, 1]: 0 at the
/// minimum observed RTT (no congestion), 1 at the retransmission timeout.
pub fn delay_hardness(rtt_sample_s: f64, d_min_s: f64, rto_s: f64) -> Result<f64> {
    if !(rto_s > d_min_s) || !(d_min_s > 0.0) {
        return Err(SimError::InvalidEstimatorState(format!(
            "need rto ({rto_s}) > d_min ({d_min_s}) > 0"
        )));
    }
    Ok(((rtt_sample_s - d_min_s) / (rto_s - d_min_s)).clamp(0.0, 1.0))
}

/// One completed round, reduced to the signals the estimator consumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundObservation {
    /// Mean of per-ACK hardness values over the round (0 if none).
    pub mean_hardness: f64,
    /// Losses divided by packets sent in the round.
    pub loss_fraction: f64,
    /// Delay event: mean hardness above the threshold.
    pub d_event: bool,
    /// Loss event: at least one loss in the round.
    pub l_event: bool,
}

/// Reduces per-ACK hardness samples and loss counts to a [`RoundObservation`].
pub fn summarize_round(
    hardness_samples: &[f64],
    sent: u64,
    lost: u64,
    theta_d: f64,
) -> Result<RoundObservation> {
    if sent == 0 {
        return Err(SimError::EmptyRound);
    }
    debug_assert!(lost <= sent);
    let mean_hardness = if hardness_samples.is_empty() {
        0.0
    } else {
        hardness_samples.iter().sum::<f64>() / hardness_samples.len() as f64
    };
    let loss_fraction = lost as f64 / sent as f64;
    Ok(RoundObservation {
        mean_hardness,
        loss_fraction,
        d_event: mean_hardness > theta_d,
        l_event: lost > 0,
    })
}

/// One round-to-round transition recorded in the sliding window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub prev_d: bool,
    pub prev_l: bool,
    pub cur_d: bool,
    pub cur_l: bool,
}

/// Sliding-window conditional-probability estimates backed by
/// Laplace-smoothed event counts: P(A|B) = (count(A and B) + 1) / (count(B) + 2).
///
/// With no observations every conditional is 0.5.
#[derive(Debug, Clone)]
pub struct LikelihoodTable {
    window: usize,
    log: VecDeque<Transition>,
    // Incremental counts over the window.
    n_prev_d: u32,
    n_prev_l: u32,
    d_after_d: u32,
    d_after_nd: u32,
    l_after_l: u32,
    l_after_nl: u32,
    l_after_d: u32,
    l_after_nd: u32,
}

impl LikelihoodTable {
    pub fn new(window: usize) -> Self {
        assert!(window > 0, "window must hold at least one transition");
        LikelihoodTable {
            window,
            log: VecDeque::new(),
            n_prev_d: 0,
            n_prev_l: 0,
            d_after_d: 0,
            d_after_nd: 0,
            l_after_l: 0,
            l_after_nl: 0,
            l_after_d: 0,
            l_after_nd: 0,
        }
    }

    /// Appends the transition between two consecutive rounds, evicting the
    /// oldest entry once the window is full.
    pub fn update(&mut self, prev: &RoundObservation, cur: &RoundObservation) {
        let t = Transition {
            prev_d: prev.d_event,
            prev_l: prev.l_event,
            cur_d: cur.d_event,
            cur_l: cur.l_event,
        };
        self.apply(&t, 1);
        self.log.push_back(t);
        if self.log.len() > self.window {
            let old = self.log.pop_front().expect("window overflow implies entries");
            self.apply(&old, -1);
        }
    }

    fn apply(&mut self, t: &Transition, sign: i32) {
        let add = |c: &mut u32, on: bool| {
            if on {
                if sign > 0 {
                    *c += 1;
                } else {
                    *c -= 1;
                }
            }
        };
        add(&mut self.n_prev_d, t.prev_d);
        add(&mut self.n_prev_l, t.prev_l);
        add(&mut self.d_after_d, t.prev_d && t.cur_d);
        add(&mut self.d_after_nd, !t.prev_d && t.cur_d);
        add(&mut self.l_after_l, t.prev_l && t.cur_l);
        add(&mut self.l_after_nl, !t.prev_l && t.cur_l);
        add(&mut self.l_after_d, t.prev_d && t.cur_l);
        add(&mut self.l_after_nd, !t.prev_d && t.cur_l);
    }

    pub fn len(&self) -> usize {
        self.log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log.is_empty()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// The recorded transitions, oldest first (test support).
    pub fn log(&self) -> impl Iterator<Item = &Transition> {
        self.log.iter()
    }

    fn smoothed(numer: u32, denom: u32) -> f64 {
        (numer as f64 + 1.0) / (denom as f64 + 2.0)
    }

    pub fn p_d_given_dold(&self) -> f64 {
        Self::smoothed(self.d_after_d, self.n_prev_d)
    }

    pub fn p_d_given_not_dold(&self) -> f64 {
        Self::smoothed(self.d_after_nd, self.log.len() as u32 - self.n_prev_d)
    }

    pub fn p_l_given_lold(&self) -> f64 {
        Self::smoothed(self.l_after_l, self.n_prev_l)
    }

    pub fn p_l_given_not_lold(&self) -> f64 {
        Self::smoothed(self.l_after_nl, self.log.len() as u32 - self.n_prev_l)
    }

    pub fn p_l_given_dold(&self) -> f64 {
        Self::smoothed(self.l_after_d, self.n_prev_d)
    }

    pub fn p_l_given_not_dold(&self) -> f64 {
        Self::smoothed(self.l_after_nd, self.log.len() as u32 - self.n_prev_d)
    }
}

/// Estimator state for one flow: the previous-round priors, the likelihood
/// table and the cached last estimates.
#[derive(Debug, Clone)]
pub struct ProbState {
    pub p_d_old: f64,
    pub p_l_old: f64,
    pub table: LikelihoodTable,
    pub combine: LossProbCombine,
    cached_p_d_est: f64,
    cached_p_l_est: f64,
}

impl ProbState {
    pub fn new(window: usize, combine: LossProbCombine) -> Self {
        ProbState {
            p_d_old: 0.0,
            p_l_old: 0.0,
            table: LikelihoodTable::new(window),
            combine,
            cached_p_d_est: 0.0,
            cached_p_l_est: 0.0,
        }
    }

    /// Delay-probability estimate: the convex combination
    /// P(D_old) * P(D|D_old) + (1 - P(D_old)) * P(D|~D_old).
    /// Always in [0, 1] without clamping.
    pub fn estimate_delay_prob(&mut self) -> f64 {
        let p = self.p_d_old * self.table.p_d_given_dold()
            + (1.0 - self.p_d_old) * self.table.p_d_given_not_dold();
        self.cached_p_d_est = p;
        p
    }

    /// Loss-probability estimate: the four-term expansion over the loss and
    /// delay priors, evaluated verbatim and then mapped to [0, 1] according
    /// to the configured combine rule.
    pub fn estimate_loss_prob(&mut self) -> f64 {
        let raw = self.p_l_old * self.table.p_l_given_lold()
            + (1.0 - self.p_l_old) * self.table.p_l_given_not_lold()
            + self.p_d_old * self.table.p_l_given_dold()
            + (1.0 - self.p_d_old) * self.table.p_l_given_not_dold();
        let p = match self.combine {
            LossProbCombine::Clamp => raw.clamp(0.0, 1.0),
            LossProbCombine::Average => (raw / 2.0).clamp(0.0, 1.0),
        };
        self.cached_p_l_est = p;
        p
    }

    pub fn cached_estimates(&self) -> (f64, f64) {
        (self.cached_p_d_est, self.cached_p_l_est)
    }
}
