use crate::sim::packet::FlowId;
use crate::sim::time::SimTime;

use super::controller::{AckEvent, CongestionController, LossKind, LossSignal, RoundSummary};
use super::rtt::RttEstimator;

/// What the engine must do after an ACK was processed.
#[derive(Debug, Default)]
pub struct AckReaction {
    /// Sequence number to fast-retransmit, if a triple dupack fired.
    pub retransmit: Option<u64>,
    pub round_ended: bool,
}

/// What the engine must do after a timer check fired.
#[derive(Debug)]
pub enum TimerReaction {
    /// Deadline not reached (or moved); re-arm at this time.
    ReArm(SimTime),
    /// Timer is idle: all data acked, nothing to watch.
    Idle,
    /// RTO expired: retransmit this sequence and re-arm at the new deadline.
    Timeout { retransmit: u64, rearm_at: SimTime },
}

/// Sender-side state of one flow: packet-granular sequencing, cumulative
/// ACKs, dupack/timeout loss detection and round tracking.
///
/// In-flight accounting uses an explicit pipe estimate (sends minus acked
/// minus dupack departures, flushed on timeout) rather than raw
/// `next_seq - lastack`: without SACK the sequence gap counts packets that
/// are parked in the receiver's reorder buffer, which would freeze the
/// window after a loss burst. Recovery retransmits the next hole on every
/// partial ACK for the same reason.
pub struct Connection {
    pub flow: FlowId,
    next_seq: u64,
    lastack: u64,
    dupack_count: u32,
    /// Estimated packets in the network.
    pipe: u64,
    pub rtt: RttEstimator,
    controller: Box<dyn CongestionController>,

    // Fast-recovery guard: one triple-dupack signal per loss episode.
    in_recovery: bool,
    recover_seq: u64,

    // Round bookkeeping.
    round_start_seq: u64,
    round_start_time: SimTime,
    first_round_sealed: bool,
    round_boundary_pending: bool,
    acked_in_round: u64,
    sent_in_round: u64,
    lost_in_round: u64,

    // Lazy RTO deadline; the engine keeps at most a couple of check events
    // in flight and re-validates against this on every fire.
    rto_deadline: Option<SimTime>,

    // Lifetime counters.
    pub released_total: u64,
    pub retransmits_total: u64,

    stopped: bool,
}

impl Connection {
    pub fn new(flow: FlowId, controller: Box<dyn CongestionController>, start: SimTime) -> Self {
        Connection {
            flow,
            next_seq: 0,
            lastack: 0,
            dupack_count: 0,
            pipe: 0,
            rtt: RttEstimator::default(),
            controller,
            in_recovery: false,
            recover_seq: 0,
            round_start_seq: 0,
            round_start_time: start,
            first_round_sealed: false,
            round_boundary_pending: false,
            acked_in_round: 0,
            sent_in_round: 0,
            lost_in_round: 0,
            rto_deadline: None,
            released_total: 0,
            retransmits_total: 0,
            stopped: false,
        }
    }

    pub fn cwnd_pkts(&self) -> f64 {
        self.controller.cwnd_pkts()
    }

    pub fn controller(&self) -> &dyn CongestionController {
        self.controller.as_ref()
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    pub fn lastack(&self) -> u64 {
        self.lastack
    }

    pub fn dupack_count(&self) -> u32 {
        self.dupack_count
    }

    /// Estimated packets in the network (pipe).
    pub fn inflight_pkts(&self) -> u64 {
        self.pipe
    }

    /// Sequence-space gap between what was released and what is acked; this
    /// is the (seqno - lastack) quantity controllers consume.
    pub fn seq_outstanding(&self) -> u64 {
        debug_assert!(self.next_seq >= self.lastack);
        self.next_seq - self.lastack
    }

    pub fn rto_deadline(&self) -> Option<SimTime> {
        self.rto_deadline
    }

    /// Stops releasing new data (used to drain a run).
    pub fn stop(&mut self) {
        self.stopped = true;
    }

    /// Releases new sequence numbers up to the window: at most
    /// `floor(cwnd) - inflight` packets. Returns the released range and
    /// arms the RTO if data is now outstanding.
    pub fn release_window(&mut self, now: SimTime) -> std::ops::Range<u64> {
        if self.stopped {
            return self.next_seq..self.next_seq;
        }
        let window = self.controller.cwnd_pkts().floor() as u64;
        let quota = window.saturating_sub(self.pipe);
        let start = self.next_seq;
        self.next_seq += quota;
        self.pipe += quota;
        self.sent_in_round += quota;
        self.released_total += quota;
        if !self.first_round_sealed && self.next_seq > 0 {
            // The first round spans the initial burst.
            self.round_start_seq = self.next_seq;
            self.first_round_sealed = true;
        }
        if self.round_boundary_pending {
            // Seal the next round once the post-round window refill is out,
            // so a round spans a full RTT of traffic.
            self.round_start_seq = self.next_seq;
            self.round_boundary_pending = false;
        }
        if quota > 0 && self.rto_deadline.is_none() {
            self.rto_deadline = Some(now + SimTime::from_secs_f64(self.rtt.rto_s()));
        }
        start..self.next_seq
    }

    /// Processes a cumulative ACK. `echo_sent_at`/`echo_retx` describe the
    /// data packet that triggered it, for Karn-filtered RTT sampling.
    pub fn handle_ack(
        &mut self,
        ack_no: u64,
        echo_sent_at: SimTime,
        echo_retx: bool,
        now: SimTime,
    ) -> AckReaction {
        let mut reaction = AckReaction::default();

        if ack_no > self.lastack {
            let newly = ack_no - self.lastack;
            self.lastack = ack_no;
            self.dupack_count = 0;
            self.pipe = self.pipe.saturating_sub(newly);
            self.acked_in_round += newly;

            let rtt_sample = self.take_rtt_sample(echo_sent_at, echo_retx, now);

            if self.in_recovery {
                if self.lastack >= self.recover_seq {
                    self.in_recovery = false;
                } else {
                    // Partial ack: the next hole is known lost, retransmit
                    // it now instead of waiting out an RTO per hole. Each
                    // hole counts as one lost packet for the round.
                    self.retransmits_total += 1;
                    self.lost_in_round += 1;
                    self.pipe += 1;
                    reaction.retransmit = Some(self.lastack);
                }
            }

            // Restart the retransmission timer on progress.
            self.rto_deadline = if self.lastack < self.next_seq {
                Some(now + SimTime::from_secs_f64(self.rtt.rto_s()))
            } else {
                None
            };

            let ev = AckEvent {
                newly_acked_pkts: newly,
                rtt_sample_s: rtt_sample,
                is_dupack: false,
            };
            self.controller.on_ack(&ev, &self.rtt);

            if ack_no >= self.round_start_seq && self.first_round_sealed {
                self.finish_round(now);
                reaction.round_ended = true;
            }
        } else if ack_no == self.lastack && self.lastack < self.next_seq {
            // Duplicate ACK against outstanding data: one packet left the
            // network even though the cumulative point is stuck.
            self.dupack_count += 1;
            self.pipe = self.pipe.saturating_sub(1);
            let rtt_sample = self.take_rtt_sample(echo_sent_at, echo_retx, now);
            let ev = AckEvent {
                newly_acked_pkts: 0,
                rtt_sample_s: rtt_sample,
                is_dupack: true,
            };
            self.controller.on_ack(&ev, &self.rtt);

            if self.dupack_count == 3 && !self.in_recovery {
                self.in_recovery = true;
                self.recover_seq = self.next_seq;
                self.lost_in_round += 1;
                self.controller.on_loss(&LossSignal {
                    kind: LossKind::TripleDupack,
                    delay_at_loss_s: self.rtt.last_sample_s(),
                    inflight_pkts: self.seq_outstanding(),
                });
                self.retransmits_total += 1;
                self.pipe += 1;
                reaction.retransmit = Some(self.lastack);
            }
        }
        // Stale ACKs (ack_no < lastack) are ignored outright.

        reaction
    }

    /// Validates a fired timer check against the live deadline.
    pub fn handle_timer_fire(&mut self, now: SimTime) -> TimerReaction {
        let Some(deadline) = self.rto_deadline else {
            return TimerReaction::Idle;
        };
        if now < deadline {
            return TimerReaction::ReArm(deadline);
        }
        if self.lastack >= self.next_seq {
            // All data acked; timer should have been cancelled.
            self.rto_deadline = None;
            return TimerReaction::Idle;
        }

        // Genuine retransmission timeout: back off, retransmit the oldest
        // unacked packet, and open a fresh recovery episode so the eventual
        // dupacks for this hole cannot signal the same loss twice. The pipe
        // is considered flushed.
        self.rtt.backoff();
        self.lost_in_round += 1;
        self.in_recovery = true;
        self.recover_seq = self.next_seq;
        self.dupack_count = 0;
        self.pipe = 0;
        self.controller.on_loss(&LossSignal {
            kind: LossKind::Timeout,
            delay_at_loss_s: self.rtt.last_sample_s(),
            inflight_pkts: self.seq_outstanding(),
        });
        self.retransmits_total += 1;
        self.pipe = 1;
        let rearm_at = now + SimTime::from_secs_f64(self.rtt.rto_s());
        self.rto_deadline = Some(rearm_at);
        TimerReaction::Timeout {
            retransmit: self.lastack,
            rearm_at,
        }
    }

    fn take_rtt_sample(&mut self, echo_sent_at: SimTime, echo_retx: bool, now: SimTime) -> Option<f64> {
        if echo_retx || now <= echo_sent_at {
            return None;
        }
        let sample = (now - echo_sent_at).as_secs_f64();
        // Samples are positive by construction here.
        self.rtt.update(sample).ok()?;
        Some(sample)
    }

    fn finish_round(&mut self, now: SimTime) {
        let summary = RoundSummary {
            acked_pkts: self.acked_in_round,
            sent_pkts: self.sent_in_round,
            lost_pkts: self.lost_in_round,
            duration_s: (now - self.round_start_time).as_secs_f64(),
            inflight_pkts: self.seq_outstanding(),
            srtt_s: self.rtt.srtt_s(),
            last_rtt_s: self.rtt.last_sample_s(),
            d_min_s: self.rtt.d_min_s(),
            rto_s: self.rtt.rto_s(),
        };
        self.controller.on_round_end(&summary);
        self.acked_in_round = 0;
        self.sent_in_round = 0;
        self.lost_in_round = 0;
        self.round_start_seq = self.next_seq;
        self.round_boundary_pending = true;
        self.round_start_time = now;
    }
}
