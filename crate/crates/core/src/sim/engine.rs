//! The discrete-event engine wiring links, queues, flows and controllers
//! into a runnable dumbbell simulation.
//!
//! Events are totally ordered by (time, insertion sequence); identical
//! (config, seed) pairs therefore replay identical traces. All internal
//! time is integer nanoseconds.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use crate::cc::{build_controller, ControllerKind, ControllerParams};
use crate::error::{Result, SimError};
use crate::metrics::{FlowTrace, StateSample};
use crate::tcp::{Connection, TimerReaction};

use super::link::Link;
use super::loss::LossModel;
use super::packet::{FlowId, Packet, PacketKind, ACK_PKT_BYTES};
use super::queue::{DropTailQueue, EnqueueOutcome};
use super::time::SimTime;
use super::topology::Topology;

/// Per-flow launch description.
#[derive(Debug, Clone)]
pub struct FlowSetup {
    pub kind: ControllerKind,
    pub params: ControllerParams,
    pub start: SimTime,
}

#[derive(Clone)]
pub struct EngineConfig {
    pub topology: Topology,
    pub flows: Vec<FlowSetup>,
    pub data_pkt_bytes: u32,
    /// Bernoulli drop probability applied to data packets entering the
    /// bottleneck; zero disables the loss model.
    pub loss_prob: f64,
    pub seed: u64,
    pub sample_interval: SimTime,
    /// Record a compact (time, kind, a, b) event log for determinism checks.
    pub record_event_trace: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    FlowStart { flow: FlowId },
    /// Serialization finished on a link; the packet heads into propagation.
    TxDone { link: usize },
    /// Packet landed at the far end of a link.
    Arrive { link: usize, pkt: Packet },
    /// ACK reached the sender over the ideal reverse path.
    AckArrive { flow: FlowId, pkt: Packet },
    RtoCheck { flow: FlowId },
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Scheduled {
    at: SimTime,
    seq: u64,
    ev: Event,
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.at, self.seq).cmp(&(other.at, other.seq))
    }
}

/// Where packets leaving a link go next.
#[derive(Debug, Clone, Copy)]
enum Dest {
    /// Source access link feeds the shared bottleneck.
    Bottleneck,
    /// Bottleneck fans out to the packet's per-flow egress link.
    Egress,
    /// Egress link delivers to the flow's sink.
    Sink,
}

struct SimLink {
    link: Link,
    queue: DropTailQueue,
    in_service: Option<Packet>,
    dest: Dest,
}

struct Receiver {
    rcv_nxt: u64,
    out_of_order: BTreeSet<u64>,
}

impl Receiver {
    fn on_data(&mut self, seq: u64) -> u64 {
        if seq == self.rcv_nxt {
            self.rcv_nxt += 1;
            while self.out_of_order.remove(&self.rcv_nxt) {
                self.rcv_nxt += 1;
            }
        } else if seq > self.rcv_nxt {
            self.out_of_order.insert(seq);
        }
        self.rcv_nxt
    }
}

struct FlowRuntime {
    conn: Connection,
    receiver: Receiver,
    start: SimTime,
    started: bool,
    reverse_delay: SimTime,
    trace: FlowTrace,
    // Stats.
    delivered_pkts: u64,
    delivered_bytes: u64,
    queue_drops: u64,
    random_drops: u64,
    // RTO check events outstanding in the heap.
    pending_checks: u32,
    earliest_pending: Option<SimTime>,
}

/// Final per-flow counters of a run.
#[derive(Debug, Clone)]
pub struct FlowStats {
    pub released_pkts: u64,
    pub delivered_pkts: u64,
    pub delivered_bytes: u64,
    pub queue_drops: u64,
    pub random_drops: u64,
    pub retransmits: u64,
}

/// Aggregate counters of a run.
#[derive(Debug, Clone)]
pub struct RunStats {
    pub duration: SimTime,
    pub flows: Vec<FlowStats>,
    pub bottleneck_queue_drops: u64,
    pub random_drops: u64,
    pub queue_integral_pkt_ns: u128,
    pub events_processed: u64,
}

/// Everything a finished run hands to the metrics layer.
pub struct RunOutput {
    pub flow_traces: Vec<FlowTrace>,
    /// (time_s, bottleneck occupancy) at the sampling cadence.
    pub queue_samples: Vec<(f64, usize)>,
    pub stats: RunStats,
}

pub struct Engine {
    now: SimTime,
    heap: BinaryHeap<Reverse<Scheduled>>,
    event_seq: u64,
    events_processed: u64,
    data_pkt_bytes: u32,
    next_pkt_id: u64,
    links: Vec<SimLink>,
    bottleneck: usize,
    loss: Option<LossModel>,
    flows: Vec<FlowRuntime>,
    sample_interval: SimTime,
    t_end: SimTime,
    queue_samples: Vec<(f64, usize)>,
    random_drops_total: u64,
    in_network: i64,
    event_trace: Option<Vec<(u64, u8, u32, u32)>>,
}

impl Engine {
    pub fn new(cfg: EngineConfig) -> Result<Self> {
        let topo = &cfg.topology;
        if cfg.flows.len() != topo.n_flows {
            return Err(SimError::InvalidConfig(format!(
                "topology has {} flows but {} controllers were given",
                topo.n_flows,
                cfg.flows.len()
            )));
        }
        if cfg.data_pkt_bytes == 0 {
            return Err(SimError::InvalidConfig("data packets need a size".into()));
        }
        if !(0.0..=1.0).contains(&cfg.loss_prob) {
            return Err(SimError::InvalidConfig(format!(
                "loss probability {} outside [0, 1]",
                cfg.loss_prob
            )));
        }

        let n = topo.n_flows;
        let mut links = Vec::with_capacity(2 * n + 1);
        // Access links never drop: sources self-limit by window and the
        // egress side runs at least at bottleneck speed.
        for f in 0..n {
            links.push(SimLink {
                link: Link::new(topo.access_bps, topo.access_delay[f]),
                queue: DropTailQueue::new(usize::MAX),
                in_service: None,
                dest: Dest::Bottleneck,
            });
        }
        for f in 0..n {
            links.push(SimLink {
                link: Link::new(topo.access_bps, topo.access_delay[f]),
                queue: DropTailQueue::new(usize::MAX),
                in_service: None,
                dest: Dest::Sink,
            });
        }
        let bottleneck = links.len();
        links.push(SimLink {
            link: Link::new(topo.bottleneck_bps, topo.bottleneck_delay),
            queue: DropTailQueue::new(topo.buffer_pkts),
            in_service: None,
            dest: Dest::Egress,
        });

        let mut flows = Vec::with_capacity(n);
        for (f, setup) in cfg.flows.iter().enumerate() {
            let controller = build_controller(setup.kind, &setup.params);
            let cc_name = controller.name().to_string();
            flows.push(FlowRuntime {
                conn: Connection::new(f, controller, setup.start),
                receiver: Receiver {
                    rcv_nxt: 0,
                    out_of_order: BTreeSet::new(),
                },
                start: setup.start,
                started: false,
                reverse_delay: topo.reverse_delay(f),
                trace: FlowTrace::new(f, cc_name),
                delivered_pkts: 0,
                delivered_bytes: 0,
                queue_drops: 0,
                random_drops: 0,
                pending_checks: 0,
                earliest_pending: None,
            });
        }

        let mut engine = Engine {
            now: SimTime::ZERO,
            heap: BinaryHeap::new(),
            event_seq: 0,
            events_processed: 0,
            data_pkt_bytes: cfg.data_pkt_bytes,
            next_pkt_id: 0,
            links,
            bottleneck,
            loss: if cfg.loss_prob > 0.0 {
                Some(LossModel::new(cfg.loss_prob, cfg.seed))
            } else {
                None
            },
            flows,
            sample_interval: cfg.sample_interval,
            t_end: SimTime::ZERO,
            queue_samples: Vec::new(),
            random_drops_total: 0,
            in_network: 0,
            event_trace: if cfg.record_event_trace {
                Some(Vec::new())
            } else {
                None
            },
        };

        for f in 0..n {
            engine.schedule(engine.flows[f].start, Event::FlowStart { flow: f });
        }
        if engine.sample_interval > SimTime::ZERO {
            engine.schedule(engine.sample_interval, Event::Sample);
        }
        Ok(engine)
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn event_trace(&self) -> Option<&[(u64, u8, u32, u32)]> {
        self.event_trace.as_deref()
    }

    fn schedule(&mut self, at: SimTime, ev: Event) {
        debug_assert!(at >= self.now, "event scheduled in the past");
        let seq = self.event_seq;
        self.event_seq += 1;
        self.heap.push(Reverse(Scheduled { at, seq, ev }));
    }

    /// Processes every event with time <= `t_end` in (time, insertion)
    /// order, then parks the clock at `t_end`.
    pub fn run_until(&mut self, t_end: SimTime) -> Result<()> {
        if t_end < self.now {
            return Err(SimError::Internal(format!(
                "run_until({t_end}) is before now ({})",
                self.now
            )));
        }
        self.t_end = t_end;
        while let Some(Reverse(head)) = self.heap.peek() {
            if head.at > t_end {
                break;
            }
            let Reverse(sch) = self.heap.pop().expect("peeked");
            if sch.at < self.now {
                return Err(SimError::Internal(format!(
                    "event at {} is in the past (now {})",
                    sch.at, self.now
                )));
            }
            self.now = sch.at;
            self.events_processed += 1;
            self.record_trace(&sch.ev);
            self.dispatch(sch.ev);
            debug_assert!(self.conservation_holds(), "packet conservation violated");
        }
        self.now = t_end;
        Ok(())
    }

    /// Drains every remaining event (releases suppressed) so that no packet
    /// is left in flight; test support for conservation checks.
    pub fn run_until_idle(&mut self, hard_cap: SimTime) -> Result<()> {
        for flow in &mut self.flows {
            flow.conn.stop();
        }
        while let Some(Reverse(head)) = self.heap.peek() {
            if head.at > hard_cap {
                break;
            }
            let at = head.at;
            self.run_until(at)?;
        }
        Ok(())
    }

    /// Settles accumulators and converts the run into traces and stats.
    pub fn finish(mut self) -> RunOutput {
        let duration = self.now;
        for link in &mut self.links {
            link.queue.settle(duration);
        }
        let queue_integral = self.links[self.bottleneck].queue.occupancy_integral();
        let bottleneck_drops = self.links[self.bottleneck].queue.drops();

        let mut flow_traces = Vec::with_capacity(self.flows.len());
        let mut flow_stats = Vec::with_capacity(self.flows.len());
        for flow in self.flows {
            let mut trace = flow.trace;
            trace.duration_s = duration.as_secs_f64();
            flow_traces.push(trace);
            flow_stats.push(FlowStats {
                released_pkts: flow.conn.released_total,
                delivered_pkts: flow.delivered_pkts,
                delivered_bytes: flow.delivered_bytes,
                queue_drops: flow.queue_drops,
                random_drops: flow.random_drops,
                retransmits: flow.conn.retransmits_total,
            });
        }

        RunOutput {
            flow_traces,
            queue_samples: self.queue_samples,
            stats: RunStats {
                duration,
                flows: flow_stats,
                bottleneck_queue_drops: bottleneck_drops,
                random_drops: self.random_drops_total,
                queue_integral_pkt_ns: queue_integral,
                events_processed: self.events_processed,
            },
        }
    }

    fn record_trace(&mut self, ev: &Event) {
        let Some(trace) = self.event_trace.as_mut() else {
            return;
        };
        let (kind, a, b) = match ev {
            Event::FlowStart { flow } => (0u8, *flow as u32, 0u32),
            Event::TxDone { link } => (1, *link as u32, 0),
            Event::Arrive { link, pkt } => (2, *link as u32, pkt.id as u32),
            Event::AckArrive { flow, pkt } => (3, *flow as u32, pkt.id as u32),
            Event::RtoCheck { flow } => (4, *flow as u32, 0),
            Event::Sample => (5, 0, 0),
        };
        trace.push((self.now.as_nanos(), kind, a, b));
    }

    fn conservation_holds(&self) -> bool {
        // Retransmissions are fresh copies on the wire, so they count as
        // sent packets alongside first transmissions.
        let sent: u64 = self
            .flows
            .iter()
            .map(|f| f.conn.released_total + f.conn.retransmits_total)
            .sum();
        let delivered: u64 = self.flows.iter().map(|f| f.delivered_pkts).sum();
        let dropped: u64 = self
            .flows
            .iter()
            .map(|f| f.queue_drops + f.random_drops)
            .sum();
        sent as i64 == delivered as i64 + dropped as i64 + self.in_network
    }

    fn dispatch(&mut self, ev: Event) {
        match ev {
            Event::FlowStart { flow } => self.on_flow_start(flow),
            Event::TxDone { link } => self.on_tx_done(link),
            Event::Arrive { link, pkt } => self.on_arrive(link, pkt),
            Event::AckArrive { flow, pkt } => self.on_ack_arrive(flow, pkt),
            Event::RtoCheck { flow } => self.on_rto_check(flow),
            Event::Sample => self.on_sample(),
        }
    }

    fn on_flow_start(&mut self, flow: FlowId) {
        self.flows[flow].started = true;
        self.release_new_data(flow);
        self.ensure_timer(flow);
    }

    fn release_new_data(&mut self, flow: FlowId) {
        let range = self.flows[flow].conn.release_window(self.now);
        for seq in range {
            self.send_data(flow, seq, false);
        }
    }

    fn send_data(&mut self, flow: FlowId, seq: u64, retx: bool) {
        let pkt = Packet::data(
            self.alloc_pkt_id(),
            flow,
            seq,
            self.data_pkt_bytes,
            self.now,
            retx,
        );
        self.in_network += 1;
        // Source access link of flow f sits at index f.
        self.enqueue_on(flow, pkt);
    }

    fn alloc_pkt_id(&mut self) -> u64 {
        let id = self.next_pkt_id;
        self.next_pkt_id += 1;
        id
    }

    fn enqueue_on(&mut self, link_idx: usize, pkt: Packet) {
        // Random loss applies to forward data packets entering the
        // bottleneck only; ACKs never traverse it.
        if link_idx == self.bottleneck {
            if let Some(model) = self.loss.as_mut() {
                if pkt.is_data() && model.should_drop() {
                    self.random_drops_total += 1;
                    self.flows[pkt.flow].random_drops += 1;
                    self.in_network -= 1;
                    return;
                }
            }
        }
        let now = self.now;
        let link = &mut self.links[link_idx];
        match link.queue.enqueue(pkt, now) {
            EnqueueOutcome::Accepted => self.try_start_tx(link_idx),
            EnqueueOutcome::Dropped => {
                self.flows[pkt.flow].queue_drops += 1;
                self.in_network -= 1;
            }
        }
    }

    fn try_start_tx(&mut self, link_idx: usize) {
        let now = self.now;
        let link = &mut self.links[link_idx];
        if link.in_service.is_some() {
            return;
        }
        let Some(pkt) = link.queue.dequeue(now) else {
            return;
        };
        debug_assert!(link.link.busy_until <= now, "link already serializing");
        link.link.transmit(&pkt, now);
        let tx_done = link.link.busy_until;
        link.in_service = Some(pkt);
        self.schedule(tx_done, Event::TxDone { link: link_idx });
    }

    fn on_tx_done(&mut self, link_idx: usize) {
        let link = &mut self.links[link_idx];
        let pkt = link
            .in_service
            .take()
            .expect("tx-done without a packet in service");
        let arrive_at = self.now + link.link.prop_delay;
        self.schedule(arrive_at, Event::Arrive { link: link_idx, pkt });
        // Keep the pipe busy.
        self.try_start_tx(link_idx);
    }

    fn on_arrive(&mut self, link_idx: usize, pkt: Packet) {
        match self.links[link_idx].dest {
            Dest::Bottleneck => self.enqueue_on(self.bottleneck, pkt),
            Dest::Egress => {
                let egress = self.egress_index(pkt.flow);
                self.enqueue_on(egress, pkt);
            }
            Dest::Sink => self.deliver_to_sink(pkt),
        }
    }

    fn egress_index(&self, flow: FlowId) -> usize {
        self.flows.len() + flow
    }

    fn deliver_to_sink(&mut self, pkt: Packet) {
        let PacketKind::Data { seq, retx } = pkt.kind else {
            debug_assert!(false, "only data packets reach a sink");
            return;
        };
        let flow = pkt.flow;
        self.in_network -= 1;
        self.flows[flow].delivered_pkts += 1;
        self.flows[flow].delivered_bytes += pkt.size_bytes as u64;
        self.flows[flow]
            .trace
            .deliveries
            .push((self.now.as_nanos(), pkt.size_bytes));

        let ack_no = self.flows[flow].receiver.on_data(seq);
        let ack = Packet {
            id: self.alloc_pkt_id(),
            flow,
            size_bytes: ACK_PKT_BYTES,
            sent_at: self.now,
            kind: PacketKind::Ack {
                ack_no,
                echo_sent_at: pkt.sent_at,
                echo_retx: retx,
            },
        };
        // The reverse path is provisioned far above the ACK rate, so it is
        // modelled as a fixed-latency pipe.
        let at = self.now + self.flows[flow].reverse_delay;
        self.schedule(at, Event::AckArrive { flow, pkt: ack });
    }

    fn on_ack_arrive(&mut self, flow: FlowId, pkt: Packet) {
        let PacketKind::Ack {
            ack_no,
            echo_sent_at,
            echo_retx,
        } = pkt.kind
        else {
            debug_assert!(false, "ack event with non-ack packet");
            return;
        };
        let reaction = self.flows[flow]
            .conn
            .handle_ack(ack_no, echo_sent_at, echo_retx, self.now);
        if let Some(seq) = reaction.retransmit {
            self.send_data(flow, seq, true);
        }
        self.release_new_data(flow);
        self.ensure_timer(flow);
    }

    fn on_rto_check(&mut self, flow: FlowId) {
        self.flows[flow].pending_checks = self.flows[flow].pending_checks.saturating_sub(1);
        if self.flows[flow].pending_checks == 0 {
            self.flows[flow].earliest_pending = None;
        }
        match self.flows[flow].conn.handle_timer_fire(self.now) {
            TimerReaction::Idle => {}
            TimerReaction::ReArm(at) => self.arm_timer(flow, at),
            TimerReaction::Timeout { retransmit, rearm_at } => {
                self.send_data(flow, retransmit, true);
                self.arm_timer(flow, rearm_at);
            }
        }
    }

    fn ensure_timer(&mut self, flow: FlowId) {
        if let Some(deadline) = self.flows[flow].conn.rto_deadline() {
            self.arm_timer(flow, deadline);
        }
    }

    fn arm_timer(&mut self, flow: FlowId, deadline: SimTime) {
        let at = deadline.max(self.now);
        let f = &mut self.flows[flow];
        // One live check is enough unless the deadline moved earlier than
        // everything outstanding.
        let need = match f.earliest_pending {
            None => f.pending_checks == 0,
            Some(earliest) => at < earliest,
        };
        if !need && f.pending_checks > 0 {
            return;
        }
        f.pending_checks += 1;
        f.earliest_pending = Some(match f.earliest_pending {
            Some(e) => e.min(at),
            None => at,
        });
        self.schedule(at, Event::RtoCheck { flow });
    }

    fn on_sample(&mut self) {
        let t_s = self.now.as_secs_f64();
        let occupancy = self.links[self.bottleneck].queue.occupancy_pkts();
        self.queue_samples.push((t_s, occupancy));
        for f in &mut self.flows {
            if !f.started {
                continue;
            }
            f.trace.samples.push(StateSample {
                t_s,
                cwnd_pkts: f.conn.cwnd_pkts(),
                srtt_s: f.conn.rtt.srtt_s(),
                phase: f.conn.controller().phase_name(),
            });
        }
        let next = self.now + self.sample_interval;
        if next <= self.t_end {
            self.schedule(next, Event::Sample);
        }
    }
}
