use std::collections::VecDeque;

use super::packet::Packet;
use super::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnqueueOutcome {
    Accepted,
    Dropped,
}

/// Drop-tail FIFO queue with a packet-count capacity.
///
/// Occupancy counts packets waiting for the link; the packet currently in
/// serialization has already been dequeued. A time-weighted occupancy
/// integral is maintained for average-queue-size reporting.
#[derive(Debug)]
pub struct DropTailQueue {
    capacity_pkts: usize,
    fifo: VecDeque<Packet>,
    drops: u64,
    /// Sum of occupancy * elapsed ticks, in packet-nanoseconds.
    occ_integral: u128,
    last_change: SimTime,
}

impl DropTailQueue {
    pub fn new(capacity_pkts: usize) -> Self {
        assert!(capacity_pkts > 0, "queue capacity must be positive");
        DropTailQueue {
            capacity_pkts,
            fifo: VecDeque::new(),
            drops: 0,
            occ_integral: 0,
            last_change: SimTime::ZERO,
        }
    }

    /// Accepts the packet if there is room, drops it otherwise. Dropping is
    /// a normal outcome, not an error.
    pub fn enqueue(&mut self, pkt: Packet, now: SimTime) -> EnqueueOutcome {
        self.accumulate(now);
        if self.fifo.len() >= self.capacity_pkts {
            self.drops += 1;
            EnqueueOutcome::Dropped
        } else {
            self.fifo.push_back(pkt);
            EnqueueOutcome::Accepted
        }
    }

    pub fn dequeue(&mut self, now: SimTime) -> Option<Packet> {
        self.accumulate(now);
        self.fifo.pop_front()
    }

    pub fn occupancy_pkts(&self) -> usize {
        self.fifo.len()
    }

    pub fn capacity_pkts(&self) -> usize {
        self.capacity_pkts
    }

    pub fn drops(&self) -> u64 {
        self.drops
    }

    /// Advances the occupancy integral up to `now` without changing state.
    pub fn settle(&mut self, now: SimTime) {
        self.accumulate(now);
    }

    /// Time-weighted occupancy integral in packet-nanoseconds.
    pub fn occupancy_integral(&self) -> u128 {
        self.occ_integral
    }

    fn accumulate(&mut self, now: SimTime) {
        debug_assert!(now >= self.last_change, "queue time went backwards");
        let dt = now.saturating_sub(self.last_change).as_nanos() as u128;
        self.occ_integral += self.fifo.len() as u128 * dt;
        self.last_change = now;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::packet::PacketKind;

    fn pkt(id: u64) -> Packet {
        Packet {
            id,
            flow: 0,
            size_bytes: 1000,
            sent_at: SimTime::ZERO,
            kind: PacketKind::Data { seq: id, retx: false },
        }
    }

    #[test]
    fn accepts_until_full_then_drops() {
        let mut q = DropTailQueue::new(600);
        for i in 0..5 {
            assert_eq!(q.enqueue(pkt(i), SimTime::ZERO), EnqueueOutcome::Accepted);
        }
        assert_eq!(q.occupancy_pkts(), 6 - 1);
        assert_eq!(q.enqueue(pkt(5), SimTime::ZERO), EnqueueOutcome::Accepted);
        assert_eq!(q.occupancy_pkts(), 6);

        let mut full = DropTailQueue::new(2);
        full.enqueue(pkt(0), SimTime::ZERO);
        full.enqueue(pkt(1), SimTime::ZERO);
        assert_eq!(full.enqueue(pkt(2), SimTime::ZERO), EnqueueOutcome::Dropped);
        assert_eq!(full.drops(), 1);
        assert_eq!(full.occupancy_pkts(), 2);
    }

    #[test]
    fn fifo_order_preserved() {
        let mut q = DropTailQueue::new(10);
        q.enqueue(pkt(1), SimTime::ZERO);
        q.enqueue(pkt(2), SimTime::ZERO);
        assert_eq!(q.dequeue(SimTime::ZERO).unwrap().id, 1);
        assert_eq!(q.dequeue(SimTime::ZERO).unwrap().id, 2);
        assert!(q.dequeue(SimTime::ZERO).is_none());
    }

    #[test]
    fn occupancy_integral_matches_step_function() {
        let mut q = DropTailQueue::new(10);
        // occupancy 0 on [0, 10), 1 on [10, 30), 2 on [30, 40), 1 on [40, 100)
        q.enqueue(pkt(1), SimTime::from_nanos(10));
        q.enqueue(pkt(2), SimTime::from_nanos(30));
        q.dequeue(SimTime::from_nanos(40));
        q.settle(SimTime::from_nanos(100));
        let expected = 0 * 10 + 1 * 20 + 2 * 10 + 1 * 60;
        assert_eq!(q.occupancy_integral(), expected as u128);
    }
}
