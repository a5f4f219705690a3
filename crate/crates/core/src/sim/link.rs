use super::packet::Packet;
use super::time::SimTime;

/// Point-to-point link: fixed bandwidth plus propagation delay.
///
/// At most one packet is in serialization at a time; `busy_until` marks when
/// the transmitter frees up.
#[derive(Debug, Clone)]
pub struct Link {
    pub bandwidth_bps: f64,
    pub prop_delay: SimTime,
    pub busy_until: SimTime,
}

impl Link {
    pub fn new(bandwidth_bps: f64, prop_delay: SimTime) -> Self {
        assert!(bandwidth_bps > 0.0, "link bandwidth must be positive");
        Link {
            bandwidth_bps,
            prop_delay,
            busy_until: SimTime::ZERO,
        }
    }

    /// Serialization time for `size_bytes` at this link's rate.
    pub fn serialization_time(&self, size_bytes: u32) -> SimTime {
        SimTime::from_secs_f64(size_bytes as f64 * 8.0 / self.bandwidth_bps)
    }

    /// Places the packet on the wire. Transmission starts when the link is
    /// free, and the packet lands at the far end one propagation delay after
    /// serialization completes. Returns the delivery time.
    pub fn transmit(&mut self, pkt: &Packet, now: SimTime) -> SimTime {
        let start = now.max(self.busy_until);
        let tx_done = start + self.serialization_time(pkt.size_bytes);
        self.busy_until = tx_done;
        tx_done + self.prop_delay
    }
}
