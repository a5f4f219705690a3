use super::time::SimTime;

pub type FlowId = usize;

/// Default data packet payload size in bytes.
pub const DATA_PKT_BYTES: u32 = 1000;

/// ACK size used for serialization accounting on the reverse path.
pub const ACK_PKT_BYTES: u32 = 40;

/// A simulated packet. Sequence numbers are packet-granular: `seq` counts
/// whole data packets, and a cumulative ACK carries the next expected seq.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packet {
    /// Unique per simulation.
    pub id: u64,
    pub flow: FlowId,
    pub size_bytes: u32,
    /// Departure timestamp from the sender, echoed back for RTT sampling.
    pub sent_at: SimTime,
    pub kind: PacketKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PacketKind {
    Data {
        seq: u64,
        /// Retransmissions are flagged so RTT samples can skip them.
        retx: bool,
    },
    Ack {
        /// Next expected sequence number (cumulative).
        ack_no: u64,
        /// Timestamp and retransmit flag of the data packet that triggered
        /// this ACK, echoed for RTT sampling under Karn's rule.
        echo_sent_at: SimTime,
        echo_retx: bool,
    },
}

impl Packet {
    pub fn data(id: u64, flow: FlowId, seq: u64, size_bytes: u32, sent_at: SimTime, retx: bool) -> Self {
        debug_assert!(size_bytes > 0);
        Packet {
            id,
            flow,
            size_bytes,
            sent_at,
            kind: PacketKind::Data { seq, retx },
        }
    }

    pub fn is_data(&self) -> bool {
        matches!(self.kind, PacketKind::Data { .. })
    }
}
