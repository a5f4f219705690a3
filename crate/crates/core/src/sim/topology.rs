use crate::error::{Result, SimError};

use super::packet::ACK_PKT_BYTES;
use super::time::SimTime;

/// Parameters for the dumbbell: n sources and n sinks joined by two routers
/// sharing a single bottleneck link.
#[derive(Debug, Clone)]
pub struct TopologyConfig {
    pub n_flows: usize,
    pub bottleneck_bps: f64,
    pub bottleneck_delay_s: f64,
    /// Access-link bandwidth on both sides of every flow.
    pub access_bps: f64,
    /// Per-flow propagation delay applied to the source-side and sink-side
    /// access links alike, so base RTT = 2 * (2 * access + bottleneck).
    pub access_delay_s: Vec<f64>,
    /// Bottleneck buffer in packets (drop-tail).
    pub buffer_pkts: usize,
}

/// A validated dumbbell. Forward paths are source -> access link -> router 1
/// -> bottleneck (drop-tail queue) -> router 2 -> access link -> sink; the
/// reverse ACK path traverses the same hops with ample capacity and is
/// modelled as a fixed-latency pipe per flow.
#[derive(Debug, Clone)]
pub struct Topology {
    pub n_flows: usize,
    pub bottleneck_bps: f64,
    pub bottleneck_delay: SimTime,
    pub access_bps: f64,
    pub access_delay: Vec<SimTime>,
    pub buffer_pkts: usize,
}

/// Builds and validates the dumbbell described by `cfg`.
pub fn build_dumbbell(cfg: &TopologyConfig) -> Result<Topology> {
    if cfg.n_flows < 1 {
        return Err(SimError::InvalidConfig("need at least one flow".into()));
    }
    if cfg.bottleneck_bps <= 0.0 || cfg.access_bps <= 0.0 {
        return Err(SimError::InvalidConfig(
            "link bandwidths must be positive".into(),
        ));
    }
    if cfg.buffer_pkts == 0 {
        return Err(SimError::InvalidConfig(
            "bottleneck buffer must hold at least one packet".into(),
        ));
    }
    if cfg.bottleneck_delay_s < 0.0 {
        return Err(SimError::InvalidConfig(
            "bottleneck delay must be non-negative".into(),
        ));
    }
    if cfg.access_delay_s.len() != cfg.n_flows {
        return Err(SimError::InvalidConfig(format!(
            "expected {} per-flow access delays, got {}",
            cfg.n_flows,
            cfg.access_delay_s.len()
        )));
    }
    if cfg.access_delay_s.iter().any(|d| *d < 0.0) {
        return Err(SimError::InvalidConfig(
            "access delays must be non-negative".into(),
        ));
    }

    Ok(Topology {
        n_flows: cfg.n_flows,
        bottleneck_bps: cfg.bottleneck_bps,
        bottleneck_delay: SimTime::from_secs_f64(cfg.bottleneck_delay_s),
        access_bps: cfg.access_bps,
        access_delay: cfg
            .access_delay_s
            .iter()
            .map(|d| SimTime::from_secs_f64(*d))
            .collect(),
        buffer_pkts: cfg.buffer_pkts,
    })
}

impl Topology {
    /// One-way propagation delay for a flow's forward path.
    pub fn forward_prop_delay(&self, flow: usize) -> SimTime {
        self.access_delay[flow] + self.bottleneck_delay + self.access_delay[flow]
    }

    /// Latency of the idealized (uncongested) reverse path: the same
    /// propagation delays plus one ACK serialization at the sink's access
    /// link.
    pub fn reverse_delay(&self, flow: usize) -> SimTime {
        let ack_ser = SimTime::from_secs_f64(ACK_PKT_BYTES as f64 * 8.0 / self.access_bps);
        self.forward_prop_delay(flow) + ack_ser
    }

    /// Propagation-only round-trip time for a flow (serialization excluded).
    pub fn base_rtt(&self, flow: usize) -> SimTime {
        self.forward_prop_delay(flow) + self.reverse_delay(flow)
    }

    /// Bandwidth-delay product of a flow's path in data packets.
    pub fn bdp_pkts(&self, flow: usize, pkt_bytes: u32) -> f64 {
        self.bottleneck_bps * self.base_rtt(flow).as_secs_f64() / (8.0 * pkt_bytes as f64)
    }
}
