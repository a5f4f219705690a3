use ccsim::cc::{ControllerKind, ControllerParams};
use ccsim::sim::engine::{Engine, EngineConfig, FlowSetup};
use ccsim::sim::topology::{build_dumbbell, Topology, TopologyConfig};
use ccsim::SimTime;

pub const PKT_BYTES: u32 = 1000;

pub fn dumbbell(n: usize, bottleneck_bps: f64, access_delay_s: f64, buffer: usize) -> Topology {
    build_dumbbell(&TopologyConfig {
        n_flows: n,
        bottleneck_bps,
        bottleneck_delay_s: 0.020,
        access_bps: bottleneck_bps,
        access_delay_s: vec![access_delay_s; n],
        buffer_pkts: buffer,
    })
    .expect("valid topology")
}

pub fn flow_setup(kind: ControllerKind, topo: &Topology, flow: usize, start_s: f64) -> FlowSetup {
    // Receive-window-like cap: a flow never needs more than its pipe plus
    // the whole bottleneck buffer.
    let cwnd_max = topo.bdp_pkts(flow, PKT_BYTES) + topo.buffer_pkts as f64;
    FlowSetup {
        kind,
        params: ControllerParams::new(cwnd_max),
        start: SimTime::from_secs_f64(start_s),
    }
}

pub fn engine_with(
    topo: &Topology,
    kinds: &[ControllerKind],
    starts_s: &[f64],
    loss_prob: f64,
    seed: u64,
    trace_events: bool,
) -> Engine {
    assert_eq!(kinds.len(), topo.n_flows);
    assert_eq!(starts_s.len(), topo.n_flows);
    let flows = kinds
        .iter()
        .zip(starts_s)
        .enumerate()
        .map(|(i, (k, s))| flow_setup(*k, topo, i, *s))
        .collect();
    Engine::new(EngineConfig {
        topology: topo.clone(),
        flows,
        data_pkt_bytes: PKT_BYTES,
        loss_prob,
        seed,
        sample_interval: SimTime::from_millis(500),
        record_event_trace: trace_events,
    })
    .expect("valid engine config")
}
