//! Quick manual probe: run a small dumbbell scenario and print per-flow
//! samples plus the final counters.
//!
//! Usage: probe [n_flows] [cc,cc,...] [bottleneck_mbps] [buffer_pkts] [secs] [loss]

use ccsim::cc::{ControllerKind, ControllerParams};
use ccsim::metrics::{jain_fi, mean_throughput_bps, utilization};
use ccsim::sim::topology::{build_dumbbell, TopologyConfig};
use ccsim::{Engine, EngineConfig, FlowSetup, SimTime};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(1);
    let ccs: Vec<ControllerKind> = args
        .get(2)
        .map(|s| {
            s.split(',')
                .map(|c| ControllerKind::from_name(c).unwrap())
                .collect()
        })
        .unwrap_or_else(|| vec![ControllerKind::Phcc; n]);
    let mbps: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(200.0);
    let buffer: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(600);
    let secs: f64 = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(60.0);
    let loss: f64 = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(0.0);

    let topo = build_dumbbell(&TopologyConfig {
        n_flows: n,
        bottleneck_bps: mbps * 1e6,
        bottleneck_delay_s: 0.020,
        access_bps: mbps * 1e6,
        access_delay_s: vec![0.020; n],
        buffer_pkts: buffer,
    })
    .unwrap();

    let flows = (0..n)
        .map(|f| FlowSetup {
            kind: ccs[f % ccs.len()],
            params: ControllerParams::new(topo.bdp_pkts(f, 1000) + buffer as f64),
            start: SimTime::from_secs_f64(0.0),
        })
        .collect();

    let mut engine = Engine::new(EngineConfig {
        topology: topo.clone(),
        flows,
        data_pkt_bytes: 1000,
        loss_prob: loss,
        seed: 1,
        sample_interval: SimTime::from_millis(1000),
        record_event_trace: false,
    })
    .unwrap();

    let t0 = std::time::Instant::now();
    engine.run_until(SimTime::from_secs_f64(secs)).unwrap();
    let wall = t0.elapsed();
    let out = engine.finish();

    println!("wall: {wall:?}, events: {}", out.stats.events_processed);
    for (i, tr) in out.flow_traces.iter().enumerate() {
        print!("flow {i} [{}] cwnd: ", tr.cc_name);
        for s in tr.samples.iter().step_by(2) {
            print!("{:.0}@{:.0}s ", s.cwnd_pkts, s.t_s);
        }
        println!();
        print!("flow {i} phase: ");
        for s in tr.samples.iter().step_by(2) {
            print!("{}@{:.0}s ", &s.phase[..2.min(s.phase.len())], s.t_s);
        }
        println!();
    }
    let thr: Vec<f64> = out
        .flow_traces
        .iter()
        .map(|t| mean_throughput_bps(t, 10.0))
        .collect();
    let late: Vec<f64> = out
        .flow_traces
        .iter()
        .map(|t| mean_throughput_bps(t, secs / 2.0))
        .collect();
    println!(
        "late-half throughputs: {:?} Mbps, late FI {:.5}",
        late.iter().map(|x| (x / 1e6 * 100.0).round() / 100.0).collect::<Vec<_>>(),
        jain_fi(&late).unwrap_or(f64::NAN)
    );
    for (i, (t, f)) in thr.iter().zip(&out.stats.flows).enumerate() {
        println!(
            "flow {i}: {:.2} Mbps; released {} retx {} qdrop {} rdrop {}",
            t / 1e6,
            f.released_pkts,
            f.retransmits,
            f.queue_drops,
            f.random_drops
        );
    }
    println!(
        "util: {:.4}, fi: {:.5}, avg queue: {:.1} pkts, bn drops {}",
        utilization(&thr, topo.bottleneck_bps),
        jain_fi(&thr).unwrap_or(f64::NAN),
        out.stats.queue_integral_pkt_ns as f64 / (secs * 1e9),
        out.stats.bottleneck_queue_drops,
    );
}
