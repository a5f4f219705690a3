//! Engine-level properties: conservation, determinism, ordering, capacity.

mod common;

use ccsim::cc::ControllerKind;
use ccsim::SimTime;
use common::{dumbbell, engine_with, PKT_BYTES};

#[test]
fn clock_advances_with_no_due_events() {
    let topo = dumbbell(1, 10e6, 0.020, 100);
    // Flow starts at t=5s; running to 1s processes nothing.
    let mut engine = engine_with(&topo, &[ControllerKind::Reno], &[5.0], 0.0, 0, true);
    engine.run_until(SimTime::from_secs_f64(1.0)).unwrap();
    assert_eq!(engine.now(), SimTime::from_secs_f64(1.0));
    // Only periodic samples may have fired; no traffic events.
    assert!(engine
        .event_trace()
        .unwrap()
        .iter()
        .all(|(_, kind, _, _)| *kind == 5));
}

#[test]
fn run_until_rejects_going_backwards() {
    let topo = dumbbell(1, 10e6, 0.020, 100);
    let mut engine = engine_with(&topo, &[ControllerKind::Reno], &[0.0], 0.0, 0, false);
    engine.run_until(SimTime::from_secs_f64(2.0)).unwrap();
    assert!(engine.run_until(SimTime::from_secs_f64(1.0)).is_err());
}

#[test]
fn simultaneous_events_fire_in_insertion_order() {
    let topo = dumbbell(3, 10e6, 0.020, 100);
    let kinds = [ControllerKind::Reno; 3];
    let mut engine = engine_with(&topo, &kinds, &[1.0; 3], 0.0, 0, true);
    engine.run_until(SimTime::from_secs_f64(1.0)).unwrap();
    let starts: Vec<u32> = engine
        .event_trace()
        .unwrap()
        .iter()
        .filter(|(_, kind, _, _)| *kind == 0)
        .map(|(_, _, flow, _)| *flow)
        .collect();
    assert_eq!(starts, vec![0, 1, 2], "flow starts keep insertion order");
}

#[test]
fn conservation_under_congestion_and_random_loss() {
    // Tight buffer plus Bernoulli loss: plenty of drops of both kinds.
    let topo = dumbbell(3, 10e6, 0.020, 25);
    let kinds = [
        ControllerKind::Reno,
        ControllerKind::Phcc,
        ControllerKind::Hstcp,
    ];
    let mut engine = engine_with(&topo, &kinds, &[0.0, 1.0, 2.0], 0.001, 7, false);
    engine.run_until(SimTime::from_secs_f64(30.0)).unwrap();
    // Stop senders and drain: nothing may remain in flight.
    engine.run_until_idle(SimTime::from_secs_f64(120.0)).unwrap();
    let out = engine.finish();

    let mut any_queue_drops = false;
    let mut any_random_drops = false;
    for f in &out.stats.flows {
        assert_eq!(
            f.released_pkts + f.retransmits,
            f.delivered_pkts + f.queue_drops + f.random_drops,
            "per-flow conservation after drain: {f:?}"
        );
        any_queue_drops |= f.queue_drops > 0;
        any_random_drops |= f.random_drops > 0;
    }
    assert!(any_queue_drops, "test should exercise buffer overflow");
    assert!(any_random_drops, "test should exercise the loss model");
    let per_flow_queue_drops: u64 = out.stats.flows.iter().map(|f| f.queue_drops).sum();
    assert_eq!(per_flow_queue_drops, out.stats.bottleneck_queue_drops);
}

#[test]
fn identical_seed_and_config_replay_identical_traces() {
    let topo = dumbbell(2, 10e6, 0.020, 50);
    let kinds = [ControllerKind::Phcc, ControllerKind::Reno];
    let run = |seed| {
        let mut engine = engine_with(&topo, &kinds, &[0.0, 0.5], 0.005, seed, true);
        engine.run_until(SimTime::from_secs_f64(20.0)).unwrap();
        let trace = engine.event_trace().unwrap().to_vec();
        let out = engine.finish();
        (trace, out)
    };
    let (trace_a, out_a) = run(42);
    let (trace_b, out_b) = run(42);
    assert_eq!(trace_a, trace_b, "event traces must be byte-identical");
    for (fa, fb) in out_a.flow_traces.iter().zip(&out_b.flow_traces) {
        assert_eq!(fa.deliveries, fb.deliveries);
    }
    assert_eq!(
        out_a.stats.events_processed,
        out_b.stats.events_processed
    );

    let (trace_c, _) = run(43);
    assert_ne!(trace_a, trace_c, "a different seed must change the run");
}

#[test]
fn lossless_flow_delivers_in_sequence_order() {
    let topo = dumbbell(1, 10e6, 0.020, 10_000);
    let mut engine = engine_with(&topo, &[ControllerKind::Reno], &[0.0], 0.0, 0, false);
    engine.run_until(SimTime::from_secs_f64(10.0)).unwrap();
    let out = engine.finish();
    let f = &out.stats.flows[0];
    assert_eq!(f.queue_drops + f.random_drops, 0);
    // With no drops and FIFO links, delivery count equals highest seq + 1;
    // deliveries are strictly time-ordered by construction of the trace.
    let times: Vec<u64> = out.flow_traces[0].deliveries.iter().map(|d| d.0).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));
    assert!(f.delivered_pkts > 100, "sanity: traffic flowed");
}

#[test]
fn bottleneck_never_exceeds_capacity_over_any_window() {
    let topo = dumbbell(2, 10e6, 0.020, 200);
    let kinds = [ControllerKind::Phcc, ControllerKind::Hstcp];
    let mut engine = engine_with(&topo, &kinds, &[0.0, 0.0], 0.0, 0, false);
    engine.run_until(SimTime::from_secs_f64(20.0)).unwrap();
    let out = engine.finish();

    // Merge all sink deliveries and slide a 100 ms window in 50 ms steps.
    let mut deliveries: Vec<(u64, u32)> = out
        .flow_traces
        .iter()
        .flat_map(|t| t.deliveries.iter().copied())
        .collect();
    deliveries.sort_unstable();
    let window_ns = 100_000_000u64;
    let step_ns = 50_000_000u64;
    let budget_bits = 10e6 * 0.1 + (PKT_BYTES * 8) as f64;
    let mut start = 0u64;
    let mut lo = 0usize;
    while start + window_ns <= 20_000_000_000 {
        while lo < deliveries.len() && deliveries[lo].0 < start {
            lo += 1;
        }
        let mut bits = 0u64;
        let mut i = lo;
        while i < deliveries.len() && deliveries[i].0 < start + window_ns {
            bits += deliveries[i].1 as u64 * 8;
            i += 1;
        }
        assert!(
            bits as f64 <= budget_bits,
            "window at {start}ns delivered {bits} bits > budget {budget_bits}"
        );
        start += step_ns;
    }
}

#[test]
fn engine_random_loss_rate_tracks_probability() {
    // Generous buffer so queue drops stay out of the picture.
    let topo = dumbbell(1, 20e6, 0.005, 50_000);
    let mut engine = engine_with(&topo, &[ControllerKind::Hstcp], &[0.0], 0.01, 3, false);
    engine.run_until(SimTime::from_secs_f64(60.0)).unwrap();
    let out = engine.finish();
    let f = &out.stats.flows[0];
    let draws = f.released_pkts + f.retransmits;
    let rate = f.random_drops as f64 / draws as f64;
    // The tight 1e6-draw bound lives in the unit tests; here we only check
    // the model is wired to bottleneck data arrivals, so the band covers
    // ~3 sigma of the smaller sample a loss-throttled sender produces.
    assert!(draws > 5_000, "need volume, got {draws}");
    assert!(
        (0.007..=0.013).contains(&rate),
        "random drop rate {rate} strays from 0.01"
    );
}

#[test]
fn rounds_track_the_rtt() {
    // PHCC doubles its window once per round below ssthresh; the spacing of
    // the doubling instants therefore measures the round cadence.
    let topo = dumbbell(1, 200e6, 0.020, 600);
    let flows = vec![common::flow_setup(
        ControllerKind::Phcc,
        &topo,
        0,
        0.0,
    )];
    let mut engine = ccsim::Engine::new(ccsim::EngineConfig {
        topology: topo.clone(),
        flows,
        data_pkt_bytes: PKT_BYTES,
        loss_prob: 0.0,
        seed: 0,
        sample_interval: SimTime::from_millis(2),
        record_event_trace: false,
    })
    .unwrap();
    engine.run_until(SimTime::from_secs_f64(1.0)).unwrap();
    let out = engine.finish();
    let samples = &out.flow_traces[0].samples;
    let mut crossings = Vec::new();
    for target in [4.0, 8.0, 16.0, 32.0] {
        if let Some(s) = samples.iter().find(|s| s.cwnd_pkts >= target) {
            crossings.push(s.t_s);
        }
    }
    assert!(crossings.len() >= 3, "needed several doubling rounds");
    let rtt = topo.base_rtt(0).as_secs_f64();
    for pair in crossings.windows(2) {
        let gap = pair[1] - pair[0];
        assert!(
            (gap - rtt).abs() < 0.015,
            "round gap {gap} strays from rtt {rtt}"
        );
    }
}
