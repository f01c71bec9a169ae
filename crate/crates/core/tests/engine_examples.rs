use ccnsim::config::{ScenarioConfig, KB};
use ccnsim::engine::{run, run_trace, EngineError};
use ccnsim::strategies::StrategyKind;
use ccnsim::topology::{builtin, NodeId, Topology};
use ccnsim::workload::RequestEvent;

const DELAY_TOLERANCE_MS: f64 = 1e-9;

fn chain(delays: &[f64]) -> Topology {
    let text: String = delays
        .iter()
        .enumerate()
        .map(|(i, d)| format!("{i} {} {d}\n", i + 1))
        .collect();
    Topology::parse("chain", &text).unwrap()
}

fn chain_config(strategy: StrategyKind, cache_chunks: u64, producer: u32) -> ScenarioConfig {
    ScenarioConfig {
        topology: "chain".into(),
        catalog_size: 10,
        avg_filesize: 4 * KB,
        cache_bytes: cache_chunks * 4 * KB,
        strategy,
        warmup_fraction: 0.0,
        duration_s: 100.0,
        producer: Some(NodeId(producer)),
        clients: Some(vec![NodeId(0)]),
        ..ScenarioConfig::default()
    }
}

fn at(time: f64, object: u64) -> RequestEvent {
    RequestEvent {
        time,
        client: NodeId(0),
        object,
    }
}

#[test]
fn served_across_the_chain_every_time_without_caches() {
    // A-B-C, producer at C, client at A, nothing cached
    let topo = chain(&[1.0, 1.0]);
    let cfg = chain_config(StrategyKind::Lce, 0, 2);
    let trace: Vec<_> = (0..5).map(|i| at(i as f64, 1 + i % 2)).collect();
    let r = run_trace(&cfg, &topo, &trace).unwrap();
    assert_eq!(r.avg_hops(), Some(2.0));
    assert_eq!(r.cache_hit_ratio(), Some(0.0));
}

#[test]
fn delay_is_the_round_trip_propagation() {
    let topo = chain(&[2.0, 3.5, 1.5]);
    let cfg = chain_config(StrategyKind::Lce, 0, 3);
    let r = run_trace(&cfg, &topo, &[at(0.0, 1)]).unwrap();
    let expected = 2.0 * (2.0 + 3.5 + 1.5);
    assert!((r.avg_delay_ms().unwrap() - expected).abs() < DELAY_TOLERANCE_MS);
}

#[test]
fn lcd_moves_one_hop_toward_the_client_per_hit() {
    let topo = chain(&[1.0, 1.0, 1.0]);
    let cfg = chain_config(StrategyKind::Lcd, 4, 3);
    let one = run_trace(&cfg, &topo, &[at(0.0, 1)]).unwrap();
    let cached: Vec<_> = one.nodes.iter().map(|n| n.occupancy).collect();
    // producer hit plants a copy one hop down
    assert_eq!(cached, [0, 0, 1, 0]);
    let three = run_trace(
        &cfg,
        &topo,
        &[at(0.0, 1), at(1.0, 1), at(2.0, 1), at(3.0, 1)],
    )
    .unwrap();
    assert_eq!(three.hops_total, 3 + 2 + 1);
    assert_eq!(three.cache_hits, 3);
    assert_eq!(three.replication_count, 3);
}

#[test]
fn mpc_replicates_after_threshold_requests() {
    let topo = chain(&[1.0, 1.0, 1.0]);
    let cfg = chain_config(StrategyKind::Mpc, 4, 3);
    let trace: Vec<_> = (0..4).map(|i| at(i as f64, 1)).collect();
    let r = run_trace(&cfg, &topo, &trace).unwrap();
    // third request: router 0 crosses the threshold before forwarding, keeps a
    // copy and pushes one to router 1, where the Interest then hits; router 1
    // crosses too and pushes to 0 (refresh) and 2
    assert_eq!(r.cache_hits, 2);
    assert_eq!(r.hops_total, 3 + 3 + 1);
    let cached: Vec<_> = r.nodes.iter().map(|n| n.occupancy).collect();
    assert_eq!(cached, [1, 1, 1, 0]);
    assert_eq!(r.replication_count, 2 + 3);
    assert_eq!(r.opportunistic_insertions, 0);
}

#[test]
fn simultaneous_requests_are_aggregated() {
    let topo = chain(&[1.0, 1.0]);
    let mut cfg = chain_config(StrategyKind::Lce, 0, 2);
    cfg.clients = None;
    let trace = [
        at(0.0, 1),
        RequestEvent {
            time: 0.0,
            client: NodeId(1),
            object: 1,
        },
    ];
    let r = run_trace(&cfg, &topo, &trace).unwrap();
    assert_eq!(r.deliveries, 2);
    assert_eq!(r.producer_hits, 1);
    assert_eq!(r.pit_residual, 0);
    assert_eq!(r.hops_total, 2 + 1);
}

#[test]
fn multi_chunk_objects_are_fetched_in_sequence() {
    let topo = chain(&[1.0]);
    let cfg = ScenarioConfig {
        avg_filesize: 10 * KB,
        ..chain_config(StrategyKind::Lce, 0, 1)
    };
    let r = run_trace(&cfg, &topo, &[at(0.0, 1)]).unwrap();
    assert_eq!(r.chunk_interests, 3);
    // each chunk waits for the previous one: 3 round trips of 2 ms
    assert!((r.avg_delay_ms().unwrap() - 2.0).abs() < DELAY_TOLERANCE_MS);
    // per chunk: Interest at 0, Interest at 1, Data at 0
    assert_eq!(r.events_processed, 1 + 3 * 3);
}

#[test]
fn zero_capacity_means_zero_hits_for_every_strategy() {
    let topo = builtin::load("abilene").unwrap().unwrap();
    for k in StrategyKind::ALL {
        let cfg = ScenarioConfig {
            catalog_size: 30,
            cache_bytes: 0,
            duration_s: 300.0,
            strategy: k,
            ..ScenarioConfig::default()
        };
        let r = run(&cfg, &topo).unwrap();
        assert!(r.chunk_interests > 0);
        assert_eq!(r.cache_hit_ratio(), Some(0.0), "{k}");
        assert_eq!(r.replication_count, 0, "{k}");
    }
}

#[test]
fn empty_workload_has_undefined_ratio() {
    let topo = builtin::load("abilene").unwrap().unwrap();
    let cfg = ScenarioConfig {
        request_rate: 0.0,
        ..ScenarioConfig::default()
    };
    let r = run(&cfg, &topo).unwrap();
    assert_eq!(r.events_processed, 0);
    assert_eq!(r.cache_hit_ratio(), None);
    assert_eq!(r.avg_hops(), None);
    assert_eq!(r.avg_delay_ms(), None);
}

#[test]
fn warm_up_requests_are_not_measured() {
    let topo = chain(&[1.0]);
    let cfg = ScenarioConfig {
        warmup_fraction: 0.5,
        ..chain_config(StrategyKind::Lce, 4, 1)
    };
    let r = run_trace(&cfg, &topo, &[at(10.0, 1), at(60.0, 1)]).unwrap();
    assert_eq!(r.chunk_interests, 1);
    assert_eq!(r.cache_hit_ratio(), Some(1.0));
}

#[test]
fn invalid_traces_are_rejected() {
    let topo = chain(&[1.0]);
    let cfg = chain_config(StrategyKind::Lce, 1, 1);
    for bad in [
        vec![at(1.0, 1), at(0.5, 1)],
        vec![at(0.0, 0)],
        vec![at(0.0, 11)],
        vec![RequestEvent {
            time: 0.0,
            client: NodeId(9),
            object: 1,
        }],
    ] {
        assert!(run_trace(&cfg, &topo, &bad).is_err(), "{bad:?}");
    }
}

#[test]
fn sub_chunk_cache_is_a_configuration_error() {
    let topo = chain(&[1.0]);
    let cfg = ScenarioConfig {
        cache_bytes: 100,
        ..chain_config(StrategyKind::Lce, 0, 1)
    };
    assert!(matches!(run(&cfg, &topo), Err(EngineError::Config(_))));
}

#[test]
fn avg_hops_bounded_by_diameter_on_builtins() {
    for name in builtin::names() {
        let topo = builtin::load(name).unwrap().unwrap();
        for k in [
            StrategyKind::Lce,
            StrategyKind::ProbCache,
            StrategyKind::Mpc,
        ] {
            let cfg = ScenarioConfig {
                topology: name.to_string(),
                catalog_size: 500,
                cache_bytes: 20 * 4 * KB,
                duration_s: 100.0,
                strategy: k,
                ..ScenarioConfig::default()
            };
            let r = run(&cfg, &topo).unwrap();
            assert!(r.avg_hops().unwrap() <= topo.diameter() as f64);
            assert!(r.max_hops <= topo.diameter());
        }
    }
}
