//! Deterministic discrete-event loop and metrics accounting.
//!
//! One run owns every router's state and a single event queue ordered by
//! `(time, sequence number)`. Object requests are expanded into sequential
//! chunk Interests: chunk `k + 1` is requested when chunk `k` arrives.
//!
//! Accounting: every chunk Interest issued after warm-up ends in exactly one
//! delivery, attributed to the Content Store or the producer that answered
//! it. Aggregated Interests inherit the source of the Data that satisfied
//! them. The cache hit ratio is therefore the share of chunk requests
//! absorbed by in-network caches.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;

use rand::SeedableRng;
use thiserror::Error;

use crate::ccn_node::{
    extend_trail, populate_fib, trail_hops, ContentName, Face, InterestAction, NodeError,
    NodeState, PitFace, Trail,
};
use crate::config::{ConfigError, ScenarioConfig};
use crate::strategies::{CachingStrategy, PathContext, PathHop, ReplicationOrder};
use crate::topology::{CentralityMap, NodeId, Topology, TopologyError};
use crate::workload::{
    generate_workload, ArrivalProcess, Catalog, MZipf, RequestEvent, WorkloadError,
};
use crate::{derive_seed, SimRng};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("topology: {0}")]
    Topology(#[from] TopologyError),
    #[error("workload: {0}")]
    Workload(#[from] WorkloadError),
    #[error("forwarding: {0}")]
    Forwarding(#[from] NodeError),
    #[error("{0}")]
    Invalid(String),
}

/// `hits / (hits + misses)`; `None` when nothing was requested.
pub fn cache_hit_ratio(hits: u64, misses: u64) -> Option<f64> {
    let total = hits + misses;
    (total > 0).then(|| hits as f64 / total as f64)
}

/// Mean hop count over delivered chunks; `None` without deliveries.
pub fn avg_hops(hops: &[u32]) -> Option<f64> {
    if hops.is_empty() {
        return None;
    }
    Some(hops.iter().map(|&h| h as f64).sum::<f64>() / hops.len() as f64)
}

/// Daily traffic kept off upstream links, rounded to 0.1 TB.
///
/// Volumes are decimal terabytes (1 PB = 1000 TB).
pub fn traffic_savings(daily_volume_tb: f64, hit_ratio: f64) -> Result<f64, EngineError> {
    if !(daily_volume_tb >= 0.0 && daily_volume_tb.is_finite()) {
        return Err(EngineError::Invalid(format!(
            "daily volume must be non-negative, got {daily_volume_tb}"
        )));
    }
    if !(0.0..=1.0).contains(&hit_ratio) {
        return Err(EngineError::Invalid(format!(
            "hit ratio must lie in [0, 1], got {hit_ratio}"
        )));
    }
    Ok((daily_volume_tb * hit_ratio * 10.0).round() / 10.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeMetrics {
    pub node: NodeId,
    pub cs_hits: u64,
    pub cs_misses: u64,
    pub producer_hits: u64,
    pub opportunistic_insertions: u64,
    pub replicas_received: u64,
    pub occupancy: usize,
    pub capacity: usize,
}

impl NodeMetrics {
    pub fn cache_hit_ratio(&self) -> Option<f64> {
        cache_hit_ratio(self.cs_hits, self.cs_misses)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub scenario: String,
    pub strategy: String,
    pub policy: String,
    pub topology: String,
    pub cache_bytes: u64,
    pub scale: u64,
    pub seed: u64,
    pub config_hash: String,
    pub producer: NodeId,

    /// Measured chunk Interests served from a Content Store.
    pub cache_hits: u64,
    /// Measured chunk Interests that had to be served by the producer.
    pub cache_misses: u64,
    /// Interests answered by the producer's router, aggregated ones excluded.
    pub producer_hits: u64,
    pub chunk_interests: u64,
    pub deliveries: u64,
    pub hops_total: u64,
    pub max_hops: u32,
    pub delay_total_ms: f64,
    pub replication_count: u64,
    pub opportunistic_insertions: u64,
    pub object_requests: u64,
    pub events_processed: u64,
    pub unsolicited_data: u64,
    /// Pending Interest Table entries left after the queue drained.
    pub pit_residual: usize,
    /// Times a Content Store was found above capacity after an event.
    pub capacity_violations: u64,
    pub nodes: Vec<NodeMetrics>,
}

impl MetricsReport {
    pub fn cache_hit_ratio(&self) -> Option<f64> {
        cache_hit_ratio(self.cache_hits, self.cache_misses)
    }

    pub fn avg_hops(&self) -> Option<f64> {
        (self.deliveries > 0).then(|| self.hops_total as f64 / self.deliveries as f64)
    }

    pub fn avg_delay_ms(&self) -> Option<f64> {
        (self.deliveries > 0).then(|| self.delay_total_ms / self.deliveries as f64)
    }

    pub fn summary(&self) -> String {
        let na =
            |v: Option<f64>, prec: usize| v.map_or("NA".to_string(), |x| format!("{x:.prec$}"));
        format!(
            "scenario {} | strategy {} | policy {} | topology {} | seed {}\n\
             cache hit ratio   {}\n\
             avg hops          {}\n\
             avg delay (ms)    {}\n\
             chunk requests    {} ({} cache hits, {} producer)\n\
             object requests   {}\n\
             replications      {}\n\
             events processed  {}",
            self.scenario,
            self.strategy,
            self.policy,
            self.topology,
            self.seed,
            na(self.cache_hit_ratio(), 6),
            na(self.avg_hops(), 4),
            na(self.avg_delay_ms(), 3),
            self.chunk_interests,
            self.cache_hits,
            self.cache_misses,
            self.object_requests,
            self.replication_count,
            self.events_processed,
        )
    }
}

/// Router hosting the producer when none is configured: the leaf farthest
/// from the highest-betweenness router, so requests cross the network.
pub fn default_producer(topo: &Topology, centrality: &CentralityMap) -> NodeId {
    if topo.node_count() == 1 {
        return NodeId(0);
    }
    let hub = centrality.argmax();
    let dist = topo.hop_distances(hub);
    let farthest = |leaves_only: bool| {
        topo.nodes()
            .filter(|&n| n != hub && (!leaves_only || topo.degree(n) == 1))
            .max_by(|&a, &b| {
                dist[a.index()]
                    .cmp(&dist[b.index()])
                    .then_with(|| b.cmp(&a))
            })
    };
    farthest(true).or_else(|| farthest(false)).unwrap_or(hub)
}

/// Runs one scenario to quiescence.
pub fn run(config: &ScenarioConfig, topo: &Topology) -> Result<MetricsReport, EngineError> {
    simulate(config, topo, None)
}

/// Like [`run`] but replays `requests` instead of sampling a workload.
/// Requests must be time-ordered, name existing routers and stay inside the
/// scaled catalog.
pub fn run_trace(
    config: &ScenarioConfig,
    topo: &Topology,
    requests: &[RequestEvent],
) -> Result<MetricsReport, EngineError> {
    simulate(config, topo, Some(requests))
}

fn simulate(
    config: &ScenarioConfig,
    topo: &Topology,
    trace: Option<&[RequestEvent]>,
) -> Result<MetricsReport, EngineError> {
    config.validate()?;
    let catalog = Catalog::new(
        config.scaled_catalog_size(),
        config.avg_filesize,
        config.chunk_size,
    )?;
    let chunks = u32::try_from(catalog.chunks_per_object)
        .map_err(|_| EngineError::Invalid("too many chunks per object".into()))?;
    let centrality = topo.betweenness();
    let producer = match config.producer {
        Some(p) if topo.contains(p) => p,
        Some(p) => return Err(TopologyError::UnknownNode(p).into()),
        None => default_producer(topo, &centrality),
    };
    let clients: Vec<NodeId> = match &config.clients {
        Some(list) => {
            if let Some(&bad) = list.iter().find(|n| !topo.contains(**n)) {
                return Err(TopologyError::UnknownNode(bad).into());
            }
            list.clone()
        }
        None => {
            let others: Vec<_> = topo.nodes().filter(|&n| n != producer).collect();
            if others.is_empty() {
                vec![producer]
            } else {
                others
            }
        }
    };

    let generated;
    let requests: &[RequestEvent] = match trace {
        Some(trace) => {
            check_trace(trace, topo, catalog.n_objects)?;
            trace
        }
        None => {
            let popularity = MZipf::new(config.alpha, config.beta, catalog.n_objects)?.sampler();
            let mut workload_rng = SimRng::seed_from_u64(config.seed);
            workload_rng.set_stream(1);
            generated = generate_workload(
                &ArrivalProcess {
                    rate_per_client: config.request_rate,
                    duration_s: config.duration_s,
                },
                &popularity,
                &clients,
                &mut workload_rng,
            )?;
            &generated
        }
    };

    let strategy = config.caching_strategy();
    let capacity = config.cache_capacity_chunks();
    let fibs = populate_fib(topo, producer)?;
    let pit_timeout = 4.0 * max_path_delay_ms(topo) / 1000.0;
    let nodes = fibs
        .into_iter()
        .enumerate()
        .map(|(i, fib)| {
            let id = NodeId::from(i);
            let mut n = NodeState::new(
                id,
                capacity,
                config.policy,
                &strategy,
                fib,
                derive_seed(config.seed, 100 + i as u64),
            );
            n.is_producer = id == producer;
            n.pit_timeout = pit_timeout;
            n
        })
        .collect();
    let mut decision_rng = SimRng::seed_from_u64(config.seed);
    decision_rng.set_stream(2);

    let mut sim = Simulation {
        topo,
        centrality,
        strategy,
        nodes,
        queue: BinaryHeap::new(),
        seq: 0,
        sessions: Vec::new(),
        decision_rng,
        chunks_per_object: chunks,
        warmup_end: config.duration_s * config.warmup_fraction,
        tally: Tally::default(),
    };
    sim.run(requests)?;

    let Simulation { nodes, tally, .. } = sim;
    let node_metrics: Vec<NodeMetrics> = nodes
        .iter()
        .map(|n| NodeMetrics {
            node: n.id,
            cs_hits: n.counters.cs_hits,
            cs_misses: n.counters.cs_misses,
            producer_hits: n.counters.producer_hits,
            opportunistic_insertions: n.counters.opportunistic_insertions,
            replicas_received: n.counters.replicas_received,
            occupancy: n.cs.len(),
            capacity: n.cs.capacity(),
        })
        .collect();
    Ok(MetricsReport {
        scenario: config.scenario.to_string(),
        strategy: config.strategy.to_string(),
        policy: config.policy.to_string(),
        topology: topo.name().to_string(),
        cache_bytes: config.cache_bytes,
        scale: config.scale,
        seed: config.seed,
        config_hash: config.config_hash(),
        producer,
        cache_hits: tally.cache_hits,
        cache_misses: tally.producer_deliveries,
        producer_hits: nodes[producer.index()].counters.producer_hits,
        chunk_interests: tally.chunk_interests,
        deliveries: tally.deliveries,
        hops_total: tally.hops_total,
        max_hops: tally.max_hops,
        delay_total_ms: tally.delay_total_ms,
        replication_count: tally.replications,
        opportunistic_insertions: nodes
            .iter()
            .map(|n| n.counters.opportunistic_insertions)
            .sum(),
        object_requests: requests.len() as u64,
        events_processed: tally.events,
        unsolicited_data: nodes.iter().map(|n| n.counters.unsolicited).sum(),
        pit_residual: nodes.iter().map(|n| n.pit.len()).sum(),
        capacity_violations: tally.capacity_violations,
        nodes: node_metrics,
    })
}

fn check_trace(trace: &[RequestEvent], topo: &Topology, n_objects: u64) -> Result<(), EngineError> {
    let mut last = 0.0;
    for (i, r) in trace.iter().enumerate() {
        if !(r.time.is_finite() && r.time >= last) {
            return Err(EngineError::Invalid(format!(
                "request {i}: time {} is negative or out of order",
                r.time
            )));
        }
        if !topo.contains(r.client) {
            return Err(TopologyError::UnknownNode(r.client).into());
        }
        if r.object == 0 || r.object > n_objects {
            return Err(EngineError::Invalid(format!(
                "request {i}: object rank {} outside 1..={n_objects}",
                r.object
            )));
        }
        last = r.time;
    }
    Ok(())
}

/// Largest delay along any routed path, in milliseconds.
fn max_path_delay_ms(topo: &Topology) -> f64 {
    let mut max = 0.0f64;
    for a in topo.nodes() {
        for b in topo.nodes().filter(|&b| b > a) {
            let path = topo.shortest_path(a, b).expect("nodes exist");
            max = max.max(topo.path_delay_ms(&path));
        }
    }
    max
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    Cache,
    Producer,
}

#[derive(Debug)]
enum Event {
    Request {
        client: NodeId,
        object: u64,
    },
    Interest {
        node: NodeId,
        name: ContentName,
        from: Face,
        trail: Trail,
    },
    Data {
        node: NodeId,
        name: ContentName,
        path: Rc<[PathHop]>,
        position: usize,
        source: Source,
    },
}

struct Scheduled {
    time: f64,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Session {
    client: NodeId,
    object: u64,
    next_chunk: u32,
    issued_at: f64,
}

#[derive(Default)]
struct Tally {
    chunk_interests: u64,
    deliveries: u64,
    cache_hits: u64,
    producer_deliveries: u64,
    hops_total: u64,
    max_hops: u32,
    delay_total_ms: f64,
    replications: u64,
    events: u64,
    capacity_violations: u64,
}

struct Simulation<'t> {
    topo: &'t Topology,
    centrality: CentralityMap,
    strategy: CachingStrategy,
    nodes: Vec<NodeState>,
    queue: BinaryHeap<Scheduled>,
    seq: u64,
    sessions: Vec<Session>,
    decision_rng: SimRng,
    chunks_per_object: u32,
    warmup_end: f64,
    tally: Tally,
}

impl Simulation<'_> {
    fn schedule(&mut self, time: f64, event: Event) {
        self.seq += 1;
        self.queue.push(Scheduled {
            time,
            seq: self.seq,
            event,
        });
    }

    fn link_delay_s(&self, a: NodeId, b: NodeId) -> f64 {
        self.topo.link_delay(a, b).expect("adjacent routers") / 1000.0
    }

    fn run(&mut self, requests: &[RequestEvent]) -> Result<(), EngineError> {
        for r in requests {
            self.schedule(
                r.time,
                Event::Request {
                    client: r.client,
                    object: r.object,
                },
            );
        }
        while let Some(Scheduled { time, event, .. }) = self.queue.pop() {
            self.tally.events += 1;
            match event {
                Event::Request { client, object } => {
                    let id = self.sessions.len() as u64;
                    self.sessions.push(Session {
                        client,
                        object,
                        next_chunk: 0,
                        issued_at: time,
                    });
                    self.issue_next_chunk(id, time);
                }
                Event::Interest {
                    node,
                    name,
                    from,
                    trail,
                } => self.on_interest(node, name, from, trail, time)?,
                Event::Data {
                    node,
                    name,
                    path,
                    position,
                    source,
                } => self.on_data(node, name, path, position, source, time),
            }
        }
        Ok(())
    }

    fn issue_next_chunk(&mut self, session: u64, now: f64) {
        let s = &mut self.sessions[session as usize];
        if s.next_chunk >= self.chunks_per_object {
            return;
        }
        let name = ContentName::new(s.object, s.next_chunk);
        s.next_chunk += 1;
        s.issued_at = now;
        let client = s.client;
        if now >= self.warmup_end {
            self.tally.chunk_interests += 1;
        }
        self.schedule(
            now,
            Event::Interest {
                node: client,
                name,
                from: Face::Client(session),
                trail: None,
            },
        );
    }

    fn on_interest(
        &mut self,
        v: NodeId,
        name: ContentName,
        from: Face,
        trail: Trail,
        now: f64,
    ) -> Result<(), EngineError> {
        let strategy = self.strategy;
        let node = &mut self.nodes[v.index()];
        let action = node.process_interest(
            name,
            PitFace {
                face: from,
                trail: trail.clone(),
            },
            now,
        )?;
        let orders = strategy.on_request_observed(node, name, self.topo.neighbors(v));
        self.apply_replications(&orders);

        match action {
            InterestAction::ServeFromCs | InterestAction::ServeFromProducer => {
                let source = if action == InterestAction::ServeFromCs {
                    Source::Cache
                } else {
                    Source::Producer
                };
                let node = &mut self.nodes[v.index()];
                let mut path = vec![strategy.annotate(node, &name)];
                path.extend(trail_hops(&trail).copied());
                let path: Rc<[PathHop]> = path.into();
                let ctx = PathContext {
                    path: &path,
                    position: 0,
                    centrality: &self.centrality,
                };
                if let Some(order) = strategy.on_cache_hit(node, name, &ctx) {
                    self.apply_replications(&[order]);
                }
                self.send_data(v, from, name, path, 0, source, now);
            }
            InterestAction::Aggregated => {}
            InterestAction::Forward(next) => {
                let hop = strategy.annotate(&mut self.nodes[v.index()], &name);
                let trail = extend_trail(&trail, hop);
                let at = now + self.link_delay_s(v, next);
                self.schedule(
                    at,
                    Event::Interest {
                        node: next,
                        name,
                        from: Face::Node(v),
                        trail,
                    },
                );
            }
        }
        Ok(())
    }

    fn on_data(
        &mut self,
        v: NodeId,
        name: ContentName,
        path: Rc<[PathHop]>,
        position: usize,
        source: Source,
        now: f64,
    ) {
        let ctx = PathContext {
            path: &path,
            position,
            centrality: &self.centrality,
        };
        let node = &mut self.nodes[v.index()];
        let Ok(outcome) =
            node.process_data(name, &self.strategy, &ctx, &mut self.decision_rng, now)
        else {
            // unsolicited Data is counted by the node and dropped
            return;
        };
        if node.cs.len() > node.cs.capacity() {
            self.tally.capacity_violations += 1;
        }
        for (i, pf) in outcome.faces.into_iter().enumerate() {
            // faces[0] created the entry, so the arriving path already
            // continues along its trail
            let branch: Rc<[PathHop]> = if i == 0 {
                path.clone()
            } else {
                path[..=position]
                    .iter()
                    .copied()
                    .chain(trail_hops(&pf.trail).copied())
                    .collect()
            };
            self.send_data(v, pf.face, name, branch, position, source, now);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn send_data(
        &mut self,
        at: NodeId,
        to: Face,
        name: ContentName,
        path: Rc<[PathHop]>,
        position: usize,
        source: Source,
        now: f64,
    ) {
        match to {
            Face::Client(session) => self.deliver(session, position as u32, source, now),
            Face::Node(next) => {
                let t = now + self.link_delay_s(at, next);
                self.schedule(
                    t,
                    Event::Data {
                        node: next,
                        name,
                        path,
                        position: position + 1,
                        source,
                    },
                );
            }
        }
    }

    fn deliver(&mut self, session: u64, hops: u32, source: Source, now: f64) {
        let issued_at = self.sessions[session as usize].issued_at;
        if issued_at >= self.warmup_end {
            let t = &mut self.tally;
            t.deliveries += 1;
            t.hops_total += hops as u64;
            t.max_hops = t.max_hops.max(hops);
            t.delay_total_ms += (now - issued_at) * 1000.0;
            match source {
                Source::Cache => t.cache_hits += 1,
                Source::Producer => t.producer_deliveries += 1,
            }
        }
        self.issue_next_chunk(session, now);
    }

    fn apply_replications(&mut self, orders: &[ReplicationOrder]) {
        for order in orders {
            let target = &mut self.nodes[order.target.index()];
            if target.is_producer || target.cs.capacity() == 0 {
                continue;
            }
            target.cs.insert(order.name);
            target.counters.replicas_received += 1;
            self.tally.replications += 1;
            if target.cs.len() > target.cs.capacity() {
                self.tally.capacity_violations += 1;
            }
        }
    }
}
