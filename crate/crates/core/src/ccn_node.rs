//! Per-router CCN pipeline: Content Store, Pending Interest Table, FIB.
//!
//! Interests go CS → PIT → FIB in that order. Data consumes the PIT entry,
//! asks the caching strategy whether to keep a copy, and fans out to every
//! face recorded in the entry.

use std::fmt;
use std::ops::RangeInclusive;
use std::rc::Rc;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::content_store::{ContentStore, Insert, ReplacementPolicy};
use crate::strategies::{CachingStrategy, PathContext, PathHop, StrategyState};
use crate::topology::{NodeId, Topology, TopologyError};
use crate::SimRng;

/// Object rank plus chunk index; the unit of caching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContentName {
    pub object: u64,
    pub chunk: u32,
}

impl ContentName {
    pub const fn new(object: u64, chunk: u32) -> Self {
        ContentName { object, chunk }
    }
}

impl fmt::Display for ContentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "/obj/{}/chunk/{}", self.object, self.chunk)
    }
}

/// Where an Interest came from and where its Data must go back to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    Node(NodeId),
    /// A local consumer; the id identifies its download session.
    Client(u64),
}

/// Routers an Interest has crossed, newest first. Shared between PIT entries
/// and in-flight messages so forwarding never copies the path.
pub type Trail = Option<Rc<TrailLink>>;

#[derive(Debug)]
pub struct TrailLink {
    pub hop: PathHop,
    pub prev: Trail,
}

pub fn extend_trail(trail: &Trail, hop: PathHop) -> Trail {
    Some(Rc::new(TrailLink {
        hop,
        prev: trail.clone(),
    }))
}

/// Iterates a trail from the most recent router back to the requester's.
pub fn trail_hops(trail: &Trail) -> impl Iterator<Item = &PathHop> {
    std::iter::successors(trail.as_deref(), |link| link.prev.as_deref()).map(|l| &l.hop)
}

#[derive(Debug, Clone)]
pub struct PitFace {
    pub face: Face,
    /// Routers the Interest crossed before reaching this node.
    pub trail: Trail,
}

#[derive(Debug, Clone)]
pub struct PitEntry {
    pub name: ContentName,
    pub faces: Vec<PitFace>,
    pub created_at: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FibEntry {
    pub objects: RangeInclusive<u64>,
    /// `None` means the producer is attached here.
    pub next_hop: Option<NodeId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Fib {
    entries: Vec<FibEntry>,
}

impl Fib {
    pub fn new(entries: Vec<FibEntry>) -> Self {
        Fib { entries }
    }

    pub fn lookup(&self, name: &ContentName) -> Option<&FibEntry> {
        self.entries
            .iter()
            .find(|e| e.objects.contains(&name.object))
    }

    pub fn entries(&self) -> &[FibEntry] {
        &self.entries
    }
}

/// One FIB per router: each points along `shortest_path(node, producer)`.
pub fn populate_fib(topo: &Topology, producer: NodeId) -> Result<Vec<Fib>, TopologyError> {
    if !topo.contains(producer) {
        return Err(TopologyError::UnknownNode(producer));
    }
    topo.nodes()
        .map(|node| {
            let path = topo.shortest_path(node, producer)?;
            Ok(Fib::new(vec![FibEntry {
                objects: 1..=u64::MAX,
                next_hop: path.get(1).copied(),
            }]))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterestAction {
    ServeFromCs,
    /// This router hosts the producer, which holds the whole catalog.
    ServeFromProducer,
    /// A request for the name is already pending; the face was recorded.
    Aggregated,
    Forward(NodeId),
}

#[derive(Debug, Error, PartialEq)]
pub enum NodeError {
    #[error("node {node}: no FIB route for {name}")]
    NoRoute { node: NodeId, name: ContentName },
    #[error("node {node}: unsolicited Data for {name}")]
    Unsolicited { node: NodeId, name: ContentName },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NodeCounters {
    pub cs_hits: u64,
    pub cs_misses: u64,
    pub producer_hits: u64,
    pub aggregated: u64,
    pub forwarded: u64,
    pub unsolicited: u64,
    pub opportunistic_insertions: u64,
    pub replicas_received: u64,
}

#[derive(Debug)]
pub struct DataOutcome {
    pub faces: Vec<PitFace>,
    pub cached: bool,
    pub evicted: Option<ContentName>,
}

#[derive(Debug)]
pub struct NodeState {
    pub id: NodeId,
    pub cs: ContentStore,
    pub pit: FxHashMap<ContentName, PitEntry>,
    pub fib: Fib,
    pub strategy_state: StrategyState,
    pub is_producer: bool,
    pub pit_timeout: f64,
    pub counters: NodeCounters,
}

impl NodeState {
    pub fn new(
        id: NodeId,
        cache_capacity: usize,
        policy: ReplacementPolicy,
        strategy: &CachingStrategy,
        fib: Fib,
        seed: u64,
    ) -> Self {
        NodeState {
            id,
            cs: ContentStore::new(cache_capacity, policy, seed),
            pit: FxHashMap::default(),
            fib,
            strategy_state: strategy.init_state(cache_capacity, seed ^ 0x9e37_79b9_7f4a_7c15),
            is_producer: false,
            pit_timeout: f64::INFINITY,
            counters: NodeCounters::default(),
        }
    }

    pub fn process_interest(
        &mut self,
        name: ContentName,
        from: PitFace,
        now: f64,
    ) -> Result<InterestAction, NodeError> {
        if self.is_producer {
            self.counters.producer_hits += 1;
            return Ok(InterestAction::ServeFromProducer);
        }
        if self.cs.lookup(&name) {
            self.counters.cs_hits += 1;
            return Ok(InterestAction::ServeFromCs);
        }
        self.counters.cs_misses += 1;

        if let Some(entry) = self.pit.get_mut(&name) {
            if now - entry.created_at <= self.pit_timeout {
                if !entry.faces.iter().any(|f| f.face == from.face) {
                    entry.faces.push(from);
                }
                self.counters.aggregated += 1;
                return Ok(InterestAction::Aggregated);
            }
            self.pit.remove(&name);
        }

        let next = self
            .fib
            .lookup(&name)
            .and_then(|e| e.next_hop)
            .ok_or(NodeError::NoRoute {
                node: self.id,
                name,
            })?;
        self.pit.insert(
            name,
            PitEntry {
                name,
                faces: vec![from],
                created_at: now,
            },
        );
        self.counters.forwarded += 1;
        Ok(InterestAction::Forward(next))
    }

    pub fn process_data(
        &mut self,
        name: ContentName,
        strategy: &CachingStrategy,
        ctx: &PathContext<'_>,
        rng: &mut SimRng,
        now: f64,
    ) -> Result<DataOutcome, NodeError> {
        let entry = match self.pit.remove(&name) {
            Some(e) if now - e.created_at <= self.pit_timeout => e,
            _ => {
                self.counters.unsolicited += 1;
                return Err(NodeError::Unsolicited {
                    node: self.id,
                    name,
                });
            }
        };
        let mut cached = false;
        let mut evicted = None;
        if strategy.decide_on_data(self, name, ctx, rng) {
            cached = true;
            self.counters.opportunistic_insertions += 1;
            if let Insert::Stored { evicted: e } = self.cs.insert(name) {
                evicted = e;
            }
        }
        Ok(DataOutcome {
            faces: entry.faces,
            cached,
            evicted,
        })
    }

    /// Drops PIT entries older than the timeout.
    pub fn expire_pit(&mut self, now: f64) -> usize {
        let before = self.pit.len();
        let timeout = self.pit_timeout;
        self.pit.retain(|_, e| now - e.created_at <= timeout);
        before - self.pit.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::CentralityMap;
    use rand::SeedableRng;

    fn chain() -> Topology {
        Topology::parse("chain", "0 1 1\n1 2 1\n").unwrap()
    }

    fn node(id: u32, fib: Fib, strategy: &CachingStrategy) -> NodeState {
        NodeState::new(
            NodeId(id),
            4,
            ReplacementPolicy::Lru,
            strategy,
            fib,
            id as u64,
        )
    }

    fn client(session: u64) -> PitFace {
        PitFace {
            face: Face::Client(session),
            trail: None,
        }
    }

    fn hop(id: u32) -> PathHop {
        PathHop {
            node: NodeId(id),
            popularity: 0,
            victim_popularity: 0,
        }
    }

    #[test]
    fn fib_follows_shortest_paths() {
        let fibs = populate_fib(&chain(), NodeId(2)).unwrap();
        let next = |n: usize| fibs[n].lookup(&ContentName::new(1, 0)).unwrap().next_hop;
        assert_eq!(next(0), Some(NodeId(1)));
        assert_eq!(next(1), Some(NodeId(2)));
        assert_eq!(next(2), None);

        let tri = Topology::parse("tri", "0 1 5\n1 2 5\n0 2 5\n").unwrap();
        let fibs = populate_fib(&tri, NodeId(2)).unwrap();
        assert_eq!(
            fibs[0].lookup(&ContentName::new(7, 3)).unwrap().next_hop,
            Some(NodeId(2))
        );
        assert!(populate_fib(&tri, NodeId(5)).is_err());
    }

    #[test]
    fn empty_chain_forwards_toward_producer() {
        // routers 0,1,2 in a line, producer beyond 2
        let topo = Topology::parse("c4", "0 1 1\n1 2 1\n2 3 1\n").unwrap();
        let fibs = populate_fib(&topo, NodeId(3)).unwrap();
        let s = CachingStrategy::Lce;
        let name = ContentName::new(1, 0);
        let mut trail = None;
        let mut from = Face::Client(0);
        for (i, fib) in fibs.into_iter().take(3).enumerate() {
            let mut n = node(i as u32, fib, &s);
            let act = n
                .process_interest(
                    name,
                    PitFace {
                        face: from,
                        trail: trail.clone(),
                    },
                    0.0,
                )
                .unwrap();
            assert_eq!(act, InterestAction::Forward(NodeId(i as u32 + 1)));
            assert_eq!(n.counters.cs_misses, 1);
            trail = extend_trail(&trail, hop(i as u32));
            from = Face::Node(NodeId(i as u32));
        }
    }

    #[test]
    fn cs_hit_short_circuits() {
        let fibs = populate_fib(&chain(), NodeId(2)).unwrap();
        let s = CachingStrategy::Lce;
        let mut n = node(0, fibs[0].clone(), &s);
        let name = ContentName::new(1, 0);
        n.cs.insert(name);
        assert_eq!(
            n.process_interest(name, client(0), 0.0),
            Ok(InterestAction::ServeFromCs)
        );
        assert!(n.pit.is_empty());
        assert_eq!(n.counters.cs_hits, 1);
    }

    #[test]
    fn duplicate_interest_is_aggregated() {
        let fibs = populate_fib(&chain(), NodeId(2)).unwrap();
        let s = CachingStrategy::Lce;
        let mut n = node(1, fibs[1].clone(), &s);
        let name = ContentName::new(1, 0);
        let from0 = PitFace {
            face: Face::Node(NodeId(0)),
            trail: None,
        };
        assert_eq!(
            n.process_interest(name, from0, 0.0),
            Ok(InterestAction::Forward(NodeId(2)))
        );
        assert_eq!(
            n.process_interest(name, client(9), 0.1),
            Ok(InterestAction::Aggregated)
        );
        assert_eq!(n.pit[&name].faces.len(), 2);
        assert_eq!(n.counters.forwarded, 1);
    }

    #[test]
    fn data_fans_out_and_clears_pit() {
        let fibs = populate_fib(&chain(), NodeId(2)).unwrap();
        let s = CachingStrategy::Lce;
        let mut n = node(1, fibs[1].clone(), &s);
        let name = ContentName::new(1, 0);
        n.process_interest(
            name,
            PitFace {
                face: Face::Node(NodeId(0)),
                trail: None,
            },
            0.0,
        )
        .unwrap();
        n.process_interest(name, client(4), 0.0).unwrap();
        let path = [hop(2), hop(1), hop(0)];
        let centrality = chain().betweenness();
        let ctx = PathContext {
            path: &path,
            position: 1,
            centrality: &centrality,
        };
        let mut rng = SimRng::seed_from_u64(0);
        let out = n.process_data(name, &s, &ctx, &mut rng, 0.5).unwrap();
        assert_eq!(out.faces.len(), 2);
        assert!(out.cached);
        assert!(n.cs.contains(&name));
        assert!(n.pit.is_empty());
    }

    #[test]
    fn declined_data_is_still_delivered() {
        let fibs = populate_fib(&chain(), NodeId(2)).unwrap();
        let s = CachingStrategy::Lcd;
        let mut n = node(0, fibs[0].clone(), &s);
        let name = ContentName::new(2, 0);
        n.process_interest(name, client(1), 0.0).unwrap();
        let path = [hop(2), hop(1), hop(0)];
        let centrality = CentralityMap::clone(&chain().betweenness());
        let ctx = PathContext {
            path: &path,
            position: 2,
            centrality: &centrality,
        };
        let mut rng = SimRng::seed_from_u64(0);
        let out = n.process_data(name, &s, &ctx, &mut rng, 1.0).unwrap();
        assert!(!out.cached);
        assert_eq!(out.faces.len(), 1);
        assert!(n.cs.is_empty());
    }

    #[test]
    fn unsolicited_data_is_counted() {
        let fibs = populate_fib(&chain(), NodeId(2)).unwrap();
        let s = CachingStrategy::Lce;
        let mut n = node(0, fibs[0].clone(), &s);
        let path = [hop(1), hop(0)];
        let centrality = chain().betweenness();
        let ctx = PathContext {
            path: &path,
            position: 1,
            centrality: &centrality,
        };
        let mut rng = SimRng::seed_from_u64(0);
        let name = ContentName::new(3, 0);
        assert_eq!(
            n.process_data(name, &s, &ctx, &mut rng, 0.0).unwrap_err(),
            NodeError::Unsolicited {
                node: NodeId(0),
                name
            }
        );
        assert_eq!(n.counters.unsolicited, 1);
    }

    #[test]
    fn missing_route_is_an_error() {
        let s = CachingStrategy::Lce;
        let mut n = node(0, Fib::default(), &s);
        let name = ContentName::new(1, 0);
        assert_eq!(
            n.process_interest(name, client(0), 0.0),
            Err(NodeError::NoRoute {
                node: NodeId(0),
                name
            })
        );
    }

    #[test]
    fn stale_pit_entries_expire() {
        let fibs = populate_fib(&chain(), NodeId(2)).unwrap();
        let s = CachingStrategy::Lce;
        let mut n = node(0, fibs[0].clone(), &s);
        n.pit_timeout = 1.0;
        let name = ContentName::new(1, 0);
        n.process_interest(name, client(0), 0.0).unwrap();
        // past the timeout a new Interest is forwarded instead of aggregated
        assert_eq!(
            n.process_interest(name, client(1), 5.0),
            Ok(InterestAction::Forward(NodeId(1)))
        );
        assert_eq!(n.expire_pit(10.0), 1);
    }

    #[test]
    fn trail_iterates_newest_first() {
        let t = extend_trail(&extend_trail(&None, hop(0)), hop(1));
        let nodes: Vec<_> = trail_hops(&t).map(|h| h.node).collect();
        assert_eq!(nodes, vec![NodeId(1), NodeId(0)]);
    }
}
