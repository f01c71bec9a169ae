//! The seven caching strategies behind one decision interface.
//!
//! | strategy  | caches on the Data path | managed replication |
//! |-----------|-------------------------|---------------------|
//! | LCE       | always                  | no                  |
//! | 2-LRU     | second sighting of name | no                  |
//! | CLFM      | max-betweenness router  | no                  |
//! | ProbCache | probabilistically       | no                  |
//! | MAGIC     | max-gain router         | no                  |
//! | LCD       | never                   | one hop down on hit |
//! | MPC       | never                   | neighbours when popular |

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rustc_hash::FxHashMap;

use crate::ccn_node::{ContentName, NodeState};
use crate::content_store::{ContentStore, ReplacementPolicy};
use crate::topology::{CentralityMap, NodeId};
use crate::SimRng;

pub const DEFAULT_T_TW: f64 = 10.0;
pub const DEFAULT_MPC_THRESHOLD: u32 = 3;
pub const DEFAULT_POPULARITY_CAPACITY: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    Lce,
    TwoLru,
    Clfm,
    ProbCache,
    Magic,
    Lcd,
    Mpc,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 7] = [
        Self::Lce,
        Self::TwoLru,
        Self::Clfm,
        Self::ProbCache,
        Self::Magic,
        Self::Lcd,
        Self::Mpc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Lce => "LCE",
            Self::TwoLru => "2-LRU",
            Self::Clfm => "CLFM",
            Self::ProbCache => "PROBCACHE",
            Self::Magic => "MAGIC",
            Self::Lcd => "LCD",
            Self::Mpc => "MPC",
        }
    }

    /// Caches along the Data delivery path.
    pub fn opportunistic(self) -> bool {
        !self.managed_replica()
    }

    /// Places copies independently of the Data path.
    pub fn managed_replica(self) -> bool {
        matches!(self, Self::Lcd | Self::Mpc)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '-' | '_'))
            .collect::<String>()
            .to_ascii_uppercase();
        match norm.as_str() {
            "LCE" => Ok(Self::Lce),
            "2LRU" | "TWOLRU" => Ok(Self::TwoLru),
            "CLFM" | "CL4M" => Ok(Self::Clfm),
            "PROBCACHE" => Ok(Self::ProbCache),
            "MAGIC" => Ok(Self::Magic),
            "LCD" => Ok(Self::Lcd),
            "MPC" => Ok(Self::Mpc),
            _ => Err(format!("unknown caching strategy {:?}", s.trim())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbCacheParams {
    /// Target time window; weights how much of the path's capacity a
    /// single flow may claim.
    pub t_tw: f64,
}

impl Default for ProbCacheParams {
    fn default() -> Self {
        ProbCacheParams { t_tw: DEFAULT_T_TW }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MpcParams {
    pub threshold: u32,
    pub popularity_capacity: usize,
}

impl Default for MpcParams {
    fn default() -> Self {
        MpcParams {
            threshold: DEFAULT_MPC_THRESHOLD,
            popularity_capacity: DEFAULT_POPULARITY_CAPACITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MagicParams {
    pub popularity_capacity: usize,
}

impl Default for MagicParams {
    fn default() -> Self {
        MagicParams {
            popularity_capacity: DEFAULT_POPULARITY_CAPACITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CachingStrategy {
    Lce,
    /// `name_capacity = None` sizes the name cache like the Content Store.
    TwoLru {
        name_capacity: Option<usize>,
    },
    Clfm,
    ProbCache(ProbCacheParams),
    Magic(MagicParams),
    Lcd,
    Mpc(MpcParams),
}

impl CachingStrategy {
    /// Strategy with default parameters.
    pub fn from_kind(kind: StrategyKind) -> Self {
        match kind {
            StrategyKind::Lce => Self::Lce,
            StrategyKind::TwoLru => Self::TwoLru {
                name_capacity: None,
            },
            StrategyKind::Clfm => Self::Clfm,
            StrategyKind::ProbCache => Self::ProbCache(ProbCacheParams::default()),
            StrategyKind::Magic => Self::Magic(MagicParams::default()),
            StrategyKind::Lcd => Self::Lcd,
            StrategyKind::Mpc => Self::Mpc(MpcParams::default()),
        }
    }

    pub fn kind(&self) -> StrategyKind {
        match self {
            Self::Lce => StrategyKind::Lce,
            Self::TwoLru { .. } => StrategyKind::TwoLru,
            Self::Clfm => StrategyKind::Clfm,
            Self::ProbCache(_) => StrategyKind::ProbCache,
            Self::Magic(_) => StrategyKind::Magic,
            Self::Lcd => StrategyKind::Lcd,
            Self::Mpc(_) => StrategyKind::Mpc,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            Self::ProbCache(p) if !(p.t_tw > 0.0 && p.t_tw.is_finite()) => {
                Err(format!("probcache t_tw must be positive, got {}", p.t_tw))
            }
            Self::Mpc(p) if p.threshold == 0 => Err("mpc threshold must be at least 1".into()),
            Self::Mpc(MpcParams {
                popularity_capacity: 0,
                ..
            })
            | Self::Magic(MagicParams {
                popularity_capacity: 0,
            }) => Err("popularity table capacity must be at least 1".into()),
            _ => Ok(()),
        }
    }

    /// Fresh per-router strategy state.
    pub fn init_state(&self, cache_capacity: usize, seed: u64) -> StrategyState {
        match *self {
            Self::TwoLru { name_capacity } => StrategyState {
                name_cache: Some(ContentStore::new(
                    name_capacity.unwrap_or(cache_capacity),
                    ReplacementPolicy::Lru,
                    seed,
                )),
                popularity: None,
            },
            Self::Mpc(MpcParams {
                popularity_capacity,
                ..
            })
            | Self::Magic(MagicParams {
                popularity_capacity,
            }) => StrategyState {
                name_cache: None,
                popularity: Some(PopularityTable::new(popularity_capacity)),
            },
            _ => StrategyState::default(),
        }
    }

    /// Annotation a router adds to an Interest it forwards upstream.
    pub fn annotate(&self, node: &mut NodeState, name: &ContentName) -> PathHop {
        let mut hop = PathHop {
            node: node.id,
            popularity: 0,
            victim_popularity: 0,
        };
        if let (Self::Magic(_), Some(table)) = (self, node.strategy_state.popularity.as_ref()) {
            hop.popularity = table.count(name);
            hop.victim_popularity = node.cs.peek_victim().map_or(0, |v| table.count(&v));
        }
        hop
    }

    /// Opportunistic decision taken as Data crosses `node`.
    pub fn decide_on_data(
        &self,
        node: &mut NodeState,
        name: ContentName,
        ctx: &PathContext<'_>,
        rng: &mut SimRng,
    ) -> bool {
        match self {
            Self::Lce => true,
            Self::TwoLru { .. } => {
                let cache = node
                    .strategy_state
                    .name_cache
                    .as_mut()
                    .expect("2-LRU state initialised");
                if cache.lookup(&name) {
                    true
                } else {
                    cache.insert(name);
                    false
                }
            }
            Self::Clfm => ctx.max_centrality_position() == Some(ctx.position),
            Self::ProbCache(p) => {
                let prob = probcache_probability(ctx.path_len(), ctx.position, p.t_tw);
                rng.random::<f64>() < prob
            }
            Self::Magic(_) => ctx.max_gain_position() == Some(ctx.position),
            Self::Lcd | Self::Mpc(_) => false,
        }
    }

    /// Managed replication triggered by a CS or producer hit at `node`,
    /// which sits at position 0 of `ctx`.
    pub fn on_cache_hit(
        &self,
        node: &NodeState,
        name: ContentName,
        ctx: &PathContext<'_>,
    ) -> Option<ReplicationOrder> {
        match self {
            Self::Lcd => {
                debug_assert_eq!(ctx.path.first().map(|h| h.node), Some(node.id));
                ctx.path.get(1).map(|next| ReplicationOrder {
                    target: next.node,
                    name,
                })
            }
            _ => None,
        }
    }

    /// Bookkeeping for every Interest processed at `node`. MPC answers with
    /// replication orders once a name becomes popular.
    pub fn on_request_observed(
        &self,
        node: &mut NodeState,
        name: ContentName,
        neighbors: &[(NodeId, f64)],
    ) -> Vec<ReplicationOrder> {
        let Some(table) = node.strategy_state.popularity.as_mut() else {
            return Vec::new();
        };
        let count = table.observe(name);
        match self {
            Self::Mpc(p) if count == p.threshold => std::iter::once(node.id)
                .chain(neighbors.iter().map(|&(n, _)| n))
                .map(|target| ReplicationOrder { target, name })
                .collect(),
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for CachingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind().as_str())
    }
}

/// Caching probability `((c - x + 1) / t_tw) * (x / c)`, clamped to `[0, 1]`.
/// `c` is the delivery path length in hops and `x` the hops the Data has
/// travelled from the content source.
pub fn probcache_probability(c: usize, x: usize, t_tw: f64) -> f64 {
    if c == 0 {
        return 0.0;
    }
    let (c, x) = (c as f64, x as f64);
    (((c - x + 1.0) / t_tw) * (x / c)).clamp(0.0, 1.0)
}

/// Copy instruction emitted by a managed-replica strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicationOrder {
    pub target: NodeId,
    pub name: ContentName,
}

/// Router entry on a delivery path, annotated when the Interest passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathHop {
    pub node: NodeId,
    /// Requests for the name observed at this router (MAGIC).
    pub popularity: u32,
    /// Requests observed for the router's current eviction candidate (MAGIC).
    pub victim_popularity: u32,
}

/// What a router knows about the delivery it is part of.
#[derive(Debug, Clone, Copy)]
pub struct PathContext<'a> {
    /// Content source first, requester's attachment router last.
    pub path: &'a [PathHop],
    /// Index of the deciding router in `path`: hops travelled from the source.
    pub position: usize,
    pub centrality: &'a CentralityMap,
}

impl PathContext<'_> {
    /// Hops from the content source to the requester.
    pub fn path_len(&self) -> usize {
        self.path.len().saturating_sub(1)
    }

    /// Router with the highest betweenness downstream of the source; ties
    /// go to the router nearest the requester.
    pub fn max_centrality_position(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, hop) in self.path.iter().enumerate().skip(1) {
            let s = self.centrality.score(hop.node);
            if best.is_none_or(|(_, b)| s >= b) {
                best = Some((i, s));
            }
        }
        best.map(|(i, _)| i)
    }

    /// `(f_new - f_victim) * d`, where `d` is the distance to the source.
    pub fn gain_at(&self, position: usize) -> f64 {
        let hop = &self.path[position];
        (hop.popularity as f64 - hop.victim_popularity as f64) * position as f64
    }

    /// Router maximising MAGIC's gain, if any gain is positive; ties go to
    /// the router nearest the requester.
    pub fn max_gain_position(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 1..self.path.len() {
            let g = self.gain_at(i);
            if g > 0.0 && best.is_none_or(|(_, b)| g >= b) {
                best = Some((i, g));
            }
        }
        best.map(|(i, _)| i)
    }
}

/// Per-name request counts with LRU overflow on names.
#[derive(Debug, Clone)]
pub struct PopularityTable {
    recency: ContentStore,
    counts: FxHashMap<ContentName, u32>,
}

impl PopularityTable {
    pub fn new(capacity: usize) -> Self {
        PopularityTable {
            recency: ContentStore::new(capacity, ReplacementPolicy::Lru, 0),
            counts: FxHashMap::default(),
        }
    }

    /// Records one request and returns the updated count.
    pub fn observe(&mut self, name: ContentName) -> u32 {
        if let Some(dropped) = self.recency.insert(name).evicted() {
            self.counts.remove(&dropped);
        }
        let c = self.counts.entry(name).or_insert(0);
        *c += 1;
        *c
    }

    pub fn count(&self, name: &ContentName) -> u32 {
        self.counts.get(name).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct StrategyState {
    /// 2-LRU's name-only virtual cache.
    pub name_cache: Option<ContentStore>,
    /// MPC and MAGIC request counters.
    pub popularity: Option<PopularityTable>,
}
