//! Router graph: parsing, validation, min-hop routing and betweenness.
//!
//! Routing is computed on hop count only. Link delays are carried along so
//! the engine can accumulate retrieval time, but they never influence which
//! path is chosen.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

/// Dense router identifier, `0..node_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(value: usize) -> Self {
        NodeId(value as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub delay_ms: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("edge {a}-{b}: {reason}")]
    InvalidEdge {
        a: NodeId,
        b: NodeId,
        reason: String,
    },
    #[error("topology is disconnected: node {0} is unreachable from node 0")]
    Disconnected(NodeId),
    #[error("topology has no nodes")]
    Empty,
    #[error("header declares {declared} {what} but the document has {actual}")]
    HeaderMismatch {
        what: &'static str,
        declared: usize,
        actual: usize,
    },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

/// Connected, undirected, simple graph of content routers.
#[derive(Debug, Clone)]
pub struct Topology {
    name: String,
    edges: Vec<Edge>,
    // neighbour lists sorted by id so every traversal is deterministic
    adjacency: Vec<Vec<(NodeId, f64)>>,
}

impl Topology {
    /// Builds and validates a topology from an explicit edge list.
    pub fn new(
        name: impl Into<String>,
        node_count: usize,
        edges: Vec<Edge>,
    ) -> Result<Self, TopologyError> {
        if node_count == 0 {
            return Err(TopologyError::Empty);
        }
        let mut adjacency: Vec<Vec<(NodeId, f64)>> = vec![Vec::new(); node_count];
        for e in &edges {
            let invalid = |reason: &str| TopologyError::InvalidEdge {
                a: e.a,
                b: e.b,
                reason: reason.to_string(),
            };
            if e.a.index() >= node_count || e.b.index() >= node_count {
                return Err(invalid("endpoint outside the node range"));
            }
            if e.a == e.b {
                return Err(invalid("self-loop"));
            }
            if !e.delay_ms.is_finite() {
                return Err(invalid("delay is not finite"));
            }
            if e.delay_ms < 0.0 {
                return Err(invalid("negative delay"));
            }
            if adjacency[e.a.index()].iter().any(|&(n, _)| n == e.b) {
                return Err(invalid("duplicate edge"));
            }
            adjacency[e.a.index()].push((e.b, e.delay_ms));
            adjacency[e.b.index()].push((e.a, e.delay_ms));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(n, _)| n);
        }
        let topo = Topology {
            name: name.into(),
            edges,
            adjacency,
        };
        let dist = topo.hop_distances(NodeId(0));
        if let Some(unreached) = dist.iter().position(|d| d.is_none()) {
            return Err(TopologyError::Disconnected(NodeId::from(unreached)));
        }
        Ok(topo)
    }

    /// Parses the plain-text edge-list format.
    ///
    /// Lines starting with `#` are comments. Header comments of the form
    /// `# nodes: N` and `# edges: M` are checked against the data when
    /// present; `# nodes:` is also how a single isolated router is declared.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self, TopologyError> {
        let mut declared_nodes = None;
        let mut declared_edges = None;
        let mut edges = Vec::new();
        let mut max_id: Option<u32> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if let Some(v) = comment.strip_prefix("nodes:") {
                    declared_nodes = Some(parse_header_count(v, line_no)?);
                } else if let Some(v) = comment.strip_prefix("edges:") {
                    declared_edges = Some(parse_header_count(v, line_no)?);
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(TopologyError::Parse {
                    line: line_no,
                    reason: format!("expected `<nodeA> <nodeB> <delay_ms>`, got {raw:?}"),
                });
            }
            let node = |s: &str| {
                s.parse::<u32>().map_err(|_| TopologyError::Parse {
                    line: line_no,
                    reason: format!("bad node id {s:?}"),
                })
            };
            let a = node(fields[0])?;
            let b = node(fields[1])?;
            let delay_ms = fields[2].parse::<f64>().map_err(|_| TopologyError::Parse {
                line: line_no,
                reason: format!("bad delay {:?}", fields[2]),
            })?;
            max_id = Some(max_id.map_or(a.max(b), |m| m.max(a).max(b)));
            edges.push(Edge {
                a: NodeId(a),
                b: NodeId(b),
                delay_ms,
            });
        }

        let observed_nodes = max_id.map_or(0, |m| m as usize + 1);
        let node_count = match declared_nodes {
            Some(n) if n < observed_nodes => {
                return Err(TopologyError::HeaderMismatch {
                    what: "nodes",
                    declared: n,
                    actual: observed_nodes,
                })
            }
            Some(n) => n,
            None => observed_nodes,
        };
        if let Some(m) = declared_edges {
            if m != edges.len() {
                return Err(TopologyError::HeaderMismatch {
                    what: "edges",
                    declared: m,
                    actual: edges.len(),
                });
            }
        }
        Topology::new(name, node_count, edges)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(NodeId::from)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.index() < self.node_count()
    }

    /// Neighbours of `node` in ascending id order, with link delays.
    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, f64)] {
        &self.adjacency[node.index()]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node.index()].len()
    }

    pub fn link_delay(&self, a: NodeId, b: NodeId) -> Option<f64> {
        self.adjacency
            .get(a.index())?
            .iter()
            .find(|&&(n, _)| n == b)
            .map(|&(_, d)| d)
    }

    /// BFS hop distances from `source`; `None` marks unreachable nodes.
    pub fn hop_distances(&self, source: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.node_count()];
        let mut queue = VecDeque::new();
        dist[source.index()] = Some(0);
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v.index()].unwrap();
            for &(w, _) in self.neighbors(v) {
                if dist[w.index()].is_none() {
                    dist[w.index()] = Some(dv + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Minimum-hop path from `from` to `to`, endpoints included.
    ///
    /// Among equal-hop paths the one whose node sequence is lexicographically
    /// smallest is chosen, reading from the lower-numbered endpoint. Anchoring
    /// the comparison on the unordered pair makes the path for `(b, a)` the
    /// exact reverse of the path for `(a, b)`.
    pub fn shortest_path(&self, from: NodeId, to: NodeId) -> Result<Vec<NodeId>, TopologyError> {
        for n in [from, to] {
            if !self.contains(n) {
                return Err(TopologyError::UnknownNode(n));
            }
        }
        if from <= to {
            Ok(self.lexicographic_path(from, to))
        } else {
            let mut path = self.lexicographic_path(to, from);
            path.reverse();
            Ok(path)
        }
    }

    fn lexicographic_path(&self, from: NodeId, to: NodeId) -> Vec<NodeId> {
        let dist = self.hop_distances(to);
        let mut path = vec![from];
        let mut current = from;
        while current != to {
            let d = dist[current.index()].expect("topology is connected");
            // neighbours are sorted, so the first match is the smallest id
            let next = self
                .neighbors(current)
                .iter()
                .map(|&(n, _)| n)
                .find(|n| dist[n.index()] == Some(d - 1))
                .expect("a predecessor exists on every shortest path");
            path.push(next);
            current = next;
        }
        path
    }

    /// Sum of link delays along `path`, in milliseconds.
    pub fn path_delay_ms(&self, path: &[NodeId]) -> f64 {
        path.windows(2)
            .map(|w| self.link_delay(w[0], w[1]).unwrap_or(0.0))
            .sum()
    }

    /// Longest minimum-hop distance between any two routers.
    pub fn diameter(&self) -> u32 {
        self.nodes()
            .map(|s| {
                self.hop_distances(s)
                    .into_iter()
                    .map(|d| d.unwrap_or(0))
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    /// Brandes betweenness over hop-count shortest paths.
    ///
    /// Scores are unnormalised pair counts with each unordered pair counted
    /// once; a pair with several shortest paths splits its unit of credit
    /// evenly between them.
    pub fn betweenness(&self) -> CentralityMap {
        let n = self.node_count();
        let mut score = vec![0.0f64; n];
        let mut stack = Vec::with_capacity(n);
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![-1i64; n];
        let mut delta = vec![0.0f64; n];
        let mut queue = VecDeque::with_capacity(n);

        for s in 0..n {
            stack.clear();
            for i in 0..n {
                preds[i].clear();
                sigma[i] = 0.0;
                dist[i] = -1;
                delta[i] = 0.0;
            }
            sigma[s] = 1.0;
            dist[s] = 0;
            queue.push_back(s);

            while let Some(v) = queue.pop_front() {
                stack.push(v);
                for &(w, _) in &self.adjacency[v] {
                    let w = w.index();
                    if dist[w] < 0 {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                    if dist[w] == dist[v] + 1 {
                        sigma[w] += sigma[v];
                        preds[w].push(v);
                    }
                }
            }

            while let Some(w) = stack.pop() {
                for &v in &preds[w] {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
                if w != s {
                    score[w] += delta[w];
                }
            }
        }

        // every unordered pair was visited from both endpoints
        for b in &mut score {
            *b /= 2.0;
        }
        CentralityMap { score }
    }
}

fn parse_header_count(value: &str, line: usize) -> Result<usize, TopologyError> {
    value.trim().parse().map_err(|_| TopologyError::Parse {
        line,
        reason: format!("bad header count {:?}", value.trim()),
    })
}

/// Betweenness score per router.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityMap {
    score: Vec<f64>,
}

impl CentralityMap {
    pub fn score(&self, node: NodeId) -> f64 {
        self.score[node.index()]
    }

    pub fn scores(&self) -> &[f64] {
        &self.score
    }

    /// Highest-scoring node; ties go to the smallest id.
    pub fn argmax(&self) -> NodeId {
        let mut best = 0;
        for (i, &s) in self.score.iter().enumerate() {
            if s > self.score[best] {
                best = i;
            }
        }
        NodeId::from(best)
    }
}

/// Shipped topologies, addressable by name from scenario files.
pub mod builtin {
    use super::{Topology, TopologyError};

    pub const ABILENE: &str = include_str!("../data/abilene.topo");
    pub const DTELECOM: &str = include_str!("../data/dtelecom.topo");

    pub fn names() -> &'static [&'static str] {
        &["abilene", "dtelecom"]
    }

    pub fn text(name: &str) -> Option<&'static str> {
        match name.to_ascii_lowercase().as_str() {
            "abilene" => Some(ABILENE),
            "dtelecom" => Some(DTELECOM),
            _ => None,
        }
    }

    pub fn load(name: &str) -> Option<Result<Topology, TopologyError>> {
        text(name).map(|t| Topology::parse(name.to_ascii_lowercase(), t))
    }
}
