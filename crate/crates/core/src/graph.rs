//! Conflict graphs over secondary users and the extended conflict graph.
//!
//! A network is a unit-disk graph `G` over node positions: two nodes
//! conflict (cannot use the same channel simultaneously) iff their
//! Euclidean distance is at most [`UNIT_DISK_RADIUS`]. The extended
//! conflict graph `H` has one vertex per (node, channel) pair; the
//! vertices of one node form a clique, and each channel carries a copy
//! of `G`'s edges. Independent sets of `H` are exactly the feasible
//! strategies: per-node channel assignments with at most one channel per
//! node and no two conflicting nodes sharing a channel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;
use std::fmt;
use thiserror::Error;

/// Two nodes conflict iff their Euclidean distance is at most this.
pub const UNIT_DISK_RADIUS: f64 = 2.0;

/// Resampling budget when a connected network is requested.
pub const CONNECTIVITY_RETRY_BUDGET: usize = 1000;

/// Index of a network node (secondary user), `i ∈ [0, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

/// Index of a channel, `j ∈ [0, M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelId(pub usize);

/// Index of an extended-graph vertex (an arm), `k = i·M + j ∈ [0, N·M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("network must have at least one node")]
    EmptyNetwork,
    #[error("network must have at least one channel")]
    NoChannels,
    #[error("target average degree must be positive, got {0}")]
    InvalidDegree(f64),
    #[error("node id {0} out of range (n = {1})")]
    InvalidNode(usize, usize),
    #[error("vertex id {0} out of range (n·m = {1})")]
    InvalidVertex(usize, usize),
    #[error(
        "no connected network found within {attempts} attempts (n = {n}, target degree {degree})"
    )]
    ConnectivityUnattainable {
        attempts: usize,
        n: usize,
        degree: f64,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("edge ({u}, {v}) contradicts the unit-disk rule for the given positions")]
    EdgeMismatch { u: usize, v: usize },
}

/// The conflict graph `G = (V, E, C)`: node positions in the plane, the
/// unit-disk edge set derived from them, and the number of channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictGraph {
    positions: Vec<[f64; 2]>,
    adjacency: Vec<Vec<NodeId>>,
    num_channels: usize,
}

impl ConflictGraph {
    /// Builds the graph from positions; edges follow from the unit-disk rule.
    pub fn from_positions(
        positions: Vec<[f64; 2]>,
        num_channels: usize,
    ) -> Result<Self, GraphError> {
        if positions.is_empty() {
            return Err(GraphError::EmptyNetwork);
        }
        if num_channels == 0 {
            return Err(GraphError::NoChannels);
        }
        let n = positions.len();
        let mut adjacency = vec![Vec::new(); n];
        for u in 0..n {
            for v in (u + 1)..n {
                let dx = positions[u][0] - positions[v][0];
                let dy = positions[u][1] - positions[v][1];
                if dx * dx + dy * dy <= UNIT_DISK_RADIUS * UNIT_DISK_RADIUS {
                    adjacency[u].push(NodeId(v));
                    adjacency[v].push(NodeId(u));
                }
            }
        }
        Ok(Self {
            positions,
            adjacency,
            num_channels,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.positions.len()
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn position(&self, node: NodeId) -> [f64; 2] {
        self.positions[node.0]
    }

    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node.0]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u != v && self.adjacency[u.0].binary_search(&v).is_ok()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn average_degree(&self) -> f64 {
        2.0 * self.num_edges() as f64 / self.num_nodes() as f64
    }

    /// Edges as `(u, v)` pairs with `u < v`, ascending.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            for &v in nbrs {
                if u < v.0 {
                    out.push((NodeId(u), v));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let n = self.num_nodes();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &NodeId(v) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == n
    }

    /// Serializes to the line-oriented text format:
    /// header `N M`, then `pos i x y` lines, then `edge u v` lines,
    /// all in ascending id order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{} {}\n", self.num_nodes(), self.num_channels));
        for (i, p) in self.positions.iter().enumerate() {
            out.push_str(&format!("pos {} {} {}\n", i, p[0], p[1]));
        }
        for (u, v) in self.edges() {
            out.push_str(&format!("edge {} {}\n", u, v));
        }
        out
    }

    /// Parses the text format and validates the edge list against the
    /// unit-disk rule implied by the positions.
    pub fn from_text(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let parse_err = |line: usize, message: &str| GraphError::Parse {
            line: line + 1,
            message: message.into(),
        };
        let mut parts = header.split_whitespace();
        let n: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(0, "header must be `N M`"))?;
        let m: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(0, "header must be `N M`"))?;

        let mut positions = vec![[0.0f64; 2]; n];
        let mut listed_edges = Vec::new();
        let mut pos_seen = 0usize;
        for (lineno, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut tok = line.split_whitespace();
            match tok.next() {
                Some("pos") => {
                    let i: usize = tok
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| parse_err(lineno, "pos line must be `pos i x y`"))?;
                    let x: f64 = tok
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| parse_err(lineno, "pos line must be `pos i x y`"))?;
                    let y: f64 = tok
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| parse_err(lineno, "pos line must be `pos i x y`"))?;
                    if i != pos_seen {
                        return Err(parse_err(lineno, "pos lines must be in ascending id order"));
                    }
                    if i >= n {
                        return Err(GraphError::InvalidNode(i, n));
                    }
                    positions[i] = [x, y];
                    pos_seen += 1;
                }
                Some("edge") => {
                    let u: usize = tok
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| parse_err(lineno, "edge line must be `edge u v`"))?;
                    let v: usize = tok
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| parse_err(lineno, "edge line must be `edge u v`"))?;
                    if u >= n || v >= n {
                        return Err(GraphError::InvalidNode(u.max(v), n));
                    }
                    listed_edges.push((u, v));
                }
                _ => return Err(parse_err(lineno, "expected `pos` or `edge` line")),
            }
        }
        if pos_seen != n {
            return Err(GraphError::Parse {
                line: 0,
                message: format!("expected {} pos lines, found {}", n, pos_seen),
            });
        }
        let graph = Self::from_positions(positions, m)?;
        let derived: Vec<(usize, usize)> = graph
            .edges()
            .into_iter()
            .map(|(u, v)| (u.0, v.0))
            .collect();
        let mut listed = listed_edges
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect::<Vec<_>>();
        listed.sort_unstable();
        listed.dedup();
        if listed != derived {
            let &(u, v) = listed
                .iter()
                .find(|e| !derived.contains(e))
                .or_else(|| derived.iter().find(|e| !listed.contains(e)))
                .expect("edge sets differ");
            return Err(GraphError::EdgeMismatch { u, v });
        }
        Ok(graph)
    }
}

/// The extended conflict graph `H`: one vertex per (node, channel) pair,
/// a clique per node, and per-channel copies of `G`'s edges.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedGraph {
    num_nodes: usize,
    num_channels: usize,
    adjacency: Vec<Vec<VertexId>>,
}

impl ExtendedGraph {
    pub fn from_conflict_graph(g: &ConflictGraph) -> Self {
        let n = g.num_nodes();
        let m = g.num_channels();
        let mut adjacency = vec![Vec::new(); n * m];
        for i in 0..n {
            // clique over the node's own vertices
            for j in 0..m {
                for q in 0..m {
                    if j != q {
                        adjacency[i * m + j].push(VertexId(i * m + q));
                    }
                }
            }
            // per-channel copies of the conflict edges
            for &NodeId(p) in g.neighbors(NodeId(i)) {
                for j in 0..m {
                    adjacency[i * m + j].push(VertexId(p * m + j));
                }
            }
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Self {
            num_nodes: n,
            num_channels: m,
            adjacency,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn num_vertices(&self) -> usize {
        self.num_nodes * self.num_channels
    }

    /// The arm index `k = i·M + j`.
    pub fn vertex(&self, node: NodeId, channel: ChannelId) -> VertexId {
        debug_assert!(node.0 < self.num_nodes && channel.0 < self.num_channels);
        VertexId(node.0 * self.num_channels + channel.0)
    }

    /// Master node of a vertex.
    pub fn master(&self, v: VertexId) -> NodeId {
        NodeId(v.0 / self.num_channels)
    }

    pub fn channel_of(&self, v: VertexId) -> ChannelId {
        ChannelId(v.0 % self.num_channels)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.num_vertices()).map(VertexId)
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v.0]
    }

    pub fn are_adjacent(&self, u: VertexId, v: VertexId) -> bool {
        u != v && self.adjacency[u.0].binary_search(&v).is_ok()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Exact BFS ball of radius `r` around `v`, counting clique edges as
    /// one hop.
    pub fn r_hop_neighborhood(&self, v: VertexId, r: usize) -> Result<Neighborhood, GraphError> {
        if v.0 >= self.num_vertices() {
            return Err(GraphError::InvalidVertex(v.0, self.num_vertices()));
        }
        let mut dist = vec![usize::MAX; self.num_vertices()];
        dist[v.0] = 0;
        let mut members = vec![v];
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            if dist[u.0] == r {
                continue;
            }
            for &w in self.neighbors(u) {
                if dist[w.0] == usize::MAX {
                    dist[w.0] = dist[u.0] + 1;
                    members.push(w);
                    queue.push_back(w);
                }
            }
        }
        members.sort_unstable();
        Ok(Neighborhood {
            center: v,
            radius: r,
            members,
        })
    }
}

/// A BFS ball `J_{H,r}(v)` in the extended graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    pub center: VertexId,
    pub radius: usize,
    /// Sorted ascending; always contains the center.
    pub members: Vec<VertexId>,
}

impl Neighborhood {
    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// True iff no two vertices of `set` are adjacent in `H`.
///
/// Because each node's vertices form a clique, this implies at most one
/// channel per node.
pub fn independence_check(h: &ExtendedGraph, set: &[VertexId]) -> bool {
    let mut member = vec![false; h.num_vertices()];
    for &v in set {
        if v.0 >= h.num_vertices() {
            return false;
        }
        member[v.0] = true;
    }
    for &v in set {
        for &u in h.neighbors(v) {
            if member[u.0] {
                return false;
            }
        }
    }
    true
}

/// A feasible strategy: an independent set of `H`, i.e. a per-node
/// channel assignment with at most one channel per node.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Strategy {
    members: Vec<VertexId>,
}

impl Strategy {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Sorts and deduplicates; independence is the caller's contract and
    /// can be verified via [`independence_check`].
    pub fn new(mut members: Vec<VertexId>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    /// The channel assigned to `node`, if any.
    pub fn channel_for(&self, h: &ExtendedGraph, node: NodeId) -> Option<ChannelId> {
        self.members
            .iter()
            .find(|&&v| h.master(v) == node)
            .map(|&v| h.channel_of(v))
    }
}

/// Places `n` nodes uniformly at random in a square of side
/// `L = sqrt(4π·n/d)` so the expected interior unit-disk degree is `d`,
/// and derives the conflict graph. With `require_connected`, resamples
/// until connected (bounded by [`CONNECTIVITY_RETRY_BUDGET`]).
///
/// Deterministic for a fixed seed. Boundary effects pull the realized
/// average degree below `d`; they are reported, not corrected.
pub fn generate_random_network(
    n: usize,
    m: usize,
    target_avg_degree: f64,
    seed: u64,
    require_connected: bool,
) -> Result<ConflictGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::EmptyNetwork);
    }
    if m == 0 {
        return Err(GraphError::NoChannels);
    }
    if !(target_avg_degree > 0.0) {
        return Err(GraphError::InvalidDegree(target_avg_degree));
    }
    let side = (4.0 * std::f64::consts::PI * n as f64 / target_avg_degree).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..CONNECTIVITY_RETRY_BUDGET {
        let positions: Vec<[f64; 2]> = (0..n)
            .map(|_| [rng.gen::<f64>() * side, rng.gen::<f64>() * side])
            .collect();
        let graph = ConflictGraph::from_positions(positions, m)?;
        if !require_connected || graph.is_connected() {
            return Ok(graph);
        }
    }
    Err(GraphError::ConnectivityUnattainable {
        attempts: CONNECTIVITY_RETRY_BUDGET,
        n,
        degree: target_avg_degree,
    })
}

/// The three-node path with three channels used across the tests: G is
/// v0–v1–v2, so H has nine vertices, a triangle per node, and the path
/// copied per channel.
#[cfg(test)]
pub(crate) fn path3_channels3() -> ConflictGraph {
    ConflictGraph::from_positions(vec![[0.0, 0.0], [1.5, 0.0], [3.0, 0.0]], 3).unwrap()
}
