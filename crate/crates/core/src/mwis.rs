//! Maximum weighted independent set solvers on the extended graph.
//!
//! Three routes with one shared contract:
//! - [`exact_mwis`]: branch-and-bound oracle, guarded to desk-scale
//!   instances (default 50 vertices).
//! - [`local_mwis`]: the same exact search over a leader's candidate
//!   ball, whose independent subsets are bounded by the growth bound
//!   `M·(2r+1)²` rather than a vertex-count guard.
//! - [`robust_ptas`]: coordinate-free PTAS that repeatedly grows r-hop
//!   balls from a heaviest remaining vertex until the ball MWIS stops
//!   growing by a factor `ρ = 1 + ε`, takes that ball's MWIS, and deletes
//!   it with its neighbors.
//!
//! Determinism contract: among maximum-weight solutions the search keeps
//! the one whose sorted member list is lexicographically smallest.
//! Zero-weight vertices never enter a solution, so solutions are minimal;
//! with all weights zero the result is the empty set.

use crate::graph::{ExtendedGraph, VertexId};
use thiserror::Error;

/// Vertex-count guard for the exact oracle.
pub const DEFAULT_EXACT_GUARD: usize = 50;

#[derive(Debug, Error)]
pub enum MwisError {
    #[error("instance has {size} vertices, exceeding the exact-search guard of {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("weights must be nonnegative and finite, got {0}")]
    InvalidWeight(f64),
    #[error("weight map covers {weights} vertices but the graph has {vertices}")]
    WeightLengthMismatch { weights: usize, vertices: usize },
    #[error("vertex id {vertex} out of range ({len} vertices)")]
    VertexOutOfRange { vertex: usize, len: usize },
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
}

/// Nonnegative vertex weights, indexed by [`VertexId`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    values: Vec<f64>,
}

impl WeightMap {
    pub fn new(values: Vec<f64>) -> Result<Self, MwisError> {
        if let Some(&bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(MwisError::InvalidWeight(bad));
        }
        Ok(Self { values })
    }

    pub fn uniform(len: usize, weight: f64) -> Result<Self, MwisError> {
        Self::new(vec![weight; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, v: VertexId) -> f64 {
        self.values[v.0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Summed weight `W(I)`, accumulated in ascending member order.
    pub fn total(&self, members: &[VertexId]) -> f64 {
        members.iter().map(|&v| self.values[v.0]).sum()
    }
}

/// An independent set together with its summed weight.
#[derive(Debug, Clone, PartialEq)]
pub struct MwisResult {
    /// Sorted ascending.
    pub members: Vec<VertexId>,
    pub total_weight: f64,
}

impl MwisResult {
    fn from_members(mut members: Vec<VertexId>, weights: &WeightMap) -> Self {
        members.sort_unstable();
        let total_weight = weights.total(&members);
        Self {
            members,
            total_weight,
        }
    }
}

fn validate_instance(
    h: &ExtendedGraph,
    subset: &[VertexId],
    weights: &WeightMap,
) -> Result<(), MwisError> {
    if weights.len() != h.num_vertices() {
        return Err(MwisError::WeightLengthMismatch {
            weights: weights.len(),
            vertices: h.num_vertices(),
        });
    }
    if let Some(&v) = subset.iter().find(|v| v.0 >= h.num_vertices()) {
        return Err(MwisError::VertexOutOfRange {
            vertex: v.0,
            len: h.num_vertices(),
        });
    }
    Ok(())
}

/// Exact MWIS of `H` restricted to `subset`, for desk-scale verification.
///
/// Branch and bound over master-node groups; rejects instances larger
/// than `max_vertices`.
pub fn exact_mwis_guarded(
    h: &ExtendedGraph,
    subset: &[VertexId],
    weights: &WeightMap,
    max_vertices: usize,
) -> Result<MwisResult, MwisError> {
    if subset.len() > max_vertices {
        return Err(MwisError::TooLarge {
            size: subset.len(),
            limit: max_vertices,
        });
    }
    validate_instance(h, subset, weights)?;
    Ok(branch_and_bound(h, subset, weights))
}

/// [`exact_mwis_guarded`] with the default guard.
pub fn exact_mwis(
    h: &ExtendedGraph,
    subset: &[VertexId],
    weights: &WeightMap,
) -> Result<MwisResult, MwisError> {
    exact_mwis_guarded(h, subset, weights, DEFAULT_EXACT_GUARD)
}

/// Exact MWIS over a leader's candidate ball `A_r(v)`.
///
/// No vertex-count guard: tractability comes from the growth bound on
/// independent subsets within an r-hop ball, not from the candidate count.
pub fn local_mwis(
    h: &ExtendedGraph,
    candidates: &[VertexId],
    weights: &WeightMap,
) -> Result<MwisResult, MwisError> {
    validate_instance(h, candidates, weights)?;
    Ok(branch_and_bound(h, candidates, weights))
}

/// Branch and bound grouped by master node: per node, try its channels in
/// ascending order and then "no channel". The first maximum found in this
/// canonical order is the lexicographically smallest one; later ties are
/// pruned. Zero-weight vertices are dropped upfront.
fn branch_and_bound(h: &ExtendedGraph, subset: &[VertexId], weights: &WeightMap) -> MwisResult {
    let mut verts: Vec<VertexId> = subset
        .iter()
        .copied()
        .filter(|&v| weights.get(v) > 0.0)
        .collect();
    verts.sort_unstable();
    verts.dedup();
    if verts.is_empty() {
        return MwisResult {
            members: Vec::new(),
            total_weight: 0.0,
        };
    }

    // contiguous runs of `verts` share a master node
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=verts.len() {
        if i == verts.len() || h.master(verts[i]) != h.master(verts[start]) {
            groups.push((start, i));
            start = i;
        }
    }

    // optimistic bound: per-group maxima, ignoring conflicts
    let mut suffix = vec![0.0f64; groups.len() + 1];
    for (gi, &(s, e)) in groups.iter().enumerate().rev() {
        let gmax = verts[s..e]
            .iter()
            .map(|&v| weights.get(v))
            .fold(0.0f64, f64::max);
        suffix[gi] = suffix[gi + 1] + gmax;
    }

    let mut search = Search {
        h,
        weights,
        verts: &verts,
        groups: &groups,
        suffix: &suffix,
        blocked: vec![0u32; h.num_vertices()],
        current: Vec::new(),
        current_weight: 0.0,
        best: None,
        best_weight: 0.0,
        greedy_weight: 0.0,
    };
    // Allow for summation-order residue between the greedy total and the
    // suffix bounds: prune against a floor strictly below the greedy value.
    let greedy = search.greedy_seed();
    search.greedy_weight = greedy - 1e-9 * (1.0 + greedy.abs());
    search.dfs(0);
    let members = search.best.unwrap_or_default();
    MwisResult::from_members(members, weights)
}

struct Search<'a> {
    h: &'a ExtendedGraph,
    weights: &'a WeightMap,
    verts: &'a [VertexId],
    groups: &'a [(usize, usize)],
    suffix: &'a [f64],
    blocked: Vec<u32>,
    current: Vec<VertexId>,
    current_weight: f64,
    best: Option<Vec<VertexId>>,
    best_weight: f64,
    greedy_weight: f64,
}

impl Search<'_> {
    /// Feasible lower bound from one greedy pass: per group, the heaviest
    /// unblocked vertex.
    fn greedy_seed(&mut self) -> f64 {
        let mut picked = Vec::new();
        let mut total = 0.0;
        for &(s, e) in self.groups {
            let mut choice: Option<VertexId> = None;
            for &v in &self.verts[s..e] {
                if self.blocked[v.0] == 0
                    && choice.map_or(true, |c| self.weights.get(v) > self.weights.get(c))
                {
                    choice = Some(v);
                }
            }
            if let Some(v) = choice {
                total += self.weights.get(v);
                picked.push(v);
                for &u in self.h.neighbors(v) {
                    self.blocked[u.0] += 1;
                }
            }
        }
        for v in picked {
            for &u in self.h.neighbors(v) {
                self.blocked[u.0] -= 1;
            }
        }
        total
    }

    fn dfs(&mut self, gi: usize) {
        if gi == self.groups.len() {
            if self.best.is_none() || self.current_weight > self.best_weight {
                self.best = Some(self.current.clone());
                self.best_weight = self.current_weight;
            }
            return;
        }
        let bound = self.current_weight + self.suffix[gi];
        if bound < self.greedy_weight || (self.best.is_some() && bound <= self.best_weight) {
            return;
        }
        let (s, e) = self.groups[gi];
        for idx in s..e {
            let v = self.verts[idx];
            if self.blocked[v.0] != 0 {
                continue;
            }
            self.current.push(v);
            self.current_weight += self.weights.get(v);
            for &u in self.h.neighbors(v) {
                self.blocked[u.0] += 1;
            }
            self.dfs(gi + 1);
            for &u in self.h.neighbors(v) {
                self.blocked[u.0] -= 1;
            }
            self.current_weight -= self.weights.get(v);
            self.current.pop();
        }
        self.dfs(gi + 1);
    }
}

/// Centralized robust PTAS with approximation guarantee `1/(1+ε)`.
///
/// Repeats on the residual graph: pick the heaviest remaining vertex
/// (ties to the smallest id), grow `r = 0, 1, 2, …` computing the exact
/// ball MWIS until `W(MWIS(J_{r+1})) ≤ ρ·W(MWIS(J_r))` first holds, keep
/// that ball's MWIS, and delete it together with all its neighbors.
pub fn robust_ptas(
    h: &ExtendedGraph,
    weights: &WeightMap,
    epsilon: f64,
) -> Result<MwisResult, MwisError> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(MwisError::InvalidEpsilon(epsilon));
    }
    if weights.len() != h.num_vertices() {
        return Err(MwisError::WeightLengthMismatch {
            weights: weights.len(),
            vertices: h.num_vertices(),
        });
    }
    let rho = 1.0 + epsilon;
    let mut alive: Vec<bool> = (0..h.num_vertices())
        .map(|k| weights.get(VertexId(k)) > 0.0)
        .collect();
    let mut output: Vec<VertexId> = Vec::new();

    loop {
        let mut vmax: Option<VertexId> = None;
        for k in 0..h.num_vertices() {
            if alive[k]
                && vmax.map_or(true, |m| weights.get(VertexId(k)) > weights.get(m))
            {
                vmax = Some(VertexId(k));
            }
        }
        let Some(center) = vmax else { break };

        let mut current = branch_and_bound(h, &[center], weights);
        let mut radius = 0usize;
        loop {
            let ball = alive_ball(h, &alive, center, radius + 1);
            let next = branch_and_bound(h, &ball, weights);
            if next.total_weight <= rho * current.total_weight {
                break;
            }
            current = next;
            radius += 1;
        }

        for &v in &current.members {
            alive[v.0] = false;
            for &u in h.neighbors(v) {
                alive[u.0] = false;
            }
        }
        output.extend_from_slice(&current.members);
    }
    Ok(MwisResult::from_members(output, weights))
}

/// BFS ball of the given radius within the residual (alive) subgraph.
fn alive_ball(h: &ExtendedGraph, alive: &[bool], center: VertexId, radius: usize) -> Vec<VertexId> {
    let mut dist = vec![usize::MAX; h.num_vertices()];
    dist[center.0] = 0;
    let mut members = vec![center];
    let mut queue = std::collections::VecDeque::from([center]);
    while let Some(u) = queue.pop_front() {
        if dist[u.0] == radius {
            continue;
        }
        for &w in h.neighbors(u) {
            if alive[w.0] && dist[w.0] == usize::MAX {
                dist[w.0] = dist[u.0] + 1;
                members.push(w);
                queue.push_back(w);
            }
        }
    }
    members
}

/// A strategy-decision backend: anything that can produce a (possibly
/// approximate) MWIS of `H` under the given weights.
pub trait MwisSolver {
    fn solve(&self, h: &ExtendedGraph, weights: &WeightMap) -> Result<MwisResult, MwisError>;
    fn name(&self) -> &'static str;
}

/// The guarded exact oracle as a solver.
#[derive(Debug, Clone, Copy)]
pub struct ExactSolver {
    pub max_vertices: usize,
}

impl Default for ExactSolver {
    fn default() -> Self {
        Self {
            max_vertices: DEFAULT_EXACT_GUARD,
        }
    }
}

impl MwisSolver for ExactSolver {
    fn solve(&self, h: &ExtendedGraph, weights: &WeightMap) -> Result<MwisResult, MwisError> {
        let all: Vec<VertexId> = h.vertices().collect();
        exact_mwis_guarded(h, &all, weights, self.max_vertices)
    }

    fn name(&self) -> &'static str {
        "exact"
    }
}

/// The centralized robust PTAS as a solver.
#[derive(Debug, Clone, Copy)]
pub struct PtasSolver {
    pub epsilon: f64,
}

impl MwisSolver for PtasSolver {
    fn solve(&self, h: &ExtendedGraph, weights: &WeightMap) -> Result<MwisResult, MwisError> {
        robust_ptas(h, weights, self.epsilon)
    }

    fn name(&self) -> &'static str {
        "centralized_ptas"
    }
}
