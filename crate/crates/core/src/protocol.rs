//! Synchronous simulation of the distributed strategy-decision protocol.
//!
//! Each round starts with a weight broadcast (WB) in which every vertex
//! of the previous strategy floods its updated weight through its
//! (2r+1)-hop neighborhood. The decision phase then runs up to `D`
//! mini-rounds; in each one:
//!
//! - LS: every Candidate whose (weight, id) pair is lexicographically
//!   maximal among the Candidates of its (2r+1)-hop ball declares itself
//!   LocalLeader. Two simultaneous leaders are therefore always more than
//!   2r+1 hops apart, so their r-hop balls cannot touch.
//! - LMWIS: each leader computes the exact MWIS over the Candidates of
//!   its r-hop ball, marks those members Winner and the other ball
//!   Candidates Loser. Candidate neighbors of new Winners are also
//!   demoted, which keeps the global Winner set independent across
//!   mini-rounds.
//! - LB: each leader floods the determinations through its (3r+1)-hop
//!   ball so every remaining Candidate's (2r+1)-hop view is
//!   status-correct for the next mini-round.
//!
//! Candidates still undecided after `D` mini-rounds are demoted to Loser
//! and do not transmit. Message counts are tracked per vertex (one relay
//! per flooded ball membership); mini-timeslots are charged per phase:
//! WB `(2r+1)²` per round, LS `2r+1` and LB `3r+1` per mini-round.

use crate::graph::{independence_check, ExtendedGraph, Strategy, VertexId};
use crate::metrics::{DecisionTimeModel, TimingModel};
use crate::mwis::{local_mwis, MwisError, MwisResult, MwisSolver, WeightMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("hop radius r must be at least 1")]
    InvalidRadius,
    #[error("mini-round budget D must be at least 1")]
    InvalidMiniRounds,
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("runtime built for {expected} vertices, graph has {got}")]
    GraphMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Mwis(#[from] MwisError),
}

/// Protocol parameters: hop radius `r`, mini-round budget `D`, and the
/// PTAS parameter `ε` used for reporting `ρ = 1 + ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub r: usize,
    pub mini_rounds: usize,
    pub epsilon: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            r: 2,
            mini_rounds: 5,
            epsilon: 0.5,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.r == 0 {
            return Err(ProtocolError::InvalidRadius);
        }
        if self.mini_rounds == 0 {
            return Err(ProtocolError::InvalidMiniRounds);
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(ProtocolError::InvalidEpsilon(self.epsilon));
        }
        Ok(())
    }

    /// Reported approximation ratio `ρ = 1 + ε`.
    pub fn rho(&self) -> f64 {
        1.0 + self.epsilon
    }

    pub fn election_radius(&self) -> usize {
        2 * self.r + 1
    }

    pub fn result_radius(&self) -> usize {
        3 * self.r + 1
    }
}

/// Per-round communication accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolCosts {
    /// Messages sent by each vertex (one per relayed flood membership).
    pub messages: Vec<u64>,
    pub wb_timeslots: u64,
    pub ls_timeslots: u64,
    pub lmwis_timeslots: u64,
    pub lb_timeslots: u64,
    pub mini_rounds_used: usize,
}

impl ProtocolCosts {
    pub fn new(num_vertices: usize) -> Self {
        Self {
            messages: vec![0; num_vertices],
            wb_timeslots: 0,
            ls_timeslots: 0,
            lmwis_timeslots: 0,
            lb_timeslots: 0,
            mini_rounds_used: 0,
        }
    }

    pub fn max_messages_per_vertex(&self) -> u64 {
        self.messages.iter().copied().max().unwrap_or(0)
    }

    pub fn total_messages(&self) -> u64 {
        self.messages.iter().sum()
    }

    pub fn total_mini_timeslots(&self) -> u64 {
        self.wb_timeslots + self.ls_timeslots + self.lmwis_timeslots + self.lb_timeslots
    }
}

/// Per-vertex status inside a round's decision phase. Every vertex starts
/// each round as Candidate; Winner and Loser are terminal within the
/// round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexStatus {
    Candidate,
    LocalLeader,
    Winner,
    Loser,
}

/// Precomputed BFS balls for the three protocol radii over a fixed `H`.
#[derive(Debug, Clone)]
pub struct ProtocolRuntime {
    config: ProtocolConfig,
    num_vertices: usize,
    decision_balls: Vec<Vec<u32>>,
    election_balls: Vec<Vec<u32>>,
    result_balls: Vec<Vec<u32>>,
}

impl ProtocolRuntime {
    pub fn new(h: &ExtendedGraph, config: ProtocolConfig) -> Result<Self, ProtocolError> {
        config.validate()?;
        let nv = h.num_vertices();
        let radii = [
            config.r,
            config.election_radius(),
            config.result_radius(),
        ];
        let mut tables: [Vec<Vec<u32>>; 3] =
            [Vec::with_capacity(nv), Vec::with_capacity(nv), Vec::with_capacity(nv)];
        // one bounded BFS per vertex covers all three radii
        let mut dist = vec![u32::MAX; nv];
        let mut touched: Vec<u32> = Vec::new();
        for v in 0..nv {
            dist[v] = 0;
            touched.clear();
            touched.push(v as u32);
            let mut queue = std::collections::VecDeque::from([v as u32]);
            while let Some(u) = queue.pop_front() {
                if dist[u as usize] as usize == radii[2] {
                    continue;
                }
                for &w in h.neighbors(VertexId(u as usize)) {
                    if dist[w.0] == u32::MAX {
                        dist[w.0] = dist[u as usize] + 1;
                        touched.push(w.0 as u32);
                        queue.push_back(w.0 as u32);
                    }
                }
            }
            for (ti, &radius) in radii.iter().enumerate() {
                let mut ball: Vec<u32> = touched
                    .iter()
                    .copied()
                    .filter(|&u| dist[u as usize] as usize <= radius)
                    .collect();
                ball.sort_unstable();
                tables[ti].push(ball);
            }
            for &u in &touched {
                dist[u as usize] = u32::MAX;
            }
        }
        let [decision_balls, election_balls, result_balls] = tables;
        Ok(Self {
            config,
            num_vertices: nv,
            decision_balls,
            election_balls,
            result_balls,
        })
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    fn check_graph(&self, h: &ExtendedGraph) -> Result<(), ProtocolError> {
        if h.num_vertices() != self.num_vertices {
            return Err(ProtocolError::GraphMismatch {
                expected: self.num_vertices,
                got: h.num_vertices(),
            });
        }
        Ok(())
    }

    pub fn election_ball(&self, v: VertexId) -> &[u32] {
        &self.election_balls[v.0]
    }

    fn in_election_ball(&self, observer: VertexId, target: VertexId) -> bool {
        self.election_balls[observer.0]
            .binary_search(&(target.0 as u32))
            .is_ok()
    }
}

/// The weight knowledge available to each vertex after WB: current
/// weights of everything within its (2r+1)-hop ball.
#[derive(Debug)]
pub struct WeightViews<'a> {
    runtime: &'a ProtocolRuntime,
    weights: &'a WeightMap,
}

impl WeightViews<'_> {
    /// The weight `observer` knows for `target`: defined exactly on its
    /// (2r+1)-hop ball and current there after WB.
    pub fn local_weight(&self, observer: VertexId, target: VertexId) -> Option<f64> {
        self.runtime
            .in_election_ball(observer, target)
            .then(|| self.weights.get(target))
    }

    pub fn weights(&self) -> &WeightMap {
        self.weights
    }
}

/// WB phase: every member of the previous strategy floods its new weight
/// through its (2r+1)-hop ball; each ball member relays once. In round 1
/// the previous strategy is empty, so no messages are sent and the views
/// hold the initial weights.
pub fn weight_broadcast<'a>(
    runtime: &'a ProtocolRuntime,
    h: &ExtendedGraph,
    prev_strategy: &Strategy,
    weights: &'a WeightMap,
    costs: &mut ProtocolCosts,
) -> Result<WeightViews<'a>, ProtocolError> {
    runtime.check_graph(h)?;
    for &u in prev_strategy.members() {
        for &x in runtime.election_ball(u) {
            costs.messages[x as usize] += 1;
        }
    }
    let w = runtime.config.election_radius() as u64;
    costs.wb_timeslots += w * w;
    Ok(WeightViews { runtime, weights })
}

/// Mutable per-round decision state.
#[derive(Debug, Clone)]
pub struct DecisionState {
    statuses: Vec<VertexStatus>,
    winners: Vec<VertexId>,
    candidates_remaining: usize,
}

impl DecisionState {
    pub fn new(num_vertices: usize) -> Self {
        Self {
            statuses: vec![VertexStatus::Candidate; num_vertices],
            winners: Vec::new(),
            candidates_remaining: num_vertices,
        }
    }

    pub fn status(&self, v: VertexId) -> VertexStatus {
        self.statuses[v.0]
    }

    pub fn statuses(&self) -> &[VertexStatus] {
        &self.statuses
    }

    pub fn winners(&self) -> &[VertexId] {
        &self.winners
    }

    pub fn candidates_remaining(&self) -> usize {
        self.candidates_remaining
    }

    fn demote(&mut self, v: VertexId) {
        debug_assert!(matches!(
            self.statuses[v.0],
            VertexStatus::Candidate | VertexStatus::LocalLeader
        ));
        self.statuses[v.0] = VertexStatus::Loser;
        self.candidates_remaining -= 1;
    }
}

/// What one mini-round did.
#[derive(Debug, Clone, PartialEq)]
pub struct MiniRoundReport {
    pub leaders: Vec<VertexId>,
    pub new_winners: Vec<VertexId>,
}

/// One mini-round: leader selection, local MWIS per leader, and result
/// broadcast, with costs charged per the phase model.
pub fn run_mini_round(
    runtime: &ProtocolRuntime,
    h: &ExtendedGraph,
    views: &WeightViews<'_>,
    state: &mut DecisionState,
    costs: &mut ProtocolCosts,
) -> Result<MiniRoundReport, ProtocolError> {
    runtime.check_graph(h)?;
    let leaders = elect_leaders(runtime, h, views.weights, &state.statuses);
    // two simultaneous leaders can never see each other's ball
    for (i, &a) in leaders.iter().enumerate() {
        for &b in &leaders[i + 1..] {
            assert!(
                !runtime.in_election_ball(a, b),
                "leaders {a} and {b} within {} hops",
                runtime.config.election_radius()
            );
        }
    }
    costs.ls_timeslots += runtime.config.election_radius() as u64;
    for &l in &leaders {
        state.statuses[l.0] = VertexStatus::LocalLeader;
        for &x in runtime.election_ball(l) {
            costs.messages[x as usize] += 1;
        }
    }

    let new_winners = apply_leader_decisions(runtime, h, views.weights, state, &leaders)?;

    costs.lb_timeslots += runtime.config.result_radius() as u64;
    for &l in &leaders {
        for &x in &runtime.result_balls[l.0] {
            costs.messages[x as usize] += 1;
        }
    }
    Ok(MiniRoundReport {
        leaders,
        new_winners,
    })
}

/// LS phase: (2r+1) sweeps of neighbor-max propagation compute, for every
/// vertex, the lexicographically maximal (weight, id) pair among the
/// Candidates of its (2r+1)-hop ball; a Candidate leading its own ball is
/// a LocalLeader.
fn elect_leaders(
    runtime: &ProtocolRuntime,
    h: &ExtendedGraph,
    weights: &WeightMap,
    statuses: &[VertexStatus],
) -> Vec<VertexId> {
    let nv = runtime.num_vertices;
    let mut best: Vec<Option<(f64, usize)>> = (0..nv)
        .map(|v| (statuses[v] == VertexStatus::Candidate).then(|| (weights.get(VertexId(v)), v)))
        .collect();
    let mut next = best.clone();
    for _ in 0..runtime.config.election_radius() {
        for v in 0..nv {
            let mut top = best[v];
            for &u in h.neighbors(VertexId(v)) {
                if let Some(cand) = best[u.0] {
                    if top.map_or(true, |t| pair_less(t, cand)) {
                        top = Some(cand);
                    }
                }
            }
            next[v] = top;
        }
        std::mem::swap(&mut best, &mut next);
    }
    (0..nv)
        .filter(|&v| {
            statuses[v] == VertexStatus::Candidate
                && best[v] == Some((weights.get(VertexId(v)), v))
        })
        .map(VertexId)
        .collect()
}

fn pair_less(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// LMWIS phase. Leaders of one mini-round have disjoint decision balls,
/// so the per-leader updates commute.
fn apply_leader_decisions(
    runtime: &ProtocolRuntime,
    h: &ExtendedGraph,
    weights: &WeightMap,
    state: &mut DecisionState,
    leaders: &[VertexId],
) -> Result<Vec<VertexId>, ProtocolError> {
    let mut new_winners = Vec::new();
    for &leader in leaders {
        let candidates: Vec<VertexId> = runtime.decision_balls[leader.0]
            .iter()
            .map(|&u| VertexId(u as usize))
            .filter(|&u| {
                matches!(
                    state.statuses[u.0],
                    VertexStatus::Candidate | VertexStatus::LocalLeader
                )
            })
            .collect();
        let result: MwisResult = local_mwis(h, &candidates, weights)?;
        for &v in &result.members {
            for &u in h.neighbors(v) {
                assert!(
                    state.statuses[u.0] != VertexStatus::Winner,
                    "winner {v} adjacent to existing winner {u}"
                );
            }
            state.statuses[v.0] = VertexStatus::Winner;
            state.candidates_remaining -= 1;
            state.winners.push(v);
            new_winners.push(v);
        }
        for &v in &candidates {
            if matches!(
                state.statuses[v.0],
                VertexStatus::Candidate | VertexStatus::LocalLeader
            ) {
                state.demote(v);
            }
        }
        // Candidate neighbors of fresh winners lose as well: their
        // channel is taken, and leaving them in play could elect them
        // later and break winner independence.
        for &v in &result.members {
            for &u in h.neighbors(v) {
                if state.statuses[u.0] == VertexStatus::Candidate {
                    state.demote(u);
                }
            }
        }
    }
    Ok(new_winners)
}

/// Outcome of one decision phase.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionOutcome {
    pub strategy: Strategy,
    /// Cumulative Winner weight after each mini-round `1..=D`; once all
    /// vertices are marked the curve stays flat.
    pub weight_per_mini_round: Vec<f64>,
    pub mini_rounds_used: usize,
}

/// Runs up to `D` mini-rounds (stopping early once no Candidates remain),
/// demotes leftover Candidates, and returns the Winner set. The Winner
/// set always passes the independence check.
pub fn decide_strategy(
    runtime: &ProtocolRuntime,
    h: &ExtendedGraph,
    views: &WeightViews<'_>,
    costs: &mut ProtocolCosts,
) -> Result<DecisionOutcome, ProtocolError> {
    runtime.check_graph(h)?;
    let mut state = DecisionState::new(h.num_vertices());
    let mut curve = Vec::with_capacity(runtime.config.mini_rounds);
    let mut executed = 0;
    for _ in 0..runtime.config.mini_rounds {
        if state.candidates_remaining == 0 {
            break;
        }
        run_mini_round(runtime, h, views, &mut state, costs)?;
        executed += 1;
        let mut winners = state.winners.clone();
        winners.sort_unstable();
        curve.push(views.weights.total(&winners));
    }
    costs.mini_rounds_used = executed;
    let last = curve.last().copied().unwrap_or(0.0);
    curve.resize(runtime.config.mini_rounds, last);

    // leftover candidates are demoted and do not transmit
    for v in 0..h.num_vertices() {
        if state.statuses[v] == VertexStatus::Candidate {
            state.demote(VertexId(v));
        }
    }
    let strategy = Strategy::new(state.winners.clone());
    assert!(
        independence_check(h, strategy.members()),
        "winner set is not independent"
    );
    Ok(DecisionOutcome {
        strategy,
        weight_per_mini_round: curve,
        mini_rounds_used: executed,
    })
}

/// One full strategy-decision round: WB followed by the decision phase.
pub fn run_round(
    runtime: &ProtocolRuntime,
    h: &ExtendedGraph,
    prev_strategy: &Strategy,
    weights: &WeightMap,
) -> Result<(DecisionOutcome, ProtocolCosts), ProtocolError> {
    let mut costs = ProtocolCosts::new(h.num_vertices());
    let views = weight_broadcast(runtime, h, prev_strategy, weights, &mut costs)?;
    let outcome = decide_strategy(runtime, h, &views, &mut costs)?;
    Ok((outcome, costs))
}

/// Round time `t_a = t_s + t_d` under the configured decision-time model.
/// The default experiment model fixes `t_s = 4·t_m`, making every round
/// exactly `t_a` long; the per-mini-round model charges
/// `(mini_rounds_used + 1)·t_m` instead.
pub fn account_round(costs: &ProtocolCosts, timing: &TimingModel) -> f64 {
    match timing.decision_model {
        DecisionTimeModel::FixedSlots { .. } => timing.t_a_ms,
        DecisionTimeModel::PerMiniRound => {
            (costs.mini_rounds_used as f64 + 1.0) * timing.t_m_ms() + timing.t_d_ms
        }
    }
}

/// The distributed protocol as a one-shot MWIS solver (fresh runtime and
/// empty previous strategy per call).
#[derive(Debug, Clone)]
pub struct DistributedSolver {
    pub config: ProtocolConfig,
}

impl MwisSolver for DistributedSolver {
    fn solve(&self, h: &ExtendedGraph, weights: &WeightMap) -> Result<MwisResult, MwisError> {
        let runtime = ProtocolRuntime::new(h, self.config)
            .map_err(|_| MwisError::InvalidEpsilon(self.config.epsilon))?;
        let (outcome, _) = run_round(&runtime, h, &Strategy::empty(), weights)
            .expect("distributed decision failed");
        let members = outcome.strategy.members().to_vec();
        let total_weight = weights.total(&members);
        Ok(MwisResult {
            members,
            total_weight,
        })
    }

    fn name(&self) -> &'static str {
        "distributed"
    }
}
