//! Bandit learning state and index policies.
//!
//! The learner keeps two length-K vectors over the arms (the vertices of
//! `H`): empirical means and play counts. Each round it forms per-arm
//! exploration-adjusted weights and hands them to an MWIS solver to pick
//! the next strategy.
//!
//! Proposed index: `w_k = μ̃_k + sqrt(max(ln(t^{2/3} / (K·m_k)), 0) / m_k)`.
//! LLR baseline:   `w_k = μ̃_k + sqrt((L+1)·ln t / m_k)`.
//!
//! Arms never played get a large selection-forcing value so that every
//! arm is explorable before the formulas apply.

use crate::graph::{ExtendedGraph, Strategy, VertexId};
use crate::mwis::{MwisError, MwisSolver, WeightMap};
use thiserror::Error;

/// Index assigned to arms with zero plays. Dominates any sum of played
/// indices at the network sizes modeled here (N·M ≤ a few thousand arms,
/// played indices stay below ~10), so unplayed arms win every conflict
/// against played ones while remaining finite for the solvers.
pub const SELECTION_FORCING_INDEX: f64 = 1e6;

#[derive(Debug, Error)]
pub enum LearningError {
    #[error("observation for arm {0} which is not in the played strategy")]
    ObservationForUnplayedArm(usize),
    #[error("played arm {0} is missing an observation")]
    MissingObservation(usize),
    #[error("observation {0} outside [0, 1]")]
    ObservationOutOfRange(f64),
    #[error("max strategy size L must be at least 1")]
    DegenerateStrategySize,
    #[error("round t must be at least 1")]
    RoundOutOfRange,
}

/// Per-arm empirical means and play counts; `K = N·M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    means: Vec<f64>,
    plays: Vec<u64>,
    round: u64,
}

impl PolicyState {
    pub fn new(num_arms: usize) -> Self {
        Self {
            means: vec![0.0; num_arms],
            plays: vec![0; num_arms],
            round: 0,
        }
    }

    pub fn num_arms(&self) -> usize {
        self.means.len()
    }

    /// Empirical mean `μ̃_k`; zero (and defined-as-unplayed) while `m_k = 0`.
    pub fn mean(&self, arm: VertexId) -> f64 {
        self.means[arm.0]
    }

    pub fn plays(&self, arm: VertexId) -> u64 {
        self.plays[arm.0]
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// Applies one round of observations: played arms get
    /// `m_k += 1, μ̃_k ← (μ̃_k·(m_k−1) + ξ_k)/m_k`, unplayed arms are
    /// untouched, and the round counter advances (also for an empty
    /// strategy).
    pub fn update(
        &mut self,
        played: &Strategy,
        observations: &[(VertexId, f64)],
    ) -> Result<(), LearningError> {
        for &(arm, value) in observations {
            if !played.contains(arm) {
                return Err(LearningError::ObservationForUnplayedArm(arm.0));
            }
            if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(LearningError::ObservationOutOfRange(value));
            }
        }
        for &arm in played.members() {
            if !observations.iter().any(|&(a, _)| a == arm) {
                return Err(LearningError::MissingObservation(arm.0));
            }
        }
        for &(arm, value) in observations {
            let m = self.plays[arm.0] + 1;
            self.plays[arm.0] = m;
            self.means[arm.0] = (self.means[arm.0] * (m - 1) as f64 + value) / m as f64;
        }
        self.round += 1;
        Ok(())
    }
}

/// Per-arm exploration-adjusted weights for one round.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexVector {
    values: Vec<f64>,
}

impl IndexVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, arm: VertexId) -> f64 {
        self.values[arm.0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The same values as solver weights.
    pub fn weights(&self) -> WeightMap {
        WeightMap::new(self.values.clone()).expect("index values are nonnegative and finite")
    }
}

/// Single-arm proposed index. The `max(…, 0)` clamp means the bonus
/// vanishes as soon as `t^{2/3} ≤ K·m`.
pub fn proposed_index_value(mean: f64, plays: u64, num_arms: usize, t: f64) -> f64 {
    debug_assert!(plays > 0);
    let m = plays as f64;
    let log_term = (t.powf(2.0 / 3.0) / (num_arms as f64 * m)).ln().max(0.0);
    mean + (log_term / m).sqrt()
}

/// Single-arm LLR baseline index with strategy-size parameter `L`.
pub fn llr_index_value(mean: f64, plays: u64, max_strategy_size: usize, t: f64) -> f64 {
    debug_assert!(plays > 0);
    let m = plays as f64;
    mean + ((max_strategy_size as f64 + 1.0) * t.ln() / m).sqrt()
}

/// The proposed policy's index vector at round `t ≥ 1`.
pub fn compute_index(state: &PolicyState, t: u64) -> Result<IndexVector, LearningError> {
    if t == 0 {
        return Err(LearningError::RoundOutOfRange);
    }
    let k = state.num_arms();
    let values = (0..k)
        .map(|i| {
            if state.plays[i] == 0 {
                SELECTION_FORCING_INDEX
            } else {
                proposed_index_value(state.means[i], state.plays[i], k, t as f64)
            }
        })
        .collect();
    Ok(IndexVector { values })
}

/// The LLR baseline's index vector at round `t ≥ 1`; `L ≥ 1`.
pub fn llr_index(
    state: &PolicyState,
    t: u64,
    max_strategy_size: usize,
) -> Result<IndexVector, LearningError> {
    if t == 0 {
        return Err(LearningError::RoundOutOfRange);
    }
    if max_strategy_size == 0 {
        return Err(LearningError::DegenerateStrategySize);
    }
    let values = (0..state.num_arms())
        .map(|i| {
            if state.plays[i] == 0 {
                SELECTION_FORCING_INDEX
            } else {
                llr_index_value(state.means[i], state.plays[i], max_strategy_size, t as f64)
            }
        })
        .collect();
    Ok(IndexVector { values })
}

/// Selects the round's strategy as the solver's (approximate) MWIS of `H`
/// under the index weights.
pub fn select_strategy(
    h: &ExtendedGraph,
    index: &IndexVector,
    solver: &dyn MwisSolver,
) -> Result<Strategy, MwisError> {
    let result = solver.solve(h, &index.weights())?;
    debug_assert!(crate::graph::independence_check(h, &result.members));
    Ok(Strategy::new(result.members))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ChannelId, ConflictGraph, NodeId};
    use crate::mwis::ExactSolver;
    use approx::assert_relative_eq;
    use proptest::{prop_assert, proptest};

    fn state_with(means: &[f64], plays: &[u64]) -> PolicyState {
        PolicyState {
            means: means.to_vec(),
            plays: plays.to_vec(),
            round: plays.iter().copied().max().unwrap_or(0),
        }
    }

    #[test]
    fn clamp_zeroes_the_bonus_once_plays_catch_up() {
        // t^{2/3} ≤ K·m  ⇒  w = μ̃ exactly
        let k = 9;
        assert_eq!(proposed_index_value(0.5, 1, k, 27.0), 0.5); // t^{2/3} = 9 = K·m
        assert_eq!(proposed_index_value(0.25, 100, k, 1000.0), 0.25); // 100 ≤ 900
    }

    #[test]
    fn index_value_matches_the_frozen_oracle() {
        // 0.5 + sqrt(ln(1000^{2/3}/9)); high-precision reference value
        let v = proposed_index_value(0.5, 1, 9, 1000.0);
        assert_relative_eq!(v, 2.051_755_653_655_520_6, epsilon = 1e-12);
    }

    #[test]
    fn index_is_nonincreasing_in_plays() {
        let mut prev = f64::INFINITY;
        for m in [1u64, 2, 4, 8, 16, 1000, 100_000] {
            let v = proposed_index_value(0.5, m, 9, 1000.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn index_never_drops_below_the_mean() {
        let state = state_with(&[0.3, 0.8, 0.0], &[1, 7, 0]);
        for t in [1u64, 10, 1000, 1_000_000] {
            let idx = compute_index(&state, t).unwrap();
            for arm in 0..3 {
                assert!(idx.get(VertexId(arm)) >= state.mean(VertexId(arm)));
            }
        }
    }

    #[test]
    fn unplayed_arms_are_selection_forcing() {
        let state = state_with(&[0.9, 0.0], &[100, 0]);
        let idx = compute_index(&state, 50).unwrap();
        assert_eq!(idx.get(VertexId(1)), SELECTION_FORCING_INDEX);
        assert!(idx.get(VertexId(1)) > idx.get(VertexId(0)));
    }

    #[test]
    fn llr_value_matches_the_frozen_oracle() {
        // μ̃ = 0.5, m = 1, L = 15, t = e ⇒ 0.5 + sqrt(16) = 4.5
        let v = llr_index_value(0.5, 1, 15, std::f64::consts::E);
        assert_relative_eq!(v, 4.5, epsilon = 1e-12);
    }

    #[test]
    fn llr_bonus_vanishes_with_many_plays() {
        let mut prev = f64::INFINITY;
        for m in [1u64, 100, 10_000, 1_000_000_000_000] {
            let v = llr_index_value(0.5, m, 15, 1000.0);
            assert!(v < prev);
            prev = v;
        }
        assert!((prev - 0.5).abs() < 1e-4);
    }

    #[test]
    fn llr_rejects_degenerate_strategy_size() {
        let state = state_with(&[0.5], &[1]);
        assert!(matches!(
            llr_index(&state, 10, 0),
            Err(LearningError::DegenerateStrategySize)
        ));
    }

    #[test]
    fn round_zero_is_rejected() {
        let state = state_with(&[0.5], &[1]);
        assert!(matches!(
            compute_index(&state, 0),
            Err(LearningError::RoundOutOfRange)
        ));
    }

    #[test]
    fn update_applies_the_running_mean() {
        let g = ConflictGraph::from_positions(vec![[0.0, 0.0]], 2).unwrap();
        let h = crate::graph::ExtendedGraph::from_conflict_graph(&g);
        let arm = h.vertex(NodeId(0), ChannelId(0));
        let mut state = state_with(&[0.5, 0.0], &[1, 0]);
        let played = Strategy::new(vec![arm]);
        state.update(&played, &[(arm, 1.0)]).unwrap();
        assert_eq!(state.mean(arm), 0.75);
        assert_eq!(state.plays(arm), 2);
        assert_eq!(state.plays(VertexId(1)), 0);
    }

    #[test]
    fn empty_strategy_only_advances_the_round() {
        let mut state = state_with(&[0.5], &[3]);
        let before = state.clone();
        state.update(&Strategy::empty(), &[]).unwrap();
        assert_eq!(state.means, before.means);
        assert_eq!(state.plays, before.plays);
        assert_eq!(state.round(), before.round() + 1);
    }

    #[test]
    fn observation_sequence_equals_the_batch_mean() {
        let mut state = PolicyState::new(1);
        let arm = VertexId(0);
        let played = Strategy::new(vec![arm]);
        for x in [0.2, 0.4, 0.6] {
            state.update(&played, &[(arm, x)]).unwrap();
        }
        assert_relative_eq!(state.mean(arm), 0.4, epsilon = 1e-15);
        assert_eq!(state.plays(arm), 3);
    }

    #[test]
    fn update_rejects_mismatched_observations() {
        let mut state = PolicyState::new(2);
        let played = Strategy::new(vec![VertexId(0)]);
        assert!(matches!(
            state.update(&played, &[(VertexId(1), 0.5)]),
            Err(LearningError::ObservationForUnplayedArm(1))
        ));
        assert!(matches!(
            state.update(&played, &[]),
            Err(LearningError::MissingObservation(0))
        ));
        assert!(matches!(
            state.update(&played, &[(VertexId(0), 1.5)]),
            Err(LearningError::ObservationOutOfRange(_))
        ));
    }

    #[test]
    fn select_strategy_prefers_the_better_channel() {
        let g = ConflictGraph::from_positions(vec![[0.0, 0.0]], 2).unwrap();
        let h = crate::graph::ExtendedGraph::from_conflict_graph(&g);
        let index = IndexVector {
            values: vec![0.3, 0.8],
        };
        let s = select_strategy(&h, &index, &ExactSolver::default()).unwrap();
        assert_eq!(s.members(), &[VertexId(1)]);
    }

    #[test]
    fn all_zero_index_yields_an_empty_strategy() {
        let g = ConflictGraph::from_positions(vec![[0.0, 0.0]], 2).unwrap();
        let h = crate::graph::ExtendedGraph::from_conflict_graph(&g);
        let index = IndexVector {
            values: vec![0.0, 0.0],
        };
        let s = select_strategy(&h, &index, &ExactSolver::default()).unwrap();
        assert!(s.is_empty());
    }

    proptest! {
        /// Running mean equals the batch mean for arbitrary sequences.
        #[test]
        fn running_mean_equals_batch_mean(values in proptest::collection::vec(0.0f64..=1.0, 1..200)) {
            let mut state = PolicyState::new(1);
            let arm = VertexId(0);
            let played = Strategy::new(vec![arm]);
            for &x in &values {
                state.update(&played, &[(arm, x)]).unwrap();
            }
            let batch = values.iter().sum::<f64>() / values.len() as f64;
            let rel = (state.mean(arm) - batch).abs() / batch.abs().max(1e-300);
            prop_assert!(rel <= 1e-9 || (state.mean(arm) - batch).abs() <= 1e-12);
        }

        /// The clamp keeps every index at or above its empirical mean.
        #[test]
        fn index_clamp_holds(mean in 0.0f64..=1.0, plays in 1u64..10_000, t in 1u64..1_000_000) {
            let v = proposed_index_value(mean, plays, 45, t as f64);
            prop_assert!(v >= mean);
        }
    }
}
