//! Regret, timing, and periodic-throughput statistics.
//!
//! Regret is measured against `R_1`, the weight of the exact MWIS of `H`
//! under the true normalized means. β-regret replaces the benchmark by
//! `R_1/β` and may go negative once the learned strategies beat that
//! threshold. Practical variants charge for decision overhead through
//! `θ = t_d/t_a`, the fraction of each round spent transmitting data.

use crate::graph::ExtendedGraph;
use crate::mwis::{exact_mwis_guarded, MwisError, WeightMap, DEFAULT_EXACT_GUARD};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("{0}")]
    InvalidTiming(String),
    #[error("beta must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error("r1 must be nonnegative and finite, got {0}")]
    InvalidOptimum(f64),
    #[error("expected {expected} per-period estimates for {slots} slots with y = {y}, got {got}")]
    EstimateCount {
        expected: usize,
        got: usize,
        slots: usize,
        y: usize,
    },
}

/// How the strategy-decision time `t_s` is charged per round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DecisionTimeModel {
    /// `t_s` is a fixed number of mini-rounds (the experiments fix 4:
    /// one for the weight broadcast, three for strategy decision).
    FixedSlots { slots: u32 },
    /// `t_s = (mini_rounds_used + 1)·t_m`, one extra for the broadcast.
    PerMiniRound,
}

impl Default for DecisionTimeModel {
    fn default() -> Self {
        DecisionTimeModel::FixedSlots { slots: 4 }
    }
}

/// Round timing: `t_a = t_s + t_d`, `t_m = 2·t_b + t_l`,
/// `θ = t_d / t_a`, and the update period `y` in time slots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingModel {
    pub t_a_ms: f64,
    pub t_b_ms: f64,
    pub t_l_ms: f64,
    pub t_d_ms: f64,
    pub y: usize,
    pub decision_model: DecisionTimeModel,
}

impl Default for TimingModel {
    /// The simulation parameter values: `t_a = 2000 ms`, `t_b = 100 ms`,
    /// `t_l = 50 ms`, `t_d = 1000 ms`, every-slot updates.
    fn default() -> Self {
        Self {
            t_a_ms: 2000.0,
            t_b_ms: 100.0,
            t_l_ms: 50.0,
            t_d_ms: 1000.0,
            y: 1,
            decision_model: DecisionTimeModel::default(),
        }
    }
}

impl TimingModel {
    /// Mini-timeslot length `t_m = 2·t_b + t_l`.
    pub fn t_m_ms(&self) -> f64 {
        2.0 * self.t_b_ms + self.t_l_ms
    }

    /// Strategy-decision time `t_s = t_a − t_d`.
    pub fn t_s_ms(&self) -> f64 {
        self.t_a_ms - self.t_d_ms
    }

    /// Fraction of a round spent transmitting data.
    pub fn theta(&self) -> f64 {
        self.t_d_ms / self.t_a_ms
    }

    /// Effective-throughput ceiling for update period `y`:
    /// `((y−1)·t_a + t_d) / (y·t_a)`.
    pub fn periodic_fraction(&self, y: usize) -> f64 {
        ((y as f64 - 1.0) * self.t_a_ms + self.t_d_ms) / (y as f64 * self.t_a_ms)
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        let fail = |m: String| Err(MetricsError::InvalidTiming(m));
        for (name, v) in [
            ("t_a_ms", self.t_a_ms),
            ("t_b_ms", self.t_b_ms),
            ("t_l_ms", self.t_l_ms),
            ("t_d_ms", self.t_d_ms),
        ] {
            if !v.is_finite() || v < 0.0 {
                return fail(format!("{name} must be nonnegative and finite, got {v}"));
            }
        }
        if self.t_a_ms <= 0.0 {
            return fail("t_a_ms must be positive".into());
        }
        if self.t_d_ms > self.t_a_ms {
            return fail(format!(
                "t_d_ms {} exceeds round length t_a_ms {}",
                self.t_d_ms, self.t_a_ms
            ));
        }
        if self.y == 0 {
            return fail("update period y must be at least 1".into());
        }
        if let DecisionTimeModel::FixedSlots { slots } = self.decision_model {
            let expected = slots as f64 * self.t_m_ms() + self.t_d_ms;
            if (expected - self.t_a_ms).abs() > 1e-9 * self.t_a_ms.max(1.0) {
                return fail(format!(
                    "fixed decision model expects t_a = {slots}·t_m + t_d = {expected} ms, got {}",
                    self.t_a_ms
                ));
            }
        }
        Ok(())
    }
}

/// `R_1`: the weight of the exact MWIS of `H` under the true normalized
/// means, in normalized units.
pub fn oracle_optimum(h: &ExtendedGraph, true_means: &WeightMap) -> Result<f64, MwisError> {
    let all: Vec<_> = h.vertices().collect();
    Ok(exact_mwis_guarded(h, &all, true_means, DEFAULT_EXACT_GUARD)?.total_weight)
}

/// One round's regret contributions and the running cumulative sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretPoint {
    pub regret: f64,
    pub beta_regret: f64,
    pub practical_regret: f64,
    pub practical_beta_regret: f64,
    pub cum_regret: f64,
    pub cum_beta_regret: f64,
    pub cum_practical_regret: f64,
    pub cum_practical_beta_regret: f64,
}

/// Accumulates per-round regret against a fixed `R_1`:
/// `regret += R_1 − R_x(t)`, `β-regret += R_1/β − R_x(t)`, and the
/// practical variants replace `R_x(t)` by `θ·R_x(t)`.
#[derive(Debug, Clone)]
pub struct RegretTracker {
    r1: f64,
    beta: f64,
    theta: f64,
    cum: [f64; 4],
    rounds: u64,
}

impl RegretTracker {
    pub fn new(r1: f64, beta: f64, theta: f64) -> Result<Self, MetricsError> {
        if !r1.is_finite() || r1 < 0.0 {
            return Err(MetricsError::InvalidOptimum(r1));
        }
        if !beta.is_finite() || beta <= 0.0 {
            return Err(MetricsError::InvalidBeta(beta));
        }
        Ok(Self {
            r1,
            beta,
            theta,
            cum: [0.0; 4],
            rounds: 0,
        })
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn step(&mut self, observed_round_throughput: f64) -> RegretPoint {
        let r = self.r1 - observed_round_throughput;
        let b = self.r1 / self.beta - observed_round_throughput;
        let p = self.r1 - self.theta * observed_round_throughput;
        let pb = self.r1 / self.beta - self.theta * observed_round_throughput;
        self.cum[0] += r;
        self.cum[1] += b;
        self.cum[2] += p;
        self.cum[3] += pb;
        self.rounds += 1;
        RegretPoint {
            regret: r,
            beta_regret: b,
            practical_regret: p,
            practical_beta_regret: pb,
            cum_regret: self.cum[0],
            cum_beta_regret: self.cum[1],
            cum_practical_regret: self.cum[2],
            cum_practical_beta_regret: self.cum[3],
        }
    }
}

/// Per-period throughput statistics under periodic weight updates.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodPoint {
    /// 1-based period index `z`.
    pub period: usize,
    /// Actual average throughput `R_P(z)` gained in the period.
    pub actual: f64,
    /// Estimated average throughput `W_P(z)` from the decision's index.
    pub estimated: f64,
    /// Running average of `R_P(1..=z)`.
    pub avg_actual: f64,
    /// Running average of `W_P(1..=z)`.
    pub avg_estimated: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSeries {
    pub points: Vec<PeriodPoint>,
    /// Slots in an incomplete trailing period, dropped with notice.
    pub dropped_slots: usize,
}

/// Groups a per-slot throughput trace into periods of `timing.y` slots.
///
/// The period's first slot carries the decision overhead and contributes
/// `R_x·t_d`; the remaining `y−1` slots transmit for the full `t_a`:
/// `R_P(z) = (R_x(zy+1)·t_d + Σ R_x(t)·t_a) / (y·t_a)`, and
/// `W_P(z) = ((y−1)·t_a + t_d)·W_x(zy+1) / (y·t_a)` from the estimated
/// strategy weight at the decision slot. Running averages follow the
/// batch-mean recurrence.
pub fn periodic_throughput(
    observed_per_slot: &[f64],
    estimated_at_decision: &[f64],
    timing: &TimingModel,
) -> Result<PeriodicSeries, MetricsError> {
    timing.validate()?;
    let y = timing.y;
    let periods = observed_per_slot.len() / y;
    let dropped_slots = observed_per_slot.len() - periods * y;
    if estimated_at_decision.len() < periods {
        return Err(MetricsError::EstimateCount {
            expected: periods,
            got: estimated_at_decision.len(),
            slots: observed_per_slot.len(),
            y,
        });
    }
    let t_a = timing.t_a_ms;
    let t_d = timing.t_d_ms;
    let w_scale = ((y as f64 - 1.0) * t_a + t_d) / (y as f64 * t_a);
    let mut points = Vec::with_capacity(periods);
    let mut avg_actual = 0.0;
    let mut avg_estimated = 0.0;
    for z in 0..periods {
        let first = observed_per_slot[z * y];
        let rest: f64 = observed_per_slot[z * y + 1..(z + 1) * y].iter().sum();
        let actual = (first * t_d + rest * t_a) / (y as f64 * t_a);
        let estimated = w_scale * estimated_at_decision[z];
        let zf = (z + 1) as f64;
        avg_actual = ((zf - 1.0) * avg_actual + actual) / zf;
        avg_estimated = ((zf - 1.0) * avg_estimated + estimated) / zf;
        points.push(PeriodPoint {
            period: z + 1,
            actual,
            estimated,
            avg_actual,
            avg_estimated,
        });
    }
    Ok(PeriodicSeries {
        points,
        dropped_slots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ConflictGraph;
    use crate::graph::ExtendedGraph;
    use approx::assert_relative_eq;

    #[test]
    fn table_values_give_the_stated_identities() {
        let timing = TimingModel::default();
        timing.validate().unwrap();
        assert_eq!(timing.t_m_ms(), 250.0);
        assert_eq!(timing.t_s_ms(), 1000.0);
        assert_eq!(timing.t_a_ms, 2000.0);
        assert_eq!(timing.theta(), 0.5);
    }

    #[test]
    fn zero_transmission_time_means_zero_theta() {
        let timing = TimingModel {
            t_a_ms: 1000.0,
            t_d_ms: 0.0,
            ..TimingModel::default()
        };
        // t_a = 4·t_m + t_d = 1000 stays consistent with the fixed model
        timing.validate().unwrap();
        assert_eq!(timing.theta(), 0.0);
    }

    #[test]
    fn periodic_fractions_are_exact() {
        let timing = TimingModel::default();
        assert_eq!(timing.periodic_fraction(1), 0.5);
        assert_eq!(timing.periodic_fraction(5), 0.9);
        assert_eq!(timing.periodic_fraction(10), 0.95);
        assert_eq!(timing.periodic_fraction(20), 0.975);
    }

    #[test]
    fn inconsistent_fixed_model_is_rejected() {
        let timing = TimingModel {
            t_a_ms: 1500.0,
            ..TimingModel::default()
        };
        assert!(timing.validate().is_err());
        let timing = TimingModel {
            y: 0,
            ..TimingModel::default()
        };
        assert!(timing.validate().is_err());
    }

    #[test]
    fn oracle_optimum_picks_the_best_channel() {
        let g = ConflictGraph::from_positions(vec![[0.0, 0.0]], 2).unwrap();
        let h = ExtendedGraph::from_conflict_graph(&g);
        let means = WeightMap::new(vec![0.3, 0.8]).unwrap();
        assert_eq!(oracle_optimum(&h, &means).unwrap(), 0.8);
    }

    #[test]
    fn oracle_optimum_sums_isolated_nodes() {
        let g =
            ConflictGraph::from_positions(vec![[0.0, 0.0], [10.0, 0.0], [20.0, 0.0]], 1).unwrap();
        let h = ExtendedGraph::from_conflict_graph(&g);
        let means = WeightMap::new(vec![0.2, 0.5, 0.1]).unwrap();
        assert_relative_eq!(oracle_optimum(&h, &means).unwrap(), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn optimal_play_has_zero_regret() {
        let mut tracker = RegretTracker::new(2.0, 1.5, 0.5).unwrap();
        for _ in 0..10 {
            let p = tracker.step(2.0);
            assert_eq!(p.regret, 0.0);
        }
        assert_eq!(tracker.step(2.0).cum_regret, 0.0);
    }

    #[test]
    fn beta_regret_sign_convention() {
        // playing the optimum with β = 2 gives −R_1/2 per round
        let mut tracker = RegretTracker::new(2.0, 2.0, 0.5).unwrap();
        let p = tracker.step(2.0);
        assert_eq!(p.beta_regret, -1.0);
        let p = tracker.step(2.0);
        assert_eq!(p.cum_beta_regret, -2.0);
    }

    #[test]
    fn cumulative_regret_is_nondecreasing_below_the_optimum() {
        let mut tracker = RegretTracker::new(1.0, 1.5, 0.5).unwrap();
        let mut prev = 0.0;
        for i in 0..50 {
            let p = tracker.step(0.9 - 0.001 * (i % 7) as f64);
            assert!(p.cum_regret >= prev);
            prev = p.cum_regret;
        }
    }

    #[test]
    fn single_slot_periods_scale_by_theta() {
        let timing = TimingModel::default();
        let observed = vec![1.0, 0.8, 0.6];
        let estimated = vec![1.0, 1.0, 1.0];
        let series = periodic_throughput(&observed, &estimated, &timing).unwrap();
        assert_eq!(series.points[0].actual, 0.5);
        assert_eq!(series.points[1].actual, 0.4);
        assert_eq!(series.points[2].actual, 0.3);
        assert_eq!(series.dropped_slots, 0);
    }

    #[test]
    fn constant_throughput_reaches_the_periodic_ceiling() {
        let timing = TimingModel {
            y: 5,
            ..TimingModel::default()
        };
        let observed = vec![2.0; 10];
        let estimated = vec![2.0, 2.0];
        let series = periodic_throughput(&observed, &estimated, &timing).unwrap();
        for p in &series.points {
            assert_relative_eq!(p.actual, 0.9 * 2.0, epsilon = 1e-12);
            assert_relative_eq!(p.estimated, 0.9 * 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn incomplete_final_period_is_dropped_with_notice() {
        let timing = TimingModel {
            y: 4,
            ..TimingModel::default()
        };
        let observed = vec![1.0; 11];
        let estimated = vec![1.0, 1.0];
        let series = periodic_throughput(&observed, &estimated, &timing).unwrap();
        assert_eq!(series.points.len(), 2);
        assert_eq!(series.dropped_slots, 3);
    }

    #[test]
    fn running_average_equals_the_batch_average() {
        let timing = TimingModel {
            y: 2,
            ..TimingModel::default()
        };
        let observed: Vec<f64> = (0..40).map(|i| 0.1 + 0.02 * i as f64).collect();
        let estimated: Vec<f64> = (0..20).map(|i| 0.2 + 0.01 * i as f64).collect();
        let series = periodic_throughput(&observed, &estimated, &timing).unwrap();
        for (z, point) in series.points.iter().enumerate() {
            let batch: f64 =
                series.points[..=z].iter().map(|p| p.actual).sum::<f64>() / (z + 1) as f64;
            assert_relative_eq!(point.avg_actual, batch, epsilon = 1e-12);
        }
    }
}
