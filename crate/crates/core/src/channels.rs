//! Stochastic per-(node, channel) data-rate processes.
//!
//! Each (node, channel) pair is assigned one of the configured channel
//! types; its data rate evolves as an i.i.d. Gaussian process around the
//! type's mean rate, normalized by `max_rate` so that every mean lies in
//! [0, 1]. Samples are clipped to [0, 1] and drawn from per-pair RNG
//! streams, so pairs are mutually independent and advancing one pair's
//! stream never perturbs another's.

use crate::graph::{ChannelId, NodeId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Channel-type mean data rates in kbps used throughout the experiments.
pub const DEFAULT_RATE_TABLE_KBPS: [f64; 8] =
    [150.0, 225.0, 300.0, 450.0, 600.0, 900.0, 1200.0, 1350.0];

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("rate table must be non-empty")]
    EmptyRateTable,
    #[error("rate {0} kbps exceeds max_rate {1} kbps (normalized mean must be in [0,1])")]
    RateAboveMax(f64, f64),
    #[error("rates must be nonnegative and finite, got {0}")]
    InvalidRate(f64),
    #[error("max_rate must be positive, got {0}")]
    InvalidMaxRate(f64),
    #[error("sigma must be nonnegative and finite, got {0}")]
    InvalidSigma(f64),
    #[error("assignment length {0} does not match n·m = {1}")]
    AssignmentLength(usize, usize),
    #[error("assignment entry {0} out of range for rate table of {1} types")]
    AssignmentRange(usize, usize),
}

/// Ground-truth channel model: the rate table, the per-pair type
/// assignment, the Gaussian standard deviation (normalized units), and
/// the normalization constant.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    num_nodes: usize,
    num_channels: usize,
    rate_table_kbps: Vec<f64>,
    assignment: Vec<usize>,
    sigma: f64,
    max_rate_kbps: f64,
}

impl ChannelModel {
    pub fn new(
        num_nodes: usize,
        num_channels: usize,
        rate_table_kbps: Vec<f64>,
        assignment: Vec<usize>,
        sigma: f64,
        max_rate_kbps: f64,
    ) -> Result<Self, ChannelError> {
        if rate_table_kbps.is_empty() {
            return Err(ChannelError::EmptyRateTable);
        }
        if !(max_rate_kbps > 0.0) || !max_rate_kbps.is_finite() {
            return Err(ChannelError::InvalidMaxRate(max_rate_kbps));
        }
        for &r in &rate_table_kbps {
            if !r.is_finite() || r < 0.0 {
                return Err(ChannelError::InvalidRate(r));
            }
            if r > max_rate_kbps {
                return Err(ChannelError::RateAboveMax(r, max_rate_kbps));
            }
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(ChannelError::InvalidSigma(sigma));
        }
        if assignment.len() != num_nodes * num_channels {
            return Err(ChannelError::AssignmentLength(
                assignment.len(),
                num_nodes * num_channels,
            ));
        }
        if let Some(&bad) = assignment.iter().find(|&&t| t >= rate_table_kbps.len()) {
            return Err(ChannelError::AssignmentRange(bad, rate_table_kbps.len()));
        }
        Ok(Self {
            num_nodes,
            num_channels,
            rate_table_kbps,
            assignment,
            sigma,
            max_rate_kbps,
        })
    }

    /// Draws the per-pair channel-type assignment uniformly from the rate
    /// table under the given RNG.
    pub fn with_random_assignment<R: Rng>(
        num_nodes: usize,
        num_channels: usize,
        rate_table_kbps: Vec<f64>,
        sigma: f64,
        max_rate_kbps: f64,
        rng: &mut R,
    ) -> Result<Self, ChannelError> {
        let types = rate_table_kbps.len();
        if types == 0 {
            return Err(ChannelError::EmptyRateTable);
        }
        let assignment = (0..num_nodes * num_channels)
            .map(|_| rng.gen_range(0..types))
            .collect();
        Self::new(
            num_nodes,
            num_channels,
            rate_table_kbps,
            assignment,
            sigma,
            max_rate_kbps,
        )
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn num_arms(&self) -> usize {
        self.num_nodes * self.num_channels
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn max_rate_kbps(&self) -> f64 {
        self.max_rate_kbps
    }

    fn arm(&self, node: NodeId, channel: ChannelId) -> usize {
        debug_assert!(node.0 < self.num_nodes && channel.0 < self.num_channels);
        node.0 * self.num_channels + channel.0
    }

    /// The exact normalized mean `μ_{i,j} = rate/max_rate ∈ [0, 1]`.
    pub fn true_mean(&self, node: NodeId, channel: ChannelId) -> f64 {
        self.rate_table_kbps[self.assignment[self.arm(node, channel)]] / self.max_rate_kbps
    }

    /// All normalized means in arm order `k = i·M + j`.
    pub fn true_means(&self) -> Vec<f64> {
        self.assignment
            .iter()
            .map(|&t| self.rate_table_kbps[t] / self.max_rate_kbps)
            .collect()
    }
}

/// Per-pair sampling state: one RNG stream per arm, all derived from a
/// single seed, so distinct pairs can be advanced independently.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    streams: Vec<ChaCha8Rng>,
}

impl ChannelSampler {
    pub fn new(model: &ChannelModel, seed: u64) -> Self {
        let streams = (0..model.num_arms())
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                rng
            })
            .collect();
        Self { streams }
    }

    /// Draws `Gaussian(μ_{i,j}, sigma)` clipped to [0, 1] from the pair's
    /// own stream. With `sigma = 0` this is exactly the mean.
    pub fn sample(&mut self, model: &ChannelModel, node: NodeId, channel: ChannelId) -> f64 {
        let k = model.arm(node, channel);
        let z: f64 = self.streams[k].sample(StandardNormal);
        (model.true_mean(node, channel) + model.sigma() * z).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model_with_sigma(sigma: f64) -> ChannelModel {
        // 2 nodes, 2 channels, assignment cycling through 4 distinct types
        ChannelModel::new(
            2,
            2,
            DEFAULT_RATE_TABLE_KBPS.to_vec(),
            vec![0, 3, 5, 7],
            sigma,
            1350.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_sigma_samples_equal_the_mean() {
        let model = model_with_sigma(0.0);
        let mut sampler = ChannelSampler::new(&model, 9);
        for _ in 0..50 {
            let x = sampler.sample(&model, NodeId(0), ChannelId(1));
            assert_eq!(x, model.true_mean(NodeId(0), ChannelId(1)));
        }
    }

    #[test]
    fn normalized_means_match_the_rate_table() {
        let expected = [
            150.0 / 1350.0,
            225.0 / 1350.0,
            300.0 / 1350.0,
            450.0 / 1350.0,
            600.0 / 1350.0,
            900.0 / 1350.0,
            1200.0 / 1350.0,
            1.0,
        ];
        let model = ChannelModel::new(
            8,
            1,
            DEFAULT_RATE_TABLE_KBPS.to_vec(),
            (0..8).collect(),
            0.1,
            1350.0,
        )
        .unwrap();
        for (i, &e) in expected.iter().enumerate() {
            assert_relative_eq!(model.true_mean(NodeId(i), ChannelId(0)), e, epsilon = 1e-15);
        }
        assert_relative_eq!(expected[0], 0.1111, epsilon = 2e-4);
        assert_relative_eq!(expected[3], 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn uniform_type_assignment_gives_uniform_means() {
        let model =
            ChannelModel::new(3, 2, DEFAULT_RATE_TABLE_KBPS.to_vec(), vec![0; 6], 0.0, 1350.0)
                .unwrap();
        for i in 0..3 {
            for j in 0..2 {
                assert_eq!(model.true_mean(NodeId(i), ChannelId(j)), 150.0 / 1350.0);
            }
        }
    }

    #[test]
    fn random_assignment_is_stable_per_seed() {
        use rand::SeedableRng;
        let mk = || {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
            ChannelModel::with_random_assignment(
                5,
                3,
                DEFAULT_RATE_TABLE_KBPS.to_vec(),
                0.1,
                1350.0,
                &mut rng,
            )
            .unwrap()
        };
        let a = mk();
        let b = mk();
        assert_eq!(a, b);
        assert_eq!(a.true_mean(NodeId(2), ChannelId(1)), b.true_mean(NodeId(2), ChannelId(1)));
    }

    #[test]
    fn sample_mean_converges_to_true_mean() {
        // mid-range mean keeps the clipping bias well under 0.01
        let model = ChannelModel::new(
            1,
            1,
            DEFAULT_RATE_TABLE_KBPS.to_vec(),
            vec![3],
            0.1,
            1350.0,
        )
        .unwrap();
        let mu = model.true_mean(NodeId(0), ChannelId(0));
        let n = 100_000;
        let mut sampler = ChannelSampler::new(&model, 77);
        let mut total = 0.0;
        for _ in 0..n {
            total += sampler.sample(&model, NodeId(0), ChannelId(0));
        }
        let mean = total / n as f64;
        let bound = 3.0 * 0.1 / (n as f64).sqrt() + 0.01;
        assert!(
            (mean - mu).abs() <= bound,
            "|{mean} - {mu}| > {bound}"
        );
    }

    #[test]
    fn samples_stay_in_unit_interval() {
        let model = model_with_sigma(0.5);
        let mut sampler = ChannelSampler::new(&model, 3);
        for _ in 0..10_000 {
            let x = sampler.sample(&model, NodeId(1), ChannelId(0));
            assert!((0.0..=1.0).contains(&x));
        }
    }

    #[test]
    fn pair_streams_are_independent() {
        let model = model_with_sigma(0.2);
        // interleave pair A between B's draws in one sampler, not the other
        let mut interleaved = ChannelSampler::new(&model, 11);
        let mut solo = ChannelSampler::new(&model, 11);
        let mut b1 = Vec::new();
        let mut b2 = Vec::new();
        for i in 0..200 {
            if i % 3 == 0 {
                interleaved.sample(&model, NodeId(0), ChannelId(0));
            }
            b1.push(interleaved.sample(&model, NodeId(1), ChannelId(1)));
            b2.push(solo.sample(&model, NodeId(1), ChannelId(1)));
        }
        assert_eq!(b1, b2);
    }

    #[test]
    fn invalid_models_are_rejected() {
        assert!(matches!(
            ChannelModel::new(1, 1, vec![], vec![], 0.1, 1350.0),
            Err(ChannelError::EmptyRateTable)
        ));
        assert!(matches!(
            ChannelModel::new(1, 1, vec![2000.0], vec![0], 0.1, 1350.0),
            Err(ChannelError::RateAboveMax(..))
        ));
        assert!(matches!(
            ChannelModel::new(1, 1, vec![100.0], vec![0], -0.1, 1350.0),
            Err(ChannelError::InvalidSigma(_))
        ));
        assert!(matches!(
            ChannelModel::new(2, 2, vec![100.0], vec![0, 0, 0], 0.1, 1350.0),
            Err(ChannelError::AssignmentLength(3, 4))
        ));
        assert!(matches!(
            ChannelModel::new(1, 1, vec![100.0], vec![1], 0.1, 1350.0),
            Err(ChannelError::AssignmentRange(1, 1))
        ));
    }
}
