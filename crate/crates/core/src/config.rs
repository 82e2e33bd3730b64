//! Experiment configuration.
//!
//! A single JSON document configures every suite; all defaults mirror the
//! simulation setup (8 channel types at 150–1350 kbps, r = 2, the 2000 ms
//! round with θ = 0.5, a connected 15-user 3-channel benchmark for the
//! regret study, the six convergence cases, and the 100×10 network for
//! the periodic-update study), so an empty document `{}` reproduces it.

use crate::channels::DEFAULT_RATE_TABLE_KBPS;
use crate::metrics::TimingModel;
use crate::protocol::ProtocolConfig;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A validation failure with the offending field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    /// Benchmark network size used by the regret suite.
    pub n: usize,
    pub m: usize,
    pub target_avg_degree: f64,
    pub require_connected: bool,
    /// The `[n, m]` grid the convergence suite sweeps.
    pub cases: Vec<[usize; 2]>,
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self {
            n: 15,
            m: 3,
            target_avg_degree: 4.0,
            require_connected: true,
            cases: vec![[50, 5], [100, 5], [200, 5], [50, 10], [100, 10], [200, 10]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    /// Hop radius for the local MWIS computation.
    pub r: usize,
    /// Mini-round budget D per round.
    pub mini_rounds: usize,
    /// PTAS parameter; ρ = 1 + ε is the reported ratio and the default β.
    pub epsilon: f64,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        Self {
            r: 2,
            mini_rounds: 5,
            epsilon: 0.5,
        }
    }
}

impl ProtocolSection {
    pub fn to_protocol_config(self) -> ProtocolConfig {
        ProtocolConfig {
            r: self.r,
            mini_rounds: self.mini_rounds,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub rate_table_kbps: Vec<f64>,
    /// Gaussian standard deviation in normalized units.
    pub sigma: f64,
    pub max_rate_kbps: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            rate_table_kbps: DEFAULT_RATE_TABLE_KBPS.to_vec(),
            sigma: 0.1,
            max_rate_kbps: 1350.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyChoice {
    Proposed,
    Llr,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    Distributed,
    CentralizedPtas,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Horizon in rounds for the regret suite.
    pub horizon: u64,
    pub seeds: Vec<u64>,
    pub policy: PolicyChoice,
    pub solver: SolverChoice,
    /// Emit one CSV row every this many rounds (the horizon row is always
    /// emitted).
    pub record_every: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            horizon: 20_000,
            seeds: (1..=20).collect(),
            policy: PolicyChoice::Both,
            solver: SolverChoice::Distributed,
            record_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
    pub formats: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: "out".into(),
            formats: vec!["csv".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceSection {
    pub seeds: Vec<u64>,
    pub target_avg_degree: f64,
    pub require_connected: bool,
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        Self {
            seeds: vec![1, 2, 3],
            target_avg_degree: 6.0,
            require_connected: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeriodicSection {
    pub n: usize,
    pub m: usize,
    pub target_avg_degree: f64,
    pub require_connected: bool,
    /// Update periods y, in time slots.
    pub periods: Vec<usize>,
    /// Weight updates per period length (horizon = updates·y slots).
    pub updates: u64,
    pub seeds: Vec<u64>,
}

impl Default for PeriodicSection {
    fn default() -> Self {
        Self {
            n: 100,
            m: 10,
            target_avg_degree: 6.0,
            require_connected: true,
            periods: vec![1, 5, 10, 20],
            updates: 1000,
            seeds: vec![1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MwisBenchSection {
    pub instances: usize,
    pub max_nodes: usize,
    pub max_channels: usize,
    pub epsilons: Vec<f64>,
    pub target_avg_degree: f64,
    pub require_connected: bool,
    pub base_seed: u64,
}

impl Default for MwisBenchSection {
    fn default() -> Self {
        Self {
            instances: 200,
            max_nodes: 12,
            max_channels: 3,
            epsilons: vec![0.5, 1.0],
            target_avg_degree: 4.0,
            require_connected: false,
            base_seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: NetworkSection,
    pub protocol: ProtocolSection,
    pub channels: ChannelSection,
    pub timing: TimingModel,
    pub run: RunSection,
    pub output: OutputSection,
    pub convergence: ConvergenceSection,
    pub periodic: PeriodicSection,
    pub mwis_bench: MwisBenchSection,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| err("<document>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Adds `offset` to every seed in the document.
    pub fn offset_seeds(&mut self, offset: u64) {
        for s in self
            .run
            .seeds
            .iter_mut()
            .chain(self.convergence.seeds.iter_mut())
            .chain(self.periodic.seeds.iter_mut())
        {
            *s = s.wrapping_add(offset);
        }
        self.mwis_bench.base_seed = self.mwis_bench.base_seed.wrapping_add(offset);
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let net = &self.network;
        if net.n == 0 {
            return Err(err("network.n", "must be at least 1"));
        }
        if net.m == 0 {
            return Err(err("network.m", "must be at least 1"));
        }
        if !(net.target_avg_degree > 0.0) {
            return Err(err("network.target_avg_degree", "must be positive"));
        }
        for (i, &[n, m]) in net.cases.iter().enumerate() {
            if n == 0 || m == 0 {
                return Err(err(
                    &format!("network.cases[{i}]"),
                    "both n and m must be at least 1",
                ));
            }
        }
        let p = &self.protocol;
        if p.r == 0 {
            return Err(err("protocol.r", "must be at least 1"));
        }
        if p.mini_rounds == 0 {
            return Err(err("protocol.mini_rounds", "must be at least 1"));
        }
        if !(p.epsilon > 0.0) || !p.epsilon.is_finite() {
            return Err(err("protocol.epsilon", "must be positive and finite"));
        }
        let ch = &self.channels;
        if ch.rate_table_kbps.is_empty() {
            return Err(err("channels.rate_table_kbps", "must be non-empty"));
        }
        if !(ch.max_rate_kbps > 0.0) {
            return Err(err("channels.max_rate_kbps", "must be positive"));
        }
        for (i, &r) in ch.rate_table_kbps.iter().enumerate() {
            if !r.is_finite() || r < 0.0 {
                return Err(err(
                    &format!("channels.rate_table_kbps[{i}]"),
                    "must be nonnegative and finite",
                ));
            }
            if r > ch.max_rate_kbps {
                return Err(err(
                    &format!("channels.rate_table_kbps[{i}]"),
                    "must not exceed channels.max_rate_kbps",
                ));
            }
        }
        if !ch.sigma.is_finite() || ch.sigma < 0.0 {
            return Err(err("channels.sigma", "must be nonnegative and finite"));
        }
        self.timing
            .validate()
            .map_err(|e| err("timing", e.to_string()))?;
        let run = &self.run;
        if run.horizon == 0 {
            return Err(err("run.horizon", "must be at least 1"));
        }
        if run.seeds.is_empty() {
            return Err(err("run.seeds", "must list at least one seed"));
        }
        if run.record_every == 0 {
            return Err(err("run.record_every", "must be at least 1"));
        }
        if self.convergence.seeds.is_empty() {
            return Err(err("convergence.seeds", "must list at least one seed"));
        }
        if !(self.convergence.target_avg_degree > 0.0) {
            return Err(err("convergence.target_avg_degree", "must be positive"));
        }
        let per = &self.periodic;
        if per.n == 0 || per.m == 0 {
            return Err(err("periodic.n", "network size must be at least 1x1"));
        }
        if !(per.target_avg_degree > 0.0) {
            return Err(err("periodic.target_avg_degree", "must be positive"));
        }
        if per.periods.is_empty() {
            return Err(err("periodic.periods", "must list at least one period"));
        }
        if per.periods.iter().any(|&y| y == 0) {
            return Err(err("periodic.periods", "periods must be at least 1"));
        }
        if per.updates == 0 {
            return Err(err("periodic.updates", "must be at least 1"));
        }
        if per.seeds.is_empty() {
            return Err(err("periodic.seeds", "must list at least one seed"));
        }
        let bench = &self.mwis_bench;
        if bench.instances == 0 {
            return Err(err("mwis_bench.instances", "must be at least 1"));
        }
        if bench.max_nodes < 2 {
            return Err(err("mwis_bench.max_nodes", "must be at least 2"));
        }
        if bench.max_channels == 0 {
            return Err(err("mwis_bench.max_channels", "must be at least 1"));
        }
        if bench.epsilons.is_empty() {
            return Err(err("mwis_bench.epsilons", "must list at least one epsilon"));
        }
        if bench.epsilons.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(err("mwis_bench.epsilons", "must be positive and finite"));
        }
        if !(bench.target_avg_degree > 0.0) {
            return Err(err("mwis_bench.target_avg_degree", "must be positive"));
        }
        Ok(())
    }
}
