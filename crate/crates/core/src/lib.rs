//! Distributed channel access for multi-hop cognitive radio networks.
//!
//! The crate models a network of secondary users as a unit-disk conflict
//! graph, lifts it to an extended conflict graph with one vertex per
//! (node, channel) pair, and selects per-round transmission strategies as
//! maximum weighted independent sets of that graph. Channel qualities are
//! unknown and learned online by a combinatorial bandit policy; strategy
//! decisions can be made by an exact solver, a centralized robust PTAS, or
//! a simulated distributed leader-election protocol with message and
//! mini-timeslot accounting.
//!
//! Modules:
//! - [`graph`]: conflict graph, extended conflict graph, neighborhoods,
//!   random network generation, text import/export.
//! - [`channels`]: i.i.d. Gaussian data-rate processes per (node, channel).
//! - [`mwis`]: exact branch-and-bound MWIS, local MWIS, robust PTAS.
//! - [`learning`]: bandit state, index policies (proposed and LLR baseline).
//! - [`protocol`]: the distributed strategy-decision protocol simulator.
//! - [`metrics`]: regret, timing model, periodic throughput statistics.
//! - [`config`], [`simulate`], [`suites`]: experiment configuration,
//!   the round engine, and the four experiment suites.

pub mod channels;
pub mod config;
pub mod graph;
pub mod learning;
pub mod metrics;
pub mod mwis;
pub mod protocol;
pub mod simulate;
pub mod suites;

pub use channels::{ChannelModel, ChannelSampler};
pub use config::ExperimentConfig;
pub use graph::{ChannelId, ConflictGraph, ExtendedGraph, Neighborhood, NodeId, Strategy, VertexId};
pub use learning::{IndexVector, PolicyState};
pub use metrics::TimingModel;
pub use mwis::{MwisResult, MwisSolver, WeightMap};
pub use protocol::{ProtocolConfig, ProtocolCosts, ProtocolRuntime, VertexStatus};
