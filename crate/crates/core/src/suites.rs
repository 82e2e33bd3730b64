//! The four experiment suites and their CSV/metadata emission.
//!
//! Every suite is deterministic for a fixed config: per-seed work runs in
//! parallel, results are collected and sorted by job order before
//! serialization, and floats are written with Rust's shortest round-trip
//! formatting, so two runs with the same config produce byte-identical
//! files. Throughput and regret columns are reported de-normalized in
//! kbps; solver-internal weights stay in normalized units.

use crate::channels::{ChannelError, ChannelModel};
use crate::config::{ConfigError, ExperimentConfig, PolicyChoice, SolverChoice};
use crate::graph::{generate_random_network, ExtendedGraph, GraphError, Strategy};
use crate::metrics::{oracle_optimum, periodic_throughput, MetricsError, RegretTracker, TimingModel};
use crate::mwis::{exact_mwis, robust_ptas, MwisError, WeightMap, DEFAULT_EXACT_GUARD};
use crate::protocol::{run_round, ProtocolConfig, ProtocolError, ProtocolRuntime};
use crate::simulate::{simulate, PolicyKind, RunSpec, SimulateError, SolverSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("config validation failed: {0}")]
    Config(#[from] ConfigError),
    #[error(
        "instance has {vertices} vertices, beyond the exact oracle guard of {limit}; \
         the regret suite needs a brute-force optimum"
    )]
    OracleGuard { vertices: usize, limit: usize },
    #[error("approximation ratio violated on instance {instance}: {detail}")]
    RatioViolation { instance: usize, detail: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Mwis(#[from] MwisError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Simulate(#[from] SimulateError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// In-memory suite output: `(file name, contents)` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteFiles {
    pub files: Vec<(String, String)>,
}

impl SuiteFiles {
    pub fn write_to(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, contents) in &self.files {
            let path = dir.join(name);
            let mut f = std::fs::File::create(&path)?;
            f.write_all(contents.as_bytes())?;
            written.push(path);
        }
        Ok(written)
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_str())
    }
}

/// Independent sub-seeds for the network, the channel-type assignment,
/// the channel noise streams, and synthetic vertex weights, all derived
/// from one experiment seed.
pub struct SubSeeds {
    pub network: u64,
    pub assignment: u64,
    pub channel: u64,
    pub weights: u64,
}

/// The seeding scheme shared by all suites.
pub fn derive_seeds(seed: u64) -> SubSeeds {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SubSeeds {
        network: rng.gen(),
        assignment: rng.gen(),
        channel: rng.gen(),
        weights: rng.gen(),
    }
}

fn random_weights(num_vertices: usize, seed: u64) -> WeightMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    WeightMap::new(
        (0..num_vertices)
            .map(|_| rng.gen_range(0.01..1.0))
            .collect(),
    )
    .expect("weights in range")
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn f(v: f64) -> String {
    format!("{v}")
}

fn solver_spec(cfg: &ExperimentConfig) -> SolverSpec {
    match cfg.run.solver {
        SolverChoice::Exact => SolverSpec::Exact {
            max_vertices: DEFAULT_EXACT_GUARD,
        },
        SolverChoice::CentralizedPtas => SolverSpec::CentralizedPtas {
            epsilon: cfg.protocol.epsilon,
        },
        SolverChoice::Distributed => SolverSpec::Distributed(cfg.protocol.to_protocol_config()),
    }
}

fn policies(cfg: &ExperimentConfig) -> Vec<PolicyKind> {
    match cfg.run.policy {
        PolicyChoice::Proposed => vec![PolicyKind::Proposed],
        PolicyChoice::Llr => vec![PolicyKind::Llr],
        PolicyChoice::Both => vec![PolicyKind::Proposed, PolicyKind::Llr],
    }
}

fn build_network_model(
    n: usize,
    m: usize,
    degree: f64,
    require_connected: bool,
    channels: &crate::config::ChannelSection,
    sub: &SubSeeds,
) -> Result<(ExtendedGraph, ChannelModel), SuiteError> {
    let g = generate_random_network(n, m, degree, sub.network, require_connected)?;
    let h = ExtendedGraph::from_conflict_graph(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(sub.assignment);
    let model = ChannelModel::with_random_assignment(
        n,
        m,
        channels.rate_table_kbps.clone(),
        channels.sigma,
        channels.max_rate_kbps,
        &mut rng,
    )?;
    Ok((h, model))
}

// ---------------------------------------------------------------------
// Convergence suite
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct ConvergenceMeta {
    cases: Vec<[usize; 2]>,
    seeds: Vec<u64>,
    r: usize,
    epsilon: f64,
    target_avg_degree: f64,
    require_connected: bool,
    note: &'static str,
}

/// The convergence suite's instance for one `[n, m]` case and seed: a
/// fresh random network with synthetic positive weights.
pub fn convergence_instance(
    cfg: &ExperimentConfig,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<(ExtendedGraph, WeightMap), SuiteError> {
    let conv = &cfg.convergence;
    let sub = derive_seeds(seed);
    let g = generate_random_network(
        n,
        m,
        conv.target_avg_degree,
        sub.network,
        conv.require_connected,
    )?;
    let h = ExtendedGraph::from_conflict_graph(&g);
    let weights = random_weights(h.num_vertices(), sub.weights);
    Ok((h, weights))
}

/// For each `[n, m]` case and seed, runs one full decision phase with a
/// mini-round budget of `D = n` on a fresh random network with synthetic
/// positive weights, recording the cumulative Winner weight after every
/// mini-round.
pub fn run_convergence_suite(cfg: &ExperimentConfig) -> Result<SuiteFiles, SuiteError> {
    cfg.validate()?;
    let conv = &cfg.convergence;
    let jobs: Vec<(usize, [usize; 2], u64)> = cfg
        .network
        .cases
        .iter()
        .enumerate()
        .flat_map(|(i, &case)| conv.seeds.iter().map(move |&s| (i, case, s)))
        .collect();
    let mut results: Vec<(usize, u64, Vec<Vec<String>>)> = jobs
        .par_iter()
        .map(|&(case_idx, [n, m], seed)| -> Result<_, SuiteError> {
            let (h, weights) = convergence_instance(cfg, n, m, seed)?;
            let rt = ProtocolRuntime::new(
                &h,
                ProtocolConfig {
                    r: cfg.protocol.r,
                    mini_rounds: n,
                    epsilon: cfg.protocol.epsilon,
                },
            )?;
            let (outcome, _) = run_round(&rt, &h, &Strategy::empty(), &weights)?;
            let rows = outcome
                .weight_per_mini_round
                .iter()
                .enumerate()
                .map(|(i, &w)| {
                    vec![
                        n.to_string(),
                        m.to_string(),
                        seed.to_string(),
                        (i + 1).to_string(),
                        f(w),
                    ]
                })
                .collect();
            Ok((case_idx, seed, rows))
        })
        .collect::<Result<_, _>>()?;
    results.sort_by_key(|&(case_idx, seed, _)| (case_idx, seed));
    let rows: Vec<Vec<String>> = results.into_iter().flat_map(|(_, _, r)| r).collect();
    let meta = ConvergenceMeta {
        cases: cfg.network.cases.clone(),
        seeds: conv.seeds.clone(),
        r: cfg.protocol.r,
        epsilon: cfg.protocol.epsilon,
        target_avg_degree: conv.target_avg_degree,
        require_connected: conv.require_connected,
        note: "mini-round budget per case is D = n; weights are synthetic uniform in (0.01, 1)",
    };
    Ok(SuiteFiles {
        files: vec![
            (
                "convergence.csv".into(),
                csv(
                    &["n", "m", "seed", "mini_round", "cum_winner_weight"],
                    &rows,
                ),
            ),
            (
                "convergence_meta.json".into(),
                serde_json::to_string_pretty(&meta).expect("meta serializes"),
            ),
        ],
    })
}

// ---------------------------------------------------------------------
// Regret suite
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct RegretMeta {
    beta: f64,
    theta: f64,
    horizon: u64,
    solver: String,
    policies: Vec<String>,
    seeds: Vec<u64>,
    r1_kbps_per_seed: Vec<f64>,
    max_rate_kbps: f64,
}

const REGRET_HEADER: [&str; 11] = [
    "seed",
    "round",
    "policy",
    "chosen_strategy_size",
    "observed_throughput",
    "effective_throughput",
    "cum_regret",
    "cum_beta_regret",
    "cum_practical_regret",
    "messages",
    "mini_rounds_used",
];

/// Runs both policies on identical seeds and channel streams over the
/// benchmark network, emitting per-round regret curves (kbps) and a
/// mean ± std summary across seeds.
pub fn run_regret_suite(cfg: &ExperimentConfig) -> Result<SuiteFiles, SuiteError> {
    cfg.validate()?;
    let n = cfg.network.n;
    let m = cfg.network.m;
    if n * m > DEFAULT_EXACT_GUARD {
        return Err(SuiteError::OracleGuard {
            vertices: n * m,
            limit: DEFAULT_EXACT_GUARD,
        });
    }
    let beta = cfg.protocol.to_protocol_config().rho();
    let theta = cfg.timing.theta();
    let kbps = cfg.channels.max_rate_kbps;
    let horizon = cfg.run.horizon;
    let record_every = cfg.run.record_every;
    let policy_list = policies(cfg);
    let solver = solver_spec(cfg);

    struct SeedResult {
        seed: u64,
        r1: f64,
        rows: Vec<Vec<String>>,
        // per policy: recorded (round, cum_regret, cum_beta, cum_practical, effective)
        recorded: Vec<Vec<(u64, f64, f64, f64, f64)>>,
    }

    let mut results: Vec<SeedResult> = cfg
        .run
        .seeds
        .par_iter()
        .map(|&seed| -> Result<SeedResult, SuiteError> {
            let sub = derive_seeds(seed);
            let (h, model) = build_network_model(
                n,
                m,
                cfg.network.target_avg_degree,
                cfg.network.require_connected,
                &cfg.channels,
                &sub,
            )?;
            let means = WeightMap::new(model.true_means()).expect("means are in [0,1]");
            let r1 = oracle_optimum(&h, &means)?;
            let mut rows = Vec::new();
            let mut recorded = Vec::new();
            for &policy in &policy_list {
                let trace = simulate(&RunSpec {
                    h: &h,
                    model: &model,
                    policy,
                    solver: &solver,
                    horizon_slots: horizon,
                    update_period: 1,
                    channel_seed: sub.channel,
                    llr_strategy_size: n,
                })?;
                let mut tracker = RegretTracker::new(r1, beta, theta)?;
                let mut points = Vec::new();
                for (slot, decision) in trace.slots.iter().zip(&trace.decisions) {
                    let p = tracker.step(slot.observed);
                    let round = slot.slot;
                    if round % record_every == 0 || round == horizon {
                        rows.push(vec![
                            seed.to_string(),
                            round.to_string(),
                            policy.name().to_string(),
                            slot.strategy_size.to_string(),
                            f(slot.observed * kbps),
                            f(theta * slot.observed * kbps),
                            f(p.cum_regret * kbps),
                            f(p.cum_beta_regret * kbps),
                            f(p.cum_practical_regret * kbps),
                            decision.max_messages.to_string(),
                            decision.mini_rounds_used.to_string(),
                        ]);
                        points.push((
                            round,
                            p.cum_regret * kbps,
                            p.cum_beta_regret * kbps,
                            p.cum_practical_regret * kbps,
                            theta * slot.observed * kbps,
                        ));
                    }
                }
                recorded.push(points);
            }
            Ok(SeedResult {
                seed,
                r1,
                rows,
                recorded,
            })
        })
        .collect::<Result<_, _>>()?;
    results.sort_by_key(|r| r.seed);

    let all_rows: Vec<Vec<String>> = results.iter().flat_map(|r| r.rows.clone()).collect();

    // summary: mean and sample std across seeds at each recorded round
    let mut summary_rows = Vec::new();
    for (pi, policy) in policy_list.iter().enumerate() {
        let per_seed: Vec<&Vec<(u64, f64, f64, f64, f64)>> =
            results.iter().map(|r| &r.recorded[pi]).collect();
        let points = per_seed[0].len();
        for i in 0..points {
            let round = per_seed[0][i].0;
            let stats = |pick: &dyn Fn(&(u64, f64, f64, f64, f64)) -> f64| {
                let values: Vec<f64> = per_seed.iter().map(|s| pick(&s[i])).collect();
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                let var = if values.len() > 1 {
                    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                        / (values.len() - 1) as f64
                } else {
                    0.0
                };
                (mean, var.sqrt())
            };
            let (mr, sr) = stats(&|p| p.1);
            let (mb, sb) = stats(&|p| p.2);
            let (mp, sp) = stats(&|p| p.3);
            let (me, _) = stats(&|p| p.4);
            summary_rows.push(vec![
                round.to_string(),
                policy.name().to_string(),
                f(mr),
                f(sr),
                f(mb),
                f(sb),
                f(mp),
                f(sp),
                f(me),
            ]);
        }
    }

    let meta = RegretMeta {
        beta,
        theta,
        horizon,
        solver: solver.name().to_string(),
        policies: policy_list.iter().map(|p| p.name().to_string()).collect(),
        seeds: results.iter().map(|r| r.seed).collect(),
        r1_kbps_per_seed: results.iter().map(|r| r.r1 * kbps).collect(),
        max_rate_kbps: kbps,
    };
    Ok(SuiteFiles {
        files: vec![
            ("regret.csv".into(), csv(&REGRET_HEADER, &all_rows)),
            (
                "regret_summary.csv".into(),
                csv(
                    &[
                        "round",
                        "policy",
                        "mean_cum_regret",
                        "std_cum_regret",
                        "mean_cum_beta_regret",
                        "std_cum_beta_regret",
                        "mean_cum_practical_regret",
                        "std_cum_practical_regret",
                        "mean_effective_throughput",
                    ],
                    &summary_rows,
                ),
            ),
            (
                "regret_meta.json".into(),
                serde_json::to_string_pretty(&meta).expect("meta serializes"),
            ),
        ],
    })
}

// ---------------------------------------------------------------------
// Periodic-update suite
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct PeriodicMeta {
    n: usize,
    m: usize,
    periods: Vec<usize>,
    updates: u64,
    seeds: Vec<u64>,
    solver: String,
    effective_fraction_per_period: Vec<f64>,
    dropped_slots: usize,
    max_rate_kbps: f64,
}

/// For each update period `y`, runs `updates` strategy decisions
/// (horizon `updates·y` slots) on the periodic-suite network and emits
/// the actual and estimated average-throughput series.
pub fn run_periodic_suite(cfg: &ExperimentConfig) -> Result<SuiteFiles, SuiteError> {
    cfg.validate()?;
    let per = &cfg.periodic;
    let kbps = cfg.channels.max_rate_kbps;
    let policy_list = policies(cfg);
    let solver = solver_spec(cfg);
    let num_policies = policy_list.len();
    let jobs: Vec<(usize, usize, u64, usize)> = per
        .periods
        .iter()
        .enumerate()
        .flat_map(|(yi, &y)| {
            per.seeds
                .iter()
                .flat_map(move |&s| (0..num_policies).map(move |pi| (yi, y, s, pi)))
        })
        .collect();
    let mut results: Vec<((usize, u64, usize), Vec<Vec<String>>)> = jobs
        .par_iter()
        .map(|&(yi, y, seed, pi)| -> Result<_, SuiteError> {
            let policy = policies(cfg)[pi];
            let sub = derive_seeds(seed);
            let (h, model) = build_network_model(
                per.n,
                per.m,
                per.target_avg_degree,
                per.require_connected,
                &cfg.channels,
                &sub,
            )?;
            let trace = simulate(&RunSpec {
                h: &h,
                model: &model,
                policy,
                solver: &solver,
                horizon_slots: per.updates * y as u64,
                update_period: y,
                channel_seed: sub.channel,
                llr_strategy_size: per.n,
            })?;
            let observed: Vec<f64> = trace.slots.iter().map(|s| s.observed).collect();
            let estimated: Vec<f64> =
                trace.decisions.iter().map(|d| d.estimated_weight).collect();
            let timing = TimingModel {
                y,
                ..cfg.timing
            };
            let series = periodic_throughput(&observed, &estimated, &timing)?;
            let rows = series
                .points
                .iter()
                .map(|p| {
                    vec![
                        y.to_string(),
                        seed.to_string(),
                        policy.name().to_string(),
                        p.period.to_string(),
                        f(p.actual * kbps),
                        f(p.estimated * kbps),
                        f(p.avg_actual * kbps),
                        f(p.avg_estimated * kbps),
                    ]
                })
                .collect();
            Ok(((yi, seed, pi), rows))
        })
        .collect::<Result<_, _>>()?;
    results.sort_by_key(|&(key, _)| key);
    let rows: Vec<Vec<String>> = results.into_iter().flat_map(|(_, r)| r).collect();
    let meta = PeriodicMeta {
        n: per.n,
        m: per.m,
        periods: per.periods.clone(),
        updates: per.updates,
        seeds: per.seeds.clone(),
        solver: solver.name().to_string(),
        effective_fraction_per_period: per
            .periods
            .iter()
            .map(|&y| cfg.timing.periodic_fraction(y))
            .collect(),
        dropped_slots: 0,
        max_rate_kbps: kbps,
    };
    Ok(SuiteFiles {
        files: vec![
            (
                "periodic.csv".into(),
                csv(
                    &[
                        "y",
                        "seed",
                        "policy",
                        "period",
                        "actual",
                        "estimated",
                        "avg_actual",
                        "avg_estimated",
                    ],
                    &rows,
                ),
            ),
            (
                "periodic_meta.json".into(),
                serde_json::to_string_pretty(&meta).expect("meta serializes"),
            ),
        ],
    })
}

// ---------------------------------------------------------------------
// MWIS bench
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct MwisBenchMeta {
    instances: usize,
    max_nodes: usize,
    max_channels: usize,
    epsilons: Vec<f64>,
    r: usize,
    base_seed: u64,
    note: &'static str,
}

/// Compares the exact oracle, the centralized PTAS, and the distributed
/// protocol (D = 1 and D = N) on seeded random instances, asserting the
/// ratio bounds per instance.
pub fn run_mwis_bench(cfg: &ExperimentConfig) -> Result<SuiteFiles, SuiteError> {
    cfg.validate()?;
    let bench = &cfg.mwis_bench;
    let mut rng = ChaCha8Rng::seed_from_u64(bench.base_seed);
    let mut rows = Vec::new();
    for instance in 0..bench.instances {
        let n = rng.gen_range(2..=bench.max_nodes);
        let m = rng.gen_range(1..=bench.max_channels);
        let net_seed: u64 = rng.gen();
        let g = generate_random_network(
            n,
            m,
            bench.target_avg_degree,
            net_seed,
            bench.require_connected,
        )?;
        let h = ExtendedGraph::from_conflict_graph(&g);
        let weights = WeightMap::new(
            (0..h.num_vertices())
                .map(|_| rng.gen_range(0.01..1.0))
                .collect(),
        )
        .expect("weights in range");
        let all: Vec<_> = h.vertices().collect();
        let exact = exact_mwis(&h, &all, &weights)?;
        let run_distributed = |d: usize| -> Result<f64, SuiteError> {
            let rt = ProtocolRuntime::new(
                &h,
                ProtocolConfig {
                    r: cfg.protocol.r,
                    mini_rounds: d,
                    epsilon: cfg.protocol.epsilon,
                },
            )?;
            let (outcome, _) = run_round(&rt, &h, &Strategy::empty(), &weights)?;
            Ok(weights.total(outcome.strategy.members()))
        };
        let dist_full = run_distributed(n)?;
        let dist_d1 = run_distributed(1)?;
        if dist_full < dist_d1 - 1e-12 {
            return Err(SuiteError::RatioViolation {
                instance,
                detail: format!("distributed weight shrank with budget: {dist_d1} -> {dist_full}"),
            });
        }
        for &eps in &bench.epsilons {
            let approx = robust_ptas(&h, &weights, eps)?;
            if approx.total_weight * (1.0 + eps) < exact.total_weight - 1e-9 {
                return Err(SuiteError::RatioViolation {
                    instance,
                    detail: format!(
                        "ptas weight {} below {}/{}",
                        approx.total_weight,
                        exact.total_weight,
                        1.0 + eps
                    ),
                });
            }
            if dist_full * (1.0 + eps) < exact.total_weight - 1e-9 {
                return Err(SuiteError::RatioViolation {
                    instance,
                    detail: format!(
                        "distributed weight {} below {}/{}",
                        dist_full,
                        exact.total_weight,
                        1.0 + eps
                    ),
                });
            }
            rows.push(vec![
                instance.to_string(),
                n.to_string(),
                m.to_string(),
                f(eps),
                f(exact.total_weight),
                f(approx.total_weight),
                f(dist_full),
                f(dist_d1),
                f(exact.total_weight / approx.total_weight),
                f(exact.total_weight / dist_full),
            ]);
        }
    }
    let meta = MwisBenchMeta {
        instances: bench.instances,
        max_nodes: bench.max_nodes,
        max_channels: bench.max_channels,
        epsilons: bench.epsilons.clone(),
        r: cfg.protocol.r,
        base_seed: bench.base_seed,
        note: "distributed runs use D = n (full) and D = 1 (truncated)",
    };
    Ok(SuiteFiles {
        files: vec![
            (
                "mwis_bench.csv".into(),
                csv(
                    &[
                        "instance",
                        "n",
                        "m",
                        "epsilon",
                        "w_exact",
                        "w_ptas",
                        "w_distributed_full",
                        "w_distributed_d1",
                        "ratio_ptas",
                        "ratio_distributed_full",
                    ],
                    &rows,
                ),
            ),
            (
                "mwis_bench_meta.json".into(),
                serde_json::to_string_pretty(&meta).expect("meta serializes"),
            ),
        ],
    })
}
