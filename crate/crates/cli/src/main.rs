//! Command-line runner for the channel access experiment suites.

use chanaccess_core::config::ExperimentConfig;
use chanaccess_core::suites::{
    run_convergence_suite, run_mwis_bench, run_periodic_suite, run_regret_suite, SuiteFiles,
};
use clap::{Parser, Subcommand};
use std::path::PathBuf;

/// Environment variable holding the default output directory.
const OUT_DIR_ENV: &str = "CHANACCESS_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "chanaccess",
    version,
    about = "Seeded experiment suites for learned channel access in multi-hop networks",
    after_help = "Output directory precedence: --out, then $CHANACCESS_OUT_DIR, then the \
                  config's output.directory. An empty config file reproduces the built-in \
                  experiment setup."
)]
struct Cli {
    /// Path to a JSON experiment config (defaults apply field-by-field).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Offset added to every seed in the config.
    #[arg(long, global = true, default_value_t = 0)]
    seed_offset: u64,

    /// Output directory for CSV and metadata files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summed Winner weight per mini-round across the configured n x m cases.
    Convergence,
    /// Regret curves for the proposed policy and the LLR baseline.
    Regret,
    /// Estimated vs actual average throughput under periodic weight updates.
    Periodic,
    /// Exact oracle vs centralized PTAS vs distributed decisions.
    MwisBench,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(message) => {
            // single machine-readable error line
            eprintln!("{}", serde_json::json!({ "error": message }));
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("config {}: {e}", path.display()))?;
            ExperimentConfig::from_json(&text).map_err(|e| e.to_string())?
        }
        None => ExperimentConfig::default(),
    };
    cfg.offset_seeds(cli.seed_offset);

    let out_dir = cli
        .out
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(&cfg.output.directory));

    let files: SuiteFiles = match cli.command {
        Command::Convergence => run_convergence_suite(&cfg),
        Command::Regret => run_regret_suite(&cfg),
        Command::Periodic => run_periodic_suite(&cfg),
        Command::MwisBench => run_mwis_bench(&cfg),
    }
    .map_err(|e| e.to_string())?;

    files
        .write_to(&out_dir)
        .map_err(|e| format!("writing to {}: {e}", out_dir.display()))
}
