//! `ng`: batch front end for solution-space difficulty estimation.
//!
//! Exit status: 0 success, 1 output i/o failure, 2 usage, 3 invalid input,
//! 4 budget exceeded, 5 inconclusive (both solution spaces empty).

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ng_core::harness::AgentSpec;
use ng_core::sampling::DEFAULT_ENUMERATION_BUDGET;
use ng_core::NormalizationMode;
use serde::Serialize;

use error::CliError;

#[derive(Parser)]
#[command(name = "ng", version, about = "Estimate how hard a world change is to react to")]
struct Cli {
    /// Worker threads. Never changes what is written.
    #[arg(long, global = true, env = "NG_DEFAULT_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate every solution of a world up to its horizon.
    Enumerate(EnumerateArgs),
    /// Approximate a world's solution space with random rollouts.
    Sample(SampleArgs),
    /// Distance and difficulty class between two solution-space files.
    Distance(DistanceArgs),
    /// Apply a novelty to a world and estimate its difficulty directly.
    Estimate(EstimateArgs),
    /// Run a novelty suite over generated levels and baseline agents.
    Experiment(ExperimentArgs),
}

#[derive(Args, Serialize, Clone)]
pub struct ThresholdArgs {
    /// Largest distance still classed Easy.
    #[arg(long, default_value_t = 0.0)]
    pub easy_max: f64,
    /// Largest distance still classed Medium.
    #[arg(long, default_value_t = 0.3)]
    pub medium_max: f64,
    #[arg(long, default_value_t = NormalizationMode::Literal)]
    pub mode: NormalizationMode,
}

#[derive(Args, Serialize)]
pub struct EnumerateArgs {
    /// World spec (JSON).
    #[arg(long)]
    pub world: PathBuf,
    /// Solution-space file to write (JSON Lines).
    #[arg(long)]
    pub out: PathBuf,
    /// Refuse worlds with more than this many action sequences.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    pub budget: u64,
}

#[derive(Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub world: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Independent rollout agents.
    #[arg(long, default_value_t = 50)]
    pub agents: u32,
    /// Episodes per agent.
    #[arg(long, default_value_t = 100)]
    pub episodes: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Serialize)]
pub struct DistanceArgs {
    /// Pre-novel solution-space file.
    #[arg(long)]
    pub pre: PathBuf,
    /// Post-novel solution-space file.
    #[arg(long)]
    pub post: PathBuf,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    /// Print a CSV row instead of JSON.
    #[arg(long)]
    pub csv: bool,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct EstimateArgs {
    #[arg(long)]
    pub world: PathBuf,
    /// Novelty spec (JSON).
    #[arg(long)]
    pub novelty: PathBuf,
    /// Enumerate both worlds instead of sampling.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    pub budget: u64,
    #[arg(long, default_value_t = 50)]
    pub agents: u32,
    #[arg(long, default_value_t = 100)]
    pub episodes: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct ExperimentArgs {
    /// Novelty suite (JSON).
    #[arg(long)]
    pub suite: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Base levels to generate.
    #[arg(long, default_value_t = 100)]
    pub levels: usize,
    /// Level template (JSON). Defaults to the built-in template for the
    /// suite's world kind.
    #[arg(long)]
    pub template: Option<PathBuf>,
    /// Comma-separated evaluation agents: random, replay_adapt, replan_budget.
    #[arg(long, value_delimiter = ',', default_value = "replay_adapt")]
    pub agents: Vec<AgentSpec>,
    /// Attempts each agent gets per level.
    #[arg(long)]
    pub attempts: Option<u32>,
    /// Rollout agents used to sample each level's solution space.
    #[arg(long, default_value_t = 50)]
    pub sample_agents: u32,
    #[arg(long, default_value_t = 100)]
    pub episodes: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ng: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let jobs = cli.jobs;
    let go = move || match cli.command {
        Command::Enumerate(a) => commands::enumerate(&a, jobs),
        Command::Sample(a) => commands::sample(&a, jobs),
        Command::Distance(a) => commands::distance(&a, jobs),
        Command::Estimate(a) => commands::estimate(&a, jobs),
        Command::Experiment(a) => commands::experiment(&a, jobs),
    };
    match jobs {
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} workers: {e}")))?
            .install(go),
        None => go(),
    }
}
