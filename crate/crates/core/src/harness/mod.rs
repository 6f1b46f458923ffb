//! End-to-end evaluation: predict each novelty's difficulty from sampled
//! solution spaces, measure how baseline agents' pass rates change under
//! it, and check that the two agree.

mod agents;
mod levels;
mod report;
mod stats;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use agents::{
    attempt_level, evaluate_agent, evaluate_levels, AgentKind, AgentSpec, DEFAULT_ATTEMPTS, DEFAULT_REPLAY_MEMORY,
    DEFAULT_SEARCH_NODES,
};
pub use levels::{generate_levels, generate_levels_with_retries, LevelSet, LevelTemplate, DEFAULT_MAX_RETRIES};
pub use report::{AgentPass, ClassAggregate, EvalReport, NoveltyRow, RowStatus};
pub use stats::{average_ranks, spearman_rho, StatsError};

use crate::metric::{self, MetricError, NormalizationMode};
use crate::novelty::{apply_novelty, NoveltyError, NoveltySpec, NoveltySuite};
use crate::sampling::{sample_solutions, SamplingConfig, SamplingError};
use crate::seed;
use crate::worlds::WorldError;
use crate::{DifficultyThresholds, SolutionSpace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("invalid harness config: {0}")]
    InvalidConfig(String),
    #[error("could not generate a solvable level {index} in {attempts} attempts")]
    GenerationFailed { index: usize, attempts: u32 },
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Novelty(#[from] NoveltyError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Everything besides the suite, levels and agents that a run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSettings {
    pub seed: u64,
    pub num_agents: u32,
    pub episodes_per_agent: u32,
    pub mode: NormalizationMode,
    pub thresholds: DifficultyThresholds,
}

impl ExperimentSettings {
    pub fn new(seed: u64) -> Self {
        let d = SamplingConfig::default();
        Self {
            seed,
            num_agents: d.num_agents,
            episodes_per_agent: d.episodes_per_agent,
            mode: NormalizationMode::default(),
            thresholds: DifficultyThresholds::default(),
        }
    }

    /// Sampling config for estimation level `index`. Pre- and post-novel
    /// worlds of one level share it.
    pub fn sampling_for_level(&self, index: usize) -> SamplingConfig {
        SamplingConfig {
            num_agents: self.num_agents,
            episodes_per_agent: self.episodes_per_agent,
            master_seed: seed::derive_seed(self.seed, &[seed::label("sampling"), index as u64]),
        }
    }

    pub fn agent_seed(&self, agent_index: usize) -> u64 {
        seed::derive_seed(self.seed, &[seed::label("agents"), agent_index as u64])
    }

    pub fn levels_seed(&self) -> u64 {
        seed::derive_seed(self.seed, &[seed::label("levels")])
    }

    pub fn evaluation_levels_seed(&self) -> u64 {
        seed::derive_seed(self.seed, &[seed::label("evaluation-levels")])
    }
}

/// Runs the full protocol.
///
/// Difficulty is estimated on `levels`; agent pass rates are measured on
/// `eval_levels`. A novelty that cannot be applied, or whose level pairs all
/// come out empty, yields an inconclusive row instead of an error.
pub fn run_experiment(
    suite: &NoveltySuite,
    agents: &[AgentSpec],
    levels: &LevelSet,
    eval_levels: &LevelSet,
    settings: &ExperimentSettings,
) -> Result<EvalReport, HarnessError> {
    suite.validate()?;
    if agents.is_empty() {
        return Err(HarnessError::InvalidConfig("at least one agent is required".into()));
    }
    if levels.is_empty() || eval_levels.is_empty() {
        return Err(HarnessError::InvalidConfig("level sets must be nonempty".into()));
    }

    let pre_spaces: Vec<SolutionSpace> = levels
        .levels
        .par_iter()
        .enumerate()
        .map(|(i, spec)| sample_solutions(spec, &settings.sampling_for_level(i)))
        .collect::<Result<_, _>>()?;
    let pre_pass: Vec<f64> = agents
        .iter()
        .enumerate()
        .map(|(j, a)| evaluate_agent(a, eval_levels, None, settings.agent_seed(j)))
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(suite.novelties.len());
    for nov in &suite.novelties {
        let row = novelty_row(nov, agents, levels, eval_levels, &pre_spaces, &pre_pass, settings)
            .unwrap_or_else(|e| NoveltyRow::inconclusive(&nov.id, levels.len(), e.to_string()));
        rows.push(row);
    }
    Ok(EvalReport::from_rows(rows, settings.clone(), agents.to_vec(), levels.seed, eval_levels.seed))
}

fn novelty_row(
    nov: &NoveltySpec,
    agents: &[AgentSpec],
    levels: &LevelSet,
    eval_levels: &LevelSet,
    pre_spaces: &[SolutionSpace],
    pre_pass: &[f64],
    settings: &ExperimentSettings,
) -> Result<NoveltyRow, HarnessError> {
    let distances: Vec<Option<f64>> = levels
        .levels
        .par_iter()
        .zip(pre_spaces)
        .enumerate()
        .map(|(i, (spec, pre_space))| {
            let post = apply_novelty(spec, nov)?;
            let post_space = sample_solutions(&post, &settings.sampling_for_level(i))?;
            match metric::space_distance(pre_space, &post_space, settings.mode) {
                Ok(r) => Ok(Some(r.distance)),
                Err(MetricError::EmptySolutionSpaces) => Ok(None),
                Err(e) => Err(HarnessError::from(e)),
            }
        })
        .collect::<Result<_, HarnessError>>()?;

    let conclusive: Vec<f64> = distances.iter().flatten().copied().collect();
    if conclusive.is_empty() {
        return Ok(NoveltyRow::inconclusive(
            &nov.id,
            levels.len(),
            "every sampled level pair had two empty solution spaces".into(),
        ));
    }
    let mean_distance = conclusive.iter().sum::<f64>() / conclusive.len() as f64;
    let class = metric::classify_difficulty(mean_distance, &settings.thresholds)?;

    let mut per_agent = Vec::with_capacity(agents.len());
    for (j, agent) in agents.iter().enumerate() {
        let post = evaluate_agent(agent, eval_levels, Some(nov), settings.agent_seed(j))?;
        per_agent.push(AgentPass { agent: agent.name().to_string(), pre_pass: pre_pass[j], post_pass: post });
    }
    Ok(NoveltyRow::conclusive(&nov.id, mean_distance, class, levels.len(), conclusive.len(), per_agent))
}
