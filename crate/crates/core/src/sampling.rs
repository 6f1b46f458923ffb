//! Building solution spaces: exhaustively, or from random rollouts.
//!
//! Sampling gives every (agent, episode) pair its own random stream derived
//! from the master seed. Pre- and post-novel worlds sampled with the same
//! seed therefore try the same action sequences, which keeps the two
//! approximations aligned.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{self, MetricError, NormalizationMode};
use crate::novelty::{apply_novelty, NoveltyError, NoveltySpec};
use crate::seed;
use crate::worlds::{World, WorldError, WorldSpec, WorldState};
use crate::{DifficultyReport, DifficultyThresholds, Solution, SolutionSpace};

/// Default cap on `|actions|^horizon` for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Novelty(#[from] NoveltyError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("enumeration needs {required} sequences but the budget is {budget}")]
    EnumerationBudgetExceeded { required: String, budget: u64 },
    #[error("invalid sampling config: {0}")]
    InvalidConfig(String),
}

impl SamplingError {
    /// Both spaces came out empty, so no distance exists.
    pub fn is_inconclusive(&self) -> bool {
        matches!(self, SamplingError::Metric(MetricError::EmptySolutionSpaces))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub num_agents: u32,
    pub episodes_per_agent: u32,
    pub master_seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { num_agents: 50, episodes_per_agent: 100, master_seed: 0 }
    }
}

impl SamplingConfig {
    pub fn with_seed(master_seed: u64) -> Self {
        Self { master_seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        if self.num_agents == 0 || self.episodes_per_agent == 0 {
            return Err(SamplingError::InvalidConfig("agents and episodes must both be at least 1".into()));
        }
        Ok(())
    }

    pub fn agent_seed(&self, agent: u32) -> u64 {
        seed::derive_seed(self.master_seed, &[u64::from(agent)])
    }
}

/// Action choice for rollouts. Exploration strategies other than uniform
/// random plug in here.
pub trait RolloutPolicy: Sync {
    fn choose(&self, rng: &mut ChaCha8Rng, state: &WorldState, num_actions: usize) -> usize;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct UniformPolicy;

impl RolloutPolicy for UniformPolicy {
    fn choose(&self, rng: &mut ChaCha8Rng, _state: &WorldState, num_actions: usize) -> usize {
        rng.gen_range(0..num_actions)
    }
}

/// Every solution of `spec`, found by depth-first search over the action tree.
pub fn enumerate_solutions(spec: &WorldSpec) -> Result<SolutionSpace, SamplingError> {
    enumerate_world(&World::new(spec.clone())?, DEFAULT_ENUMERATION_BUDGET)
}

pub fn enumerate_solutions_with_budget(spec: &WorldSpec, budget: u64) -> Result<SolutionSpace, SamplingError> {
    enumerate_world(&World::new(spec.clone())?, budget)
}

pub fn enumerate_world(world: &World, budget: u64) -> Result<SolutionSpace, SamplingError> {
    let n = world.actions().len() as u64;
    match n.checked_pow(world.horizon()) {
        Some(required) if required <= budget => {}
        required => {
            return Err(SamplingError::EnumerationBudgetExceeded {
                required: required.map_or_else(|| format!("{n}^{}", world.horizon()), |r| r.to_string()),
                budget,
            })
        }
    }
    let mut found = Vec::new();
    let mut prefix = Vec::with_capacity(world.horizon() as usize);
    dfs(world, &world.reset(), &mut prefix, &mut found)?;
    Ok(metric::partition_space(found, world.metric())?)
}

fn dfs(
    world: &World,
    state: &WorldState,
    prefix: &mut Vec<usize>,
    found: &mut Vec<Solution>,
) -> Result<(), WorldError> {
    for index in 0..world.actions().len() {
        let mut next = state.clone();
        let t = world.step_index(&mut next, index)?;
        prefix.push(index);
        if t.terminal {
            if t.reward == 1 {
                found.push(to_solution(world, prefix));
            }
        } else {
            dfs(world, &next, prefix, found)?;
        }
        prefix.pop();
    }
    Ok(())
}

fn to_solution(world: &World, indices: &[usize]) -> Solution {
    Solution::new(indices.iter().map(|&i| world.actions()[i].clone()).collect())
        .expect("nonempty sequence from one action set")
}

/// Random-rollout approximation of the solution space with uniform agents.
pub fn sample_solutions(spec: &WorldSpec, cfg: &SamplingConfig) -> Result<SolutionSpace, SamplingError> {
    sample_world(&World::new(spec.clone())?, cfg, &UniformPolicy)
}

/// Runs one episode from reset; returns the action indices if it earned reward 1.
pub fn rollout(world: &World, policy: &dyn RolloutPolicy, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    let mut state = world.reset();
    let mut taken = Vec::with_capacity(world.horizon() as usize);
    loop {
        let index = policy.choose(rng, &state, world.actions().len());
        let t = world.step_index(&mut state, index).expect("policy picks a valid action before the episode ends");
        taken.push(index);
        if t.terminal {
            return (t.reward == 1).then_some(taken);
        }
    }
}

/// Samples with an arbitrary policy. Agents run on the current rayon pool;
/// their findings are merged in (agent, episode) order.
pub fn sample_world(
    world: &World,
    cfg: &SamplingConfig,
    policy: &dyn RolloutPolicy,
) -> Result<SolutionSpace, SamplingError> {
    cfg.validate()?;
    let per_agent: Vec<Vec<Solution>> = (0..cfg.num_agents)
        .into_par_iter()
        .map(|agent| {
            let agent_seed = cfg.agent_seed(agent);
            (0..cfg.episodes_per_agent)
                .filter_map(|episode| {
                    let mut rng = seed::rng_for(agent_seed, &[u64::from(episode)]);
                    rollout(world, policy, &mut rng).map(|idx| to_solution(world, &idx))
                })
                .collect()
        })
        .collect();
    Ok(metric::partition_space(per_agent.into_iter().flatten(), world.metric())?)
}

/// A classified difficulty estimate with what is needed to reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifficultyEstimate {
    pub novelty_id: String,
    pub report: DifficultyReport,
    /// `None` when both spaces were enumerated exactly.
    pub sampling: Option<SamplingConfig>,
    pub pre_spec_hash: String,
    pub post_spec_hash: String,
}

/// Distance between two spaces, classified.
pub fn compare_spaces(
    pre: &SolutionSpace,
    post: &SolutionSpace,
    mode: NormalizationMode,
    thresholds: &DifficultyThresholds,
) -> Result<DifficultyReport, MetricError> {
    metric::space_distance(pre, post, mode)?.classify(thresholds)
}

/// Applies `nov`, samples both worlds with the same seeds, and classifies the distance.
pub fn estimate_difficulty(
    pre: &WorldSpec,
    nov: &NoveltySpec,
    cfg: &SamplingConfig,
    mode: NormalizationMode,
    thresholds: &DifficultyThresholds,
) -> Result<DifficultyEstimate, SamplingError> {
    let post = apply_novelty(pre, nov)?;
    let pa = sample_solutions(pre, cfg)?;
    let pb = sample_solutions(&post, cfg)?;
    Ok(DifficultyEstimate {
        novelty_id: nov.id.clone(),
        report: compare_spaces(&pa, &pb, mode, thresholds)?,
        sampling: Some(*cfg),
        pre_spec_hash: pre.content_hash(),
        post_spec_hash: post.content_hash(),
    })
}

/// Same as [`estimate_difficulty`] with both spaces enumerated exactly.
pub fn exact_difficulty(
    pre: &WorldSpec,
    nov: &NoveltySpec,
    budget: u64,
    mode: NormalizationMode,
    thresholds: &DifficultyThresholds,
) -> Result<DifficultyEstimate, SamplingError> {
    let post = apply_novelty(pre, nov)?;
    let pa = enumerate_solutions_with_budget(pre, budget)?;
    let pb = enumerate_solutions_with_budget(&post, budget)?;
    Ok(DifficultyEstimate {
        novelty_id: nov.id.clone(),
        report: compare_spaces(&pa, &pb, mode, thresholds)?,
        sampling: None,
        pre_spec_hash: pre.content_hash(),
        post_spec_hash: post.content_hash(),
    })
}
