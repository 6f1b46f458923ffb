//! Baseline agents used to measure pass rates before and after a novelty.
//!
//! Agents only act through `reset`/`step`. Each gets a fixed number of
//! attempts (episodes) per level; the level counts as passed if any attempt
//! ends with reward 1.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::levels::LevelSet;
use super::HarnessError;
use crate::novelty::{apply_novelty, NoveltySpec};
use crate::sampling::{enumerate_world, DEFAULT_ENUMERATION_BUDGET};
use crate::seed;
use crate::worlds::World;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentKind {
    /// Uniform random actions on every attempt.
    Random,
    /// Learns the `memory` shortest solutions of the pre-novel level, replays
    /// them on the post-novel level, then acts at random.
    ReplayAdapt { memory: usize },
    /// Breadth-first search of the post-novel level expanding at most `nodes`
    /// states; plays the plan it found, then acts at random.
    ReplanBudget { nodes: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgentSpec {
    #[serde(flatten)]
    pub kind: AgentKind,
    pub attempts: u32,
}

pub const DEFAULT_ATTEMPTS: u32 = 10;
pub const DEFAULT_REPLAY_MEMORY: usize = 5;
pub const DEFAULT_SEARCH_NODES: usize = 256;

impl AgentSpec {
    pub fn random() -> Self {
        Self { kind: AgentKind::Random, attempts: DEFAULT_ATTEMPTS }
    }

    pub fn replay_adapt() -> Self {
        Self { kind: AgentKind::ReplayAdapt { memory: DEFAULT_REPLAY_MEMORY }, attempts: DEFAULT_ATTEMPTS }
    }

    pub fn replan_budget() -> Self {
        Self { kind: AgentKind::ReplanBudget { nodes: DEFAULT_SEARCH_NODES }, attempts: DEFAULT_ATTEMPTS }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            AgentKind::Random => "random",
            AgentKind::ReplayAdapt { .. } => "replay_adapt",
            AgentKind::ReplanBudget { .. } => "replan_budget",
        }
    }
}

impl fmt::Display for AgentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Self::random()),
            "replay_adapt" => Ok(Self::replay_adapt()),
            "replan_budget" => Ok(Self::replan_budget()),
            other => Err(format!("unknown agent `{other}` (expected random, replay_adapt or replan_budget)")),
        }
    }
}

/// Plays `plan`, then uniform random actions, until the episode ends.
fn play(world: &World, plan: &[usize], rng: &mut impl Rng) -> bool {
    let mut state = world.reset();
    let n = world.actions().len();
    for step in 0.. {
        let index = plan.get(step).copied().unwrap_or_else(|| rng.gen_range(0..n));
        let t = world.step_index(&mut state, index).expect("valid action in a running episode");
        if t.terminal {
            return t.reward == 1;
        }
    }
    unreachable!("episodes end within the horizon")
}

/// Shortest solutions of `world`, in canonical order, as action indices.
fn replay_memory(world: &World, memory: usize) -> Result<Vec<Vec<usize>>, HarnessError> {
    let space = enumerate_world(world, DEFAULT_ENUMERATION_BUDGET)?;
    space
        .iter()
        .take(memory)
        .map(|s| s.actions().iter().map(|a| world.action_index(a).map_err(HarnessError::from)).collect())
        .collect()
}

/// Breadth-first plan search with at most `nodes` expansions. States with an
/// already-seen body are skipped; the first visit always has the fewest steps.
fn plan_search(world: &World, nodes: usize) -> Option<Vec<usize>> {
    let start = world.reset();
    let mut seen = HashSet::from([start.body().clone()]);
    let mut queue = VecDeque::from([(start, Vec::new())]);
    let mut expanded = 0;
    while let Some((state, path)) = queue.pop_front() {
        if expanded == nodes {
            return None;
        }
        expanded += 1;
        for index in 0..world.actions().len() {
            let mut next = state.clone();
            let t = world.step_index(&mut next, index).expect("non-terminal state");
            let mut p = path.clone();
            p.push(index);
            if t.terminal {
                if t.reward == 1 {
                    return Some(p);
                }
            } else if seen.insert(next.body().clone()) {
                queue.push_back((next, p));
            }
        }
    }
    None
}

/// Whether `agent` passes one level. `pre` is what the agent trained on,
/// `post` is what it is tested on.
pub fn attempt_level(agent: &AgentSpec, pre: &World, post: &World, level_seed: u64) -> Result<bool, HarnessError> {
    let plans = match agent.kind {
        AgentKind::Random => Vec::new(),
        AgentKind::ReplayAdapt { memory } => replay_memory(pre, memory)?,
        AgentKind::ReplanBudget { nodes } => plan_search(post, nodes).into_iter().collect(),
    };
    for attempt in 0..agent.attempts {
        let plan = plans.get(attempt as usize).map(Vec::as_slice).unwrap_or(&[]);
        let mut rng = seed::rng_for(level_seed, &[u64::from(attempt)]);
        if play(post, plan, &mut rng) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Per-level pass/fail of `agent` on `levels`, with `nov` applied when given.
pub fn evaluate_levels(
    agent: &AgentSpec,
    levels: &LevelSet,
    nov: Option<&NoveltySpec>,
    seed: u64,
) -> Result<Vec<bool>, HarnessError> {
    levels
        .levels
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            let pre = World::new(spec.clone())?;
            let post = match nov {
                Some(n) => World::new(apply_novelty(spec, n)?)?,
                None => pre.clone(),
            };
            attempt_level(agent, &pre, &post, seed::derive_seed(seed, &[i as u64]))
        })
        .collect()
}

/// Fraction of levels passed.
pub fn evaluate_agent(
    agent: &AgentSpec,
    levels: &LevelSet,
    nov: Option<&NoveltySpec>,
    seed: u64,
) -> Result<f64, HarnessError> {
    let passed = evaluate_levels(agent, levels, nov, seed)?;
    if passed.is_empty() {
        return Err(HarnessError::InvalidConfig("no levels to evaluate".into()));
    }
    Ok(passed.iter().filter(|&&p| p).count() as f64 / passed.len() as f64)
}
