//! Novelty transforms: functions from a pre-novel world spec to a post-novel one.
//!
//! No transform touches the action set or the action metric, so solutions
//! from the two worlds stay comparable action by action.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::worlds::{Block, Cell, WorldError, WorldKind, WorldParams, WorldSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoveltyError {
    #[error("novelty `{id}` ({novelty}) does not apply to {world:?} worlds")]
    KindMismatch { id: String, novelty: &'static str, world: WorldKind },
    #[error("novelty `{id}` is invalid: {reason}")]
    InvalidNovelty { id: String, reason: String },
    #[error("invalid novelty suite: {0}")]
    InvalidSuite(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoveltyKind {
    /// No change; applies to every world kind.
    Identity,
    /// Turns `cells` into walls (cells that already are walls stay walls).
    AddWall { cells: Vec<Cell> },
    /// Clears any walls among `cells`.
    RemoveWall { cells: Vec<Cell> },
    MoveGoal { to: Cell },
    /// Multiplies gravity by `factor`.
    GravityScale { factor: f64 },
    MoveTarget { index: usize, to: [f64; 2] },
    AddBlock { block: Block },
    RemoveBlock { index: usize },
    /// Scales the radius of target `index` (every target when absent) by `factor` in (0, 1].
    ShrinkTarget {
        #[serde(default)]
        index: Option<usize>,
        factor: f64,
    },
    /// Scales the radius of target `index` (every target when absent) by `factor` >= 1.
    GrowTarget {
        #[serde(default)]
        index: Option<usize>,
        factor: f64,
    },
}

impl NoveltyKind {
    pub fn name(&self) -> &'static str {
        match self {
            NoveltyKind::Identity => "identity",
            NoveltyKind::AddWall { .. } => "add_wall",
            NoveltyKind::RemoveWall { .. } => "remove_wall",
            NoveltyKind::MoveGoal { .. } => "move_goal",
            NoveltyKind::GravityScale { .. } => "gravity_scale",
            NoveltyKind::MoveTarget { .. } => "move_target",
            NoveltyKind::AddBlock { .. } => "add_block",
            NoveltyKind::RemoveBlock { .. } => "remove_block",
            NoveltyKind::ShrinkTarget { .. } => "shrink_target",
            NoveltyKind::GrowTarget { .. } => "grow_target",
        }
    }

    /// World kind this transform applies to; `None` for all kinds.
    pub fn world_kind(&self) -> Option<WorldKind> {
        match self {
            NoveltyKind::Identity => None,
            NoveltyKind::AddWall { .. } | NoveltyKind::RemoveWall { .. } | NoveltyKind::MoveGoal { .. } => {
                Some(WorldKind::Gridnav)
            }
            _ => Some(WorldKind::Slingshot),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoveltySpec {
    pub id: String,
    #[serde(flatten)]
    pub transform: NoveltyKind,
}

impl NoveltySpec {
    pub fn new(id: impl Into<String>, transform: NoveltyKind) -> Self {
        Self { id: id.into(), transform }
    }

    pub fn identity() -> Self {
        Self::new("identity", NoveltyKind::Identity)
    }
}

/// Ordered list of novelties with unique ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoveltySuite {
    pub novelties: Vec<NoveltySpec>,
}

impl NoveltySuite {
    pub fn new(novelties: Vec<NoveltySpec>) -> Result<Self, NoveltyError> {
        let suite = Self { novelties };
        suite.validate()?;
        Ok(suite)
    }

    pub fn from_json(s: &str) -> Result<Self, NoveltyError> {
        let suite: Self = serde_json::from_str(s).map_err(|e| NoveltyError::InvalidSuite(e.to_string()))?;
        suite.validate()?;
        Ok(suite)
    }

    pub fn validate(&self) -> Result<(), NoveltyError> {
        if self.novelties.is_empty() {
            return Err(NoveltyError::InvalidSuite("suite is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for n in &self.novelties {
            if !seen.insert(n.id.as_str()) {
                return Err(NoveltyError::InvalidSuite(format!("duplicate novelty id `{}`", n.id)));
            }
        }
        Ok(())
    }
}

/// Produces the post-novel world. `pre` is left untouched.
pub fn apply_novelty(pre: &WorldSpec, nov: &NoveltySpec) -> Result<WorldSpec, NoveltyError> {
    let bad = |reason: String| NoveltyError::InvalidNovelty { id: nov.id.clone(), reason };
    if let Some(kind) = nov.transform.world_kind() {
        if kind != pre.kind() {
            return Err(NoveltyError::KindMismatch {
                id: nov.id.clone(),
                novelty: nov.transform.name(),
                world: pre.kind(),
            });
        }
    }
    pre.validate().map_err(|e| bad(format!("pre-novel world: {e}")))?;

    let mut post = pre.clone();
    match (&nov.transform, &mut post.world) {
        (NoveltyKind::Identity, _) => {}
        (NoveltyKind::AddWall { cells }, WorldParams::Gridnav(g)) => {
            if cells.is_empty() {
                return Err(bad("no cells given".into()));
            }
            for &c in cells {
                if !g.in_bounds(c) {
                    return Err(bad(format!("cell {c:?} is outside the grid")));
                }
                if c == g.start || c == g.goal {
                    return Err(bad(format!("cell {c:?} holds the start or goal")));
                }
                g.walls.insert(c);
            }
        }
        (NoveltyKind::RemoveWall { cells }, WorldParams::Gridnav(g)) => {
            if cells.is_empty() {
                return Err(bad("no cells given".into()));
            }
            for c in cells {
                if !g.in_bounds(*c) {
                    return Err(bad(format!("cell {c:?} is outside the grid")));
                }
                g.walls.remove(c);
            }
        }
        (NoveltyKind::MoveGoal { to }, WorldParams::Gridnav(g)) => {
            if !g.in_bounds(*to) || g.walls.contains(to) || *to == g.start {
                return Err(bad(format!("goal cannot move to {to:?}")));
            }
            g.goal = *to;
        }
        (NoveltyKind::GravityScale { factor }, WorldParams::Slingshot(s)) => {
            if !(factor.is_finite() && *factor > 0.0) {
                return Err(bad(format!("gravity factor {factor} must be positive")));
            }
            s.gravity *= factor;
        }
        (NoveltyKind::MoveTarget { index, to }, WorldParams::Slingshot(s)) => {
            let t = s.targets.get_mut(*index).ok_or_else(|| bad(format!("no target {index}")))?;
            t.position = *to;
        }
        (NoveltyKind::AddBlock { block }, WorldParams::Slingshot(s)) => s.blocks.push(block.clone()),
        (NoveltyKind::RemoveBlock { index }, WorldParams::Slingshot(s)) => {
            if *index >= s.blocks.len() {
                return Err(bad(format!("no block {index}")));
            }
            s.blocks.remove(*index);
        }
        (NoveltyKind::ShrinkTarget { index, factor }, WorldParams::Slingshot(s)) => {
            if !(*factor > 0.0 && *factor <= 1.0) {
                return Err(bad(format!("shrink factor {factor} must lie in (0, 1]")));
            }
            scale_targets(&mut s.targets, *index, *factor).map_err(bad)?;
        }
        (NoveltyKind::GrowTarget { index, factor }, WorldParams::Slingshot(s)) => {
            if !(factor.is_finite() && *factor >= 1.0) {
                return Err(bad(format!("grow factor {factor} must be at least 1")));
            }
            scale_targets(&mut s.targets, *index, *factor).map_err(bad)?;
        }
        _ => unreachable!("kind compatibility checked above"),
    }
    post.validate().map_err(|e| match e {
        WorldError::SpecValidation(msg) => bad(msg),
        other => bad(other.to_string()),
    })?;
    Ok(post)
}

fn scale_targets(targets: &mut [crate::worlds::Target], index: Option<usize>, factor: f64) -> Result<(), String> {
    match index {
        Some(i) => {
            let t = targets.get_mut(i).ok_or_else(|| format!("no target {i}"))?;
            t.radius *= factor;
        }
        None => targets.iter_mut().for_each(|t| t.radius *= factor),
    }
    Ok(())
}
