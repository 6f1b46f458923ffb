//! Seeded generation of solvable base levels.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::sampling::{enumerate_world, DEFAULT_ENUMERATION_BUDGET};
use crate::seed;
use crate::worlds::{
    Block, Cell, GridNavParams, SlingshotParams, Target, WallContact, World, WorldKind, WorldSpec,
};

/// Attempts per level before generation gives up.
pub const DEFAULT_MAX_RETRIES: u32 = 1000;

/// Recipe for random base levels of one world kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LevelTemplate {
    /// Fixed start and goal; every other cell outside `reserved` becomes a
    /// wall with probability `wall_density`.
    Gridnav {
        width: u32,
        height: u32,
        horizon: u32,
        start: Cell,
        goal: Cell,
        wall_density: f64,
        #[serde(default)]
        reserved: Vec<Cell>,
        #[serde(default)]
        wall_contact: WallContact,
    },
    /// `targets` targets, each placed on the path of a random shot, plus
    /// `blocks` blocks of size `block_size` standing on the ground at a
    /// random x in `block_x`.
    Slingshot {
        angles_deg: Vec<f64>,
        powers: Vec<f64>,
        gravity: f64,
        time_step: f64,
        launch: [f64; 2],
        shots: u32,
        targets: usize,
        target_radius: f64,
        #[serde(default)]
        blocks: usize,
        block_size: [f64; 2],
        block_x: [f64; 2],
    },
}

impl LevelTemplate {
    pub fn kind(&self) -> WorldKind {
        match self {
            LevelTemplate::Gridnav { .. } => WorldKind::Gridnav,
            LevelTemplate::Slingshot { .. } => WorldKind::Slingshot,
        }
    }

    /// Default recipe for a world kind.
    pub fn default_for(kind: WorldKind) -> Self {
        match kind {
            WorldKind::Gridnav => LevelTemplate::Gridnav {
                width: 5,
                height: 5,
                horizon: 7,
                start: (0, 0),
                goal: (3, 3),
                wall_density: 0.2,
                reserved: vec![(4, 2), (2, 4)],
                wall_contact: WallContact::Fail,
            },
            WorldKind::Slingshot => LevelTemplate::Slingshot {
                angles_deg: vec![30.0, 45.0, 60.0, 75.0],
                powers: vec![6.0, 8.0, 10.0, 12.0],
                gravity: 9.81,
                time_step: 0.01,
                launch: [0.0, 0.0],
                shots: 2,
                targets: 2,
                target_radius: 0.4,
                blocks: 1,
                block_size: [0.3, 1.5],
                block_x: [2.0, 12.0],
            },
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> WorldSpec {
        match self {
            LevelTemplate::Gridnav { width, height, horizon, start, goal, wall_density, reserved, wall_contact } => {
                let mut walls = std::collections::BTreeSet::new();
                for y in 0..*height {
                    for x in 0..*width {
                        let c = (x, y);
                        // draw for every cell so the stream layout is fixed
                        let roll: f64 = rng.gen();
                        if c != *start && c != *goal && !reserved.contains(&c) && roll < *wall_density {
                            walls.insert(c);
                        }
                    }
                }
                WorldSpec::gridnav(
                    GridNavParams {
                        width: *width,
                        height: *height,
                        walls,
                        start: *start,
                        goal: *goal,
                        wall_contact: *wall_contact,
                    },
                    *horizon,
                )
            }
            LevelTemplate::Slingshot {
                angles_deg,
                powers,
                gravity,
                time_step,
                launch,
                shots,
                targets,
                target_radius,
                blocks,
                block_size,
                block_x,
            } => {
                let mut params = SlingshotParams {
                    angles_deg: angles_deg.clone(),
                    powers: powers.clone(),
                    gravity: *gravity,
                    time_step: *time_step,
                    launch: *launch,
                    targets: Vec::with_capacity(*targets),
                    blocks: Vec::with_capacity(*blocks),
                };
                for _ in 0..*targets {
                    let a = rng.gen_range(0..angles_deg.len());
                    let p = rng.gen_range(0..powers.len());
                    let frac: f64 = rng.gen_range(0.2..0.95);
                    let t = frac * params.flight_time(a, p);
                    params.targets.push(Target { position: params.position(a, p, t), radius: *target_radius });
                }
                for _ in 0..*blocks {
                    let x = rng.gen_range(block_x[0]..block_x[1]);
                    params.blocks.push(Block { min: [x, 0.0], max: [x + block_size[0], block_size[1]] });
                }
                WorldSpec::slingshot(params, *shots)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSet {
    pub template: LevelTemplate,
    pub seed: u64,
    pub levels: Vec<WorldSpec>,
}

impl LevelSet {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// `count` levels that each have at least one solution (checked by exhaustive enumeration).
pub fn generate_levels(template: &LevelTemplate, seed: u64, count: usize) -> Result<LevelSet, HarnessError> {
    generate_levels_with_retries(template, seed, count, DEFAULT_MAX_RETRIES)
}

pub fn generate_levels_with_retries(
    template: &LevelTemplate,
    seed: u64,
    count: usize,
    max_retries: u32,
) -> Result<LevelSet, HarnessError> {
    if count == 0 {
        return Err(HarnessError::InvalidConfig("level count must be at least 1".into()));
    }
    let levels = (0..count)
        .into_par_iter()
        .map(|index| {
            for attempt in 0..max_retries {
                let mut rng = seed::rng_for(seed, &[index as u64, u64::from(attempt)]);
                let spec = template.sample(&mut rng);
                let world = World::new(spec).map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
                if !enumerate_world(&world, DEFAULT_ENUMERATION_BUDGET)?.is_empty() {
                    return Ok(world.spec().clone());
                }
            }
            Err(HarnessError::GenerationFailed { index, attempts: max_retries })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LevelSet { template: template.clone(), seed, levels })
}
