//! Finite, deterministic, episodic micro-worlds.
//!
//! Two kinds are provided:
//!
//! * `gridnav`: walk a grid with N/S/E/W moves from `start` to `goal`.
//!   Bumping into the border leaves the agent in place but still uses up a
//!   step; running into a wall does the same or ends the episode, depending
//!   on [`WallContact`]. Reaching the goal pays 1; running out of steps pays 0.
//! * `slingshot`: each action picks a launch angle and power from fixed
//!   grids. The projectile follows a parabola sampled every `time_step`
//!   seconds plus its exact landing point. Targets within their radius of a
//!   sample are destroyed unless a block is hit earlier on the path. Clearing
//!   every target pays 1; running out of shots pays 0.
//!
//! The action set is global and identical in every state, which is what lets
//! [`crate::sampling::enumerate_solutions`] walk the full action tree.
//!
//! World specs are JSON documents; `horizon` is the step (or shot) limit:
//!
//! ```json
//! {"horizon": 2,
//!  "world": {"kind": "gridnav", "width": 2, "height": 2,
//!            "walls": [], "start": [0, 0], "goal": [1, 1],
//!            "wall_contact": "stay"}}
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::{ActionMetricSpec, ActionVector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("invalid world spec: {0}")]
    SpecValidation(String),
    #[error("action {0:?} is not in the world's action set")]
    InvalidAction(Vec<f64>),
    #[error("action index {0} is out of range")]
    InvalidActionIndex(usize),
    #[error("episode already finished")]
    EpisodeFinished,
}

/// Grid cell as `(x, y)`; `y` grows northwards.
pub type Cell = (u32, u32);

/// What happens when a move runs into a wall cell. Moves off the grid
/// always leave the agent in place.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallContact {
    /// The agent stays where it is; the step is still used up.
    #[default]
    Stay,
    /// The episode ends with reward 0.
    ///
    /// Under this rule adding walls can only remove solutions and removing
    /// walls can only add them, because a solution never touches a wall.
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridNavParams {
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub walls: BTreeSet<Cell>,
    pub start: Cell,
    pub goal: Cell,
    #[serde(default)]
    pub wall_contact: WallContact,
}

impl GridNavParams {
    pub fn in_bounds(&self, c: Cell) -> bool {
        c.0 < self.width && c.1 < self.height
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub position: [f64; 2],
    pub radius: f64,
}

/// Axis-aligned rectangle that stops a projectile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Block {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlingshotParams {
    /// Launch angles in degrees, each strictly between 0 and 90.
    pub angles_deg: Vec<f64>,
    /// Launch speeds.
    pub powers: Vec<f64>,
    pub gravity: f64,
    /// Trajectory sampling interval.
    pub time_step: f64,
    /// Launch point; the ground is `y = 0`.
    pub launch: [f64; 2],
    pub targets: Vec<Target>,
    #[serde(default)]
    pub blocks: Vec<Block>,
}

/// Upper bound on trajectory samples per shot.
const MAX_TRAJECTORY_SAMPLES: f64 = 1.0e6;

impl SlingshotParams {
    fn velocity(&self, angle: usize, power: usize) -> (f64, f64) {
        let theta = self.angles_deg[angle].to_radians();
        let v = self.powers[power];
        (v * theta.cos(), v * theta.sin())
    }

    /// Time at which the shot returns to the ground.
    pub fn flight_time(&self, angle: usize, power: usize) -> f64 {
        let (_, vy) = self.velocity(angle, power);
        let h = self.launch[1];
        (vy + (vy * vy + 2.0 * self.gravity * h).sqrt()) / self.gravity
    }

    /// Position of the shot at time `t`.
    pub fn position(&self, angle: usize, power: usize, t: f64) -> [f64; 2] {
        let (vx, vy) = self.velocity(angle, power);
        [self.launch[0] + vx * t, self.launch[1] + vy * t - 0.5 * self.gravity * t * t]
    }

    /// Horizontal distance travelled before landing, ignoring blocks.
    pub fn horizontal_range(&self, angle: usize, power: usize) -> f64 {
        let (vx, _) = self.velocity(angle, power);
        vx * self.flight_time(angle, power)
    }

    /// Sample points along the trajectory: every `time_step` while airborne,
    /// then the landing point.
    pub fn trajectory(&self, angle: usize, power: usize) -> Vec<[f64; 2]> {
        let land = self.flight_time(angle, power);
        let mut points = Vec::new();
        let mut k = 0u64;
        loop {
            let t = k as f64 * self.time_step;
            if t >= land {
                break;
            }
            points.push(self.position(angle, power, t));
            k += 1;
        }
        let mut landing = self.position(angle, power, land);
        landing[1] = 0.0;
        points.push(landing);
        points
    }

    /// Targets a shot destroys, in the order it reaches them.
    pub fn shot_hits(&self, angle: usize, power: usize) -> Vec<usize> {
        let mut hits = Vec::new();
        for p in self.trajectory(angle, power) {
            if self.blocks.iter().any(|b| b.contains(p)) {
                break;
            }
            for (i, t) in self.targets.iter().enumerate() {
                let (dx, dy) = (p[0] - t.position[0], p[1] - t.position[1]);
                if !hits.contains(&i) && (dx * dx + dy * dy).sqrt() <= t.radius {
                    hits.push(i);
                }
            }
        }
        hits
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WorldParams {
    Gridnav(GridNavParams),
    Slingshot(SlingshotParams),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorldKind {
    Gridnav,
    Slingshot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldSpec {
    /// Maximum actions per episode (shots, for slingshot worlds).
    pub horizon: u32,
    pub world: WorldParams,
}

fn finite(name: &str, xs: &[f64]) -> Result<(), WorldError> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(WorldError::SpecValidation(format!("{name} must be finite")))
    }
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, WorldError> {
    Err(WorldError::SpecValidation(msg.into()))
}

impl WorldSpec {
    pub fn gridnav(params: GridNavParams, horizon: u32) -> Self {
        Self { horizon, world: WorldParams::Gridnav(params) }
    }

    pub fn slingshot(params: SlingshotParams, shots: u32) -> Self {
        Self { horizon: shots, world: WorldParams::Slingshot(params) }
    }

    pub fn kind(&self) -> WorldKind {
        match self.world {
            WorldParams::Gridnav(_) => WorldKind::Gridnav,
            WorldParams::Slingshot(_) => WorldKind::Slingshot,
        }
    }

    pub fn from_json(s: &str) -> Result<Self, WorldError> {
        let spec: Self = serde_json::from_str(s).map_err(|e| WorldError::SpecValidation(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("world spec serializes")
    }

    /// Hex SHA-256 of the compact JSON form.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    /// The action metric for this kind: discrete for grids, the unit square
    /// for slingshot (angle, power) coordinates.
    pub fn action_metric(&self) -> ActionMetricSpec {
        match self.world {
            WorldParams::Gridnav(_) => ActionMetricSpec::discrete(),
            WorldParams::Slingshot(_) => {
                ActionMetricSpec::euclidean(vec![(0.0, 1.0), (0.0, 1.0)]).expect("unit square is valid")
            }
        }
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        if self.horizon == 0 {
            return invalid("horizon must be at least 1");
        }
        match &self.world {
            WorldParams::Gridnav(g) => {
                if g.width == 0 || g.height == 0 {
                    return invalid("grid must be at least 1x1");
                }
                if !g.in_bounds(g.start) || !g.in_bounds(g.goal) {
                    return invalid("start and goal must lie inside the grid");
                }
                if let Some(w) = g.walls.iter().find(|w| !g.in_bounds(**w)) {
                    return invalid(format!("wall {w:?} lies outside the grid"));
                }
                if g.walls.contains(&g.start) || g.walls.contains(&g.goal) {
                    return invalid("start and goal must not be walls");
                }
                if g.start == g.goal {
                    return invalid("start and goal must differ");
                }
            }
            WorldParams::Slingshot(s) => {
                if s.angles_deg.is_empty() || s.powers.is_empty() {
                    return invalid("angle and power grids must be nonempty");
                }
                finite("angles", &s.angles_deg)?;
                finite("powers", &s.powers)?;
                finite("physics constants", &[s.gravity, s.time_step, s.launch[0], s.launch[1]])?;
                if s.angles_deg.iter().any(|&a| a <= 0.0 || a >= 90.0) {
                    return invalid("angles must lie strictly between 0 and 90 degrees");
                }
                if s.powers.iter().any(|&p| p <= 0.0) {
                    return invalid("powers must be positive");
                }
                if s.gravity <= 0.0 || s.time_step <= 0.0 {
                    return invalid("gravity and time_step must be positive");
                }
                if s.launch[1] < 0.0 {
                    return invalid("launch point must not be below ground");
                }
                if s.targets.is_empty() {
                    return invalid("at least one target is required");
                }
                for t in &s.targets {
                    finite("targets", &[t.position[0], t.position[1], t.radius])?;
                    if t.radius <= 0.0 {
                        return invalid("target radius must be positive");
                    }
                }
                for b in &s.blocks {
                    finite("blocks", &[b.min[0], b.min[1], b.max[0], b.max[1]])?;
                    if !(b.min[0] < b.max[0] && b.min[1] < b.max[1]) {
                        return invalid("block min corner must be below and left of max corner");
                    }
                }
                for a in 0..s.angles_deg.len() {
                    for p in 0..s.powers.len() {
                        if s.flight_time(a, p) / s.time_step > MAX_TRAJECTORY_SAMPLES {
                            return invalid("time_step too small for the flight times involved");
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Per-kind state of one episode.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StateBody {
    Grid { position: Cell },
    Slingshot { alive: Vec<bool> },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WorldState {
    steps: u32,
    finished: Option<u8>,
    body: StateBody,
}

impl WorldState {
    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn is_terminal(&self) -> bool {
        self.finished.is_some()
    }

    /// Terminal reward, once the episode has ended.
    pub fn reward(&self) -> Option<u8> {
        self.finished
    }

    pub fn body(&self) -> &StateBody {
        &self.body
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transition {
    pub terminal: bool,
    pub reward: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeOutcome {
    pub actions: Vec<ActionVector>,
    pub terminal_reward: u8,
    pub steps: u32,
    pub terminal: bool,
}

const GRID_MOVES: [(&str, i64, i64); 4] = [("N", 0, 1), ("S", 0, -1), ("E", 1, 0), ("W", -1, 0)];

#[derive(Clone, Debug)]
enum Dynamics {
    Grid,
    /// Targets destroyed by each action, in trajectory order.
    Slingshot { hits: Vec<Vec<usize>> },
}

/// A validated world ready to run episodes.
#[derive(Clone, Debug)]
pub struct World {
    spec: WorldSpec,
    actions: Vec<ActionVector>,
    metric: ActionMetricSpec,
    dynamics: Dynamics,
}

impl World {
    pub fn new(spec: WorldSpec) -> Result<Self, WorldError> {
        spec.validate()?;
        let actions = action_set_unchecked(&spec);
        let dynamics = match &spec.world {
            WorldParams::Gridnav(_) => Dynamics::Grid,
            WorldParams::Slingshot(s) => {
                let mut hits = Vec::with_capacity(actions.len());
                for a in 0..s.angles_deg.len() {
                    for p in 0..s.powers.len() {
                        hits.push(s.shot_hits(a, p));
                    }
                }
                Dynamics::Slingshot { hits }
            }
        };
        let metric = spec.action_metric();
        Ok(Self { spec, actions, metric, dynamics })
    }

    pub fn spec(&self) -> &WorldSpec {
        &self.spec
    }

    pub fn horizon(&self) -> u32 {
        self.spec.horizon
    }

    pub fn actions(&self) -> &[ActionVector] {
        &self.actions
    }

    pub fn metric(&self) -> &ActionMetricSpec {
        &self.metric
    }

    pub fn action_index(&self, action: &ActionVector) -> Result<usize, WorldError> {
        self.actions
            .iter()
            .position(|a| a == action)
            .ok_or_else(|| WorldError::InvalidAction(action.components().to_vec()))
    }

    pub fn reset(&self) -> WorldState {
        let body = match &self.spec.world {
            WorldParams::Gridnav(g) => StateBody::Grid { position: g.start },
            WorldParams::Slingshot(s) => StateBody::Slingshot { alive: vec![true; s.targets.len()] },
        };
        WorldState { steps: 0, finished: None, body }
    }

    /// Applies the action at `index` in place.
    pub fn step_index(&self, state: &mut WorldState, index: usize) -> Result<Transition, WorldError> {
        if state.finished.is_some() {
            return Err(WorldError::EpisodeFinished);
        }
        if index >= self.actions.len() {
            return Err(WorldError::InvalidActionIndex(index));
        }
        state.steps += 1;
        let mut crashed = false;
        let success = match (&self.spec.world, &mut state.body, &self.dynamics) {
            (WorldParams::Gridnav(g), StateBody::Grid { position }, Dynamics::Grid) => {
                let (_, dx, dy) = GRID_MOVES[index];
                let nx = i64::from(position.0) + dx;
                let ny = i64::from(position.1) + dy;
                if nx >= 0 && ny >= 0 {
                    let next = (nx as u32, ny as u32);
                    if g.walls.contains(&next) {
                        if g.wall_contact == WallContact::Fail {
                            crashed = true;
                        }
                    } else if g.in_bounds(next) {
                        *position = next;
                    }
                }
                *position == g.goal
            }
            (_, StateBody::Slingshot { alive }, Dynamics::Slingshot { hits }) => {
                for &t in &hits[index] {
                    alive[t] = false;
                }
                alive.iter().all(|a| !a)
            }
            _ => unreachable!("state does not belong to this world"),
        };
        // goal check first: a solution may use the full horizon
        let transition = if success {
            Transition { terminal: true, reward: 1 }
        } else if crashed || state.steps >= self.spec.horizon {
            Transition { terminal: true, reward: 0 }
        } else {
            Transition { terminal: false, reward: 0 }
        };
        if transition.terminal {
            state.finished = Some(transition.reward);
        }
        Ok(transition)
    }

    pub fn step(&self, state: &WorldState, action: &ActionVector) -> Result<(WorldState, Transition), WorldError> {
        let index = self.action_index(action)?;
        let mut next = state.clone();
        let t = self.step_index(&mut next, index)?;
        Ok((next, t))
    }

    /// Runs `actions` from reset. Fails if actions remain after the episode ended.
    pub fn replay(&self, actions: &[ActionVector]) -> Result<EpisodeOutcome, WorldError> {
        let mut state = self.reset();
        for a in actions {
            let index = self.action_index(a)?;
            self.step_index(&mut state, index)?;
        }
        Ok(EpisodeOutcome {
            actions: actions.to_vec(),
            terminal_reward: state.finished.unwrap_or(0),
            steps: state.steps,
            terminal: state.finished.is_some(),
        })
    }

    /// True iff `actions` is exactly a solution: it ends with reward 1 on its last action.
    pub fn is_solution(&self, actions: &[ActionVector]) -> bool {
        matches!(self.replay(actions), Ok(o) if o.terminal && o.terminal_reward == 1)
    }
}

fn action_set_unchecked(spec: &WorldSpec) -> Vec<ActionVector> {
    match &spec.world {
        WorldParams::Gridnav(_) => GRID_MOVES
            .iter()
            .map(|&(_, dx, dy)| ActionVector::new(vec![dx as f64, dy as f64]).expect("finite"))
            .collect(),
        WorldParams::Slingshot(s) => {
            let norm = |i: usize, n: usize| if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            let (na, np) = (s.angles_deg.len(), s.powers.len());
            (0..na)
                .flat_map(|a| (0..np).map(move |p| (a, p)))
                .map(|(a, p)| ActionVector::new(vec![norm(a, na), norm(p, np)]).expect("finite"))
                .collect()
        }
    }
}

/// Grid move name for a gridnav action vector, if it is one.
pub fn grid_move_name(action: &ActionVector) -> Option<&'static str> {
    GRID_MOVES
        .iter()
        .find(|&&(_, dx, dy)| action.components() == [dx as f64, dy as f64])
        .map(|&(name, _, _)| name)
}

/// Gridnav action vector for a move name (`N`, `S`, `E`, `W`).
pub fn grid_move(name: &str) -> Option<ActionVector> {
    GRID_MOVES
        .iter()
        .find(|&&(n, _, _)| n == name)
        .map(|&(_, dx, dy)| ActionVector::new(vec![dx as f64, dy as f64]).expect("finite"))
}

pub fn reset(spec: &WorldSpec) -> Result<WorldState, WorldError> {
    Ok(World::new(spec.clone())?.reset())
}

pub fn step(
    spec: &WorldSpec,
    state: &WorldState,
    action: &ActionVector,
) -> Result<(WorldState, Transition), WorldError> {
    World::new(spec.clone())?.step(state, action)
}

/// Canonical action order: N, S, E, W for grids; angle-major (angle, power)
/// pairs for slingshot.
pub fn action_set(spec: &WorldSpec) -> Result<Vec<ActionVector>, WorldError> {
    spec.validate()?;
    Ok(action_set_unchecked(spec))
}
