//! Square grid-world. The agent starts in the centre cell and must reach a
//! goal cell drawn uniformly from the border. Reward is sparse: `+1` on the
//! goal, `0` otherwise.

use rand::Rng;

use super::{ActionSpace, EnvSpec, Environment, StepOutcome};
use crate::error::{PeerlabError, Result};
use crate::rng::RngStream;
use crate::types::{ActionValue, Observation};

/// Discrete moves. The discriminant is the action index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoomAction {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
}

impl RoomAction {
    pub const ALL: [RoomAction; 4] = [
        RoomAction::Up,
        RoomAction::Down,
        RoomAction::Left,
        RoomAction::Right,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    fn delta(self) -> (i64, i64) {
        match self {
            RoomAction::Up => (0, 1),
            RoomAction::Down => (0, -1),
            RoomAction::Left => (-1, 0),
            RoomAction::Right => (1, 0),
        }
    }
}

/// Size of a room; converts between cells and normalized observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoomGeometry {
    pub size: usize,
}

/// Agent and goal cells decoded from an observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoomState {
    pub size: usize,
    pub agent: (usize, usize),
    pub goal: (usize, usize),
}

impl RoomGeometry {
    pub fn new(size: usize) -> Result<Self> {
        if size < 3 || size.is_multiple_of(2) {
            return Err(PeerlabError::InvalidConfig(format!(
                "room size must be an odd integer >= 3, got {size}"
            )));
        }
        Ok(Self { size })
    }

    pub fn center(&self) -> (usize, usize) {
        let c = (self.size - 1) / 2;
        (c, c)
    }

    pub fn contains(&self, cell: (i64, i64)) -> bool {
        let n = self.size as i64;
        (0..n).contains(&cell.0) && (0..n).contains(&cell.1)
    }

    pub fn is_border(&self, cell: (usize, usize)) -> bool {
        let last = self.size - 1;
        cell.0 == 0 || cell.1 == 0 || cell.0 == last || cell.1 == last
    }

    /// All `4(N-1)` border cells in a fixed order.
    pub fn border_cells(&self) -> Vec<(usize, usize)> {
        let n = self.size;
        let mut cells = Vec::with_capacity(4 * (n - 1));
        for y in 0..n {
            for x in 0..n {
                if self.is_border((x, y)) {
                    cells.push((x, y));
                }
            }
        }
        cells
    }

    /// Cell reached by `action`; moves into the wall leave the agent in place.
    pub fn apply(&self, cell: (usize, usize), action: RoomAction) -> (usize, usize) {
        let (dx, dy) = action.delta();
        let next = (cell.0 as i64 + dx, cell.1 as i64 + dy);
        if self.contains(next) {
            (next.0 as usize, next.1 as usize)
        } else {
            cell
        }
    }

    pub fn encode(&self, agent: (usize, usize), goal: (usize, usize)) -> Observation {
        let scale = (self.size - 1) as f64;
        Observation::new(vec![
            agent.0 as f64 / scale,
            agent.1 as f64 / scale,
            goal.0 as f64 / scale,
            goal.1 as f64 / scale,
        ])
    }

    pub fn decode(&self, obs: &Observation) -> Result<RoomState> {
        if obs.len() != 4 {
            return Err(PeerlabError::DimensionMismatch {
                expected: 4,
                actual: obs.len(),
            });
        }
        let scale = (self.size - 1) as f64;
        let mut cells = [0usize; 4];
        for (c, &v) in cells.iter_mut().zip(obs.as_slice()) {
            if !(0.0..=1.0).contains(&v) {
                return Err(PeerlabError::UndefinedState(format!(
                    "room observation component {v} outside [0, 1]"
                )));
            }
            *c = (v * scale).round() as usize;
        }
        Ok(RoomState {
            size: self.size,
            agent: (cells[0], cells[1]),
            goal: (cells[2], cells[3]),
        })
    }
}

pub fn manhattan(a: (usize, usize), b: (usize, usize)) -> usize {
    a.0.abs_diff(b.0) + a.1.abs_diff(b.1)
}

/// A move that strictly shortens the Manhattan distance to the goal,
/// preferring horizontal moves.
pub fn optimal_action(state: &RoomState) -> Result<RoomAction> {
    let (ax, ay) = state.agent;
    let (gx, gy) = state.goal;
    if state.agent == state.goal {
        return Err(PeerlabError::UndefinedState(
            "agent already stands on the goal".into(),
        ));
    }
    Ok(if gx > ax {
        RoomAction::Right
    } else if gx < ax {
        RoomAction::Left
    } else if gy > ay {
        RoomAction::Up
    } else {
        RoomAction::Down
    })
}

#[derive(Debug, Clone)]
pub struct RoomEnv {
    geometry: RoomGeometry,
    spec: EnvSpec,
    agent: (usize, usize),
    goal: (usize, usize),
    border: Vec<(usize, usize)>,
    step_count: usize,
    max_steps: usize,
    done: bool,
}

impl RoomEnv {
    /// Room of odd side `size`, episode limit `4 * size`.
    pub fn new(size: usize, gamma: f64) -> Result<Self> {
        Self::with_max_steps(size, gamma, 4 * size)
    }

    pub fn with_max_steps(size: usize, gamma: f64, max_steps: usize) -> Result<Self> {
        let geometry = RoomGeometry::new(size)?;
        if !(0.0..1.0).contains(&gamma) {
            return Err(PeerlabError::InvalidConfig(format!(
                "discount must lie in [0, 1), got {gamma}"
            )));
        }
        if max_steps == 0 {
            return Err(PeerlabError::InvalidConfig("max_steps must be >= 1".into()));
        }
        let spec = EnvSpec {
            name: format!("room{size}"),
            observation_dim: 4,
            observation_bounds: (0.0, 1.0),
            observation_levels: Some(size),
            action_space: ActionSpace::Discrete(4),
            gamma,
            horizon: max_steps,
        };
        let border = geometry.border_cells();
        let goal = border[0];
        Ok(Self {
            geometry,
            spec,
            agent: geometry.center(),
            goal,
            border,
            step_count: 0,
            max_steps,
            done: true,
        })
    }

    pub fn geometry(&self) -> RoomGeometry {
        self.geometry
    }

    pub fn state(&self) -> RoomState {
        RoomState {
            size: self.geometry.size,
            agent: self.agent,
            goal: self.goal,
        }
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    /// Places agent and goal explicitly and starts an episode from there.
    pub fn set_state(
        &mut self,
        agent: (usize, usize),
        goal: (usize, usize),
    ) -> Result<Observation> {
        let g = self.geometry;
        if !g.contains((agent.0 as i64, agent.1 as i64)) || !g.is_border(goal) {
            return Err(PeerlabError::UndefinedState(format!(
                "agent {agent:?} / goal {goal:?} invalid for room of size {}",
                g.size
            )));
        }
        self.agent = agent;
        self.goal = goal;
        self.step_count = 0;
        self.done = false;
        Ok(self.observe())
    }

    fn observe(&self) -> Observation {
        self.geometry.encode(self.agent, self.goal)
    }
}

impl Environment for RoomEnv {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut RngStream) -> Observation {
        self.agent = self.geometry.center();
        self.goal = self.border[rng.gen_range(0..self.border.len())];
        self.step_count = 0;
        self.done = false;
        self.observe()
    }

    fn step(&mut self, action: &ActionValue) -> Result<StepOutcome> {
        if self.done {
            return Err(PeerlabError::EpisodeDone);
        }
        let index = action
            .as_discrete()
            .ok_or_else(|| PeerlabError::InvalidAction("room expects a discrete action".into()))?;
        let action = RoomAction::from_index(index).ok_or_else(|| {
            PeerlabError::InvalidAction(format!("room action {index} out of range"))
        })?;

        self.agent = self.geometry.apply(self.agent, action);
        self.step_count += 1;
        let terminated = self.agent == self.goal;
        let truncated = !terminated && self.step_count >= self.max_steps;
        self.done = terminated || truncated;
        Ok(StepOutcome {
            observation: self.observe(),
            reward: if terminated { 1.0 } else { 0.0 },
            terminated,
            truncated,
        })
    }

    fn is_done(&self) -> bool {
        self.done
    }

    fn fresh_copy(&self) -> Box<dyn Environment> {
        Box::new(
            RoomEnv::with_max_steps(self.geometry.size, self.spec.gamma, self.max_steps)
                .expect("parameters were validated on construction"),
        )
    }

    fn room_geometry(&self) -> Option<RoomGeometry> {
        Some(self.geometry)
    }
}
