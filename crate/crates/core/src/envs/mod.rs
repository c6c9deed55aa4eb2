//! Independent environment copies. Every agent owns its own instance; nothing
//! is shared between copies.

mod point_goal;
mod room;

pub use point_goal::PointGoalEnv;
pub use room::{manhattan, optimal_action, RoomAction, RoomEnv, RoomGeometry, RoomState};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rng::RngStream;
use crate::types::{ActionValue, Observation};

/// Shape of an action space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ActionSpace {
    Discrete(usize),
    Continuous { low: Vec<f64>, high: Vec<f64> },
}

impl ActionSpace {
    pub fn dims(&self) -> usize {
        match self {
            ActionSpace::Discrete(_) => 1,
            ActionSpace::Continuous { low, .. } => low.len(),
        }
    }

    /// Checks that `action` belongs to this space.
    pub fn contains(&self, action: &ActionValue) -> bool {
        match (self, action) {
            (ActionSpace::Discrete(n), ActionValue::Discrete(a)) => a < n,
            (ActionSpace::Continuous { low, high }, ActionValue::Continuous(v)) => {
                v.len() == low.len()
                    && v.iter()
                        .zip(low.iter().zip(high))
                        .all(|(x, (lo, hi))| x.is_finite() && *x >= *lo && *x <= *hi)
            }
            _ => false,
        }
    }
}

/// Static description of a task: observation layout, action space, discount
/// and horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub name: String,
    pub observation_dim: usize,
    /// Inclusive bounds of every observation component.
    pub observation_bounds: (f64, f64),
    /// Number of evenly spaced values each observation component takes, for
    /// lattice-valued observations.
    pub observation_levels: Option<usize>,
    pub action_space: ActionSpace,
    pub gamma: f64,
    pub horizon: usize,
}

/// Result of one environment transition.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: f64,
    /// The task was solved; no bootstrapping past this point.
    pub terminated: bool,
    /// The step limit was hit.
    pub truncated: bool,
}

impl StepOutcome {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    /// Starts a new episode and returns the initial observation.
    fn reset(&mut self, rng: &mut RngStream) -> Observation;

    /// Advances one step. Fails when the episode is already over.
    fn step(&mut self, action: &ActionValue) -> Result<StepOutcome>;

    fn is_done(&self) -> bool;

    /// Creates a fresh, independent copy with the same parameters.
    fn fresh_copy(&self) -> Box<dyn Environment>;

    /// Grid geometry, for environments with one.
    fn room_geometry(&self) -> Option<RoomGeometry> {
        None
    }
}
