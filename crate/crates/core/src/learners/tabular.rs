use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ActMode, EpsilonSchedule, OffPolicyLearner, Tensor};
use crate::envs::{ActionSpace, EnvSpec};
use crate::error::{PeerlabError, Result};
use crate::rng::RngStream;
use crate::types::{ActionValue, Observation, Transition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TabularQConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Entries start uniform on `[0, init_scale)`; `0` gives an all-zero table.
    #[serde(default)]
    pub init_scale: f64,
    /// Grid resolution per observation component when the environment does
    /// not declare one.
    #[serde(default)]
    pub levels: Option<usize>,
}

impl Default for TabularQConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            batch_size: 8,
            init_scale: 0.0,
            levels: None,
        }
    }
}

/// Maps a bounded observation vector onto a dense lattice index.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretizer {
    dims: usize,
    levels: usize,
    low: f64,
    high: f64,
}

impl Discretizer {
    pub fn new(dims: usize, levels: usize, low: f64, high: f64) -> Result<Self> {
        if levels < 2 || !(high > low) {
            return Err(PeerlabError::InvalidConfig(format!(
                "discretizer needs >= 2 levels over a non-empty range (levels={levels}, [{low}, {high}])"
            )));
        }
        let states = (levels as u128)
            .checked_pow(dims as u32)
            .unwrap_or(u128::MAX);
        if states > 50_000_000 {
            return Err(PeerlabError::InvalidConfig(format!(
                "lattice of {levels}^{dims} states is too large for a table"
            )));
        }
        Ok(Self {
            dims,
            levels,
            low,
            high,
        })
    }

    pub fn states(&self) -> usize {
        self.levels.pow(self.dims as u32)
    }

    pub fn index(&self, obs: &[f64]) -> usize {
        let top = (self.levels - 1) as f64;
        let mut idx = 0usize;
        for &v in obs {
            let u = ((v - self.low) / (self.high - self.low)).clamp(0.0, 1.0);
            let cell = (u * top).round() as usize;
            idx = idx * self.levels + cell;
        }
        idx
    }
}

/// Q-table over a discretized observation, ε-greedy exploration and
/// one-step Q-learning updates.
#[derive(Debug, Clone)]
pub struct TabularQ {
    config: TabularQConfig,
    discretizer: Discretizer,
    actions: usize,
    gamma: f64,
    table: Vec<f64>,
    exploration: EpsilonSchedule,
    epsilon: f64,
    obs_dim: usize,
}

impl TabularQ {
    pub fn new(
        spec: &EnvSpec,
        config: TabularQConfig,
        exploration: EpsilonSchedule,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let actions = match spec.action_space {
            ActionSpace::Discrete(n) => n,
            ActionSpace::Continuous { .. } => {
                return Err(PeerlabError::InvalidConfig(
                    "tabular Q-learning needs a discrete action space".into(),
                ))
            }
        };
        if !(0.0..=1.0).contains(&config.learning_rate) {
            return Err(PeerlabError::InvalidConfig(format!(
                "learning rate {} outside [0, 1]",
                config.learning_rate
            )));
        }
        exploration.validate()?;
        let levels = config.levels.or(spec.observation_levels).ok_or_else(|| {
            PeerlabError::InvalidConfig("tabular learner needs a lattice resolution".into())
        })?;
        let (low, high) = spec.observation_bounds;
        let discretizer = Discretizer::new(spec.observation_dim, levels, low, high)?;
        let size = discretizer.states() * actions;
        let table = if config.init_scale > 0.0 {
            (0..size)
                .map(|_| rng.gen_range(0.0..config.init_scale))
                .collect()
        } else {
            vec![0.0; size]
        };
        Ok(Self {
            epsilon: exploration.value(0),
            config,
            discretizer,
            actions,
            gamma: spec.gamma,
            table,
            exploration,
            obs_dim: spec.observation_dim,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn learning_rate(&self) -> f64 {
        self.config.learning_rate
    }

    fn row(&self, obs: &[f64]) -> &[f64] {
        let s = self.discretizer.index(obs) * self.actions;
        &self.table[s..s + self.actions]
    }

    fn argmax(row: &[f64]) -> usize {
        let mut best = 0;
        for (a, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = a;
            }
        }
        best
    }

    fn check(&self, obs: &Observation) -> Result<()> {
        if obs.len() != self.obs_dim {
            return Err(PeerlabError::DimensionMismatch {
                expected: self.obs_dim,
                actual: obs.len(),
            });
        }
        Ok(())
    }

    fn action_index(&self, action: &ActionValue) -> Result<usize> {
        match action {
            ActionValue::Discrete(a) if *a < self.actions => Ok(*a),
            other => Err(PeerlabError::InvalidAction(format!(
                "{other:?} is not one of {} discrete actions",
                self.actions
            ))),
        }
    }
}

impl OffPolicyLearner for TabularQ {
    fn name(&self) -> &'static str {
        "tabular"
    }

    fn act(&self, obs: &Observation, mode: ActMode, rng: &mut RngStream) -> Result<ActionValue> {
        self.check(obs)?;
        if mode == ActMode::Explore && rng.gen::<f64>() < self.epsilon {
            return Ok(ActionValue::Discrete(rng.gen_range(0..self.actions)));
        }
        Ok(ActionValue::Discrete(Self::argmax(
            self.row(obs.as_slice()),
        )))
    }

    fn q_value(&self, obs: &Observation, action: &ActionValue) -> Result<f64> {
        self.check(obs)?;
        let a = self.action_index(action)?;
        Ok(self.row(obs.as_slice())[a])
    }

    fn greedy_value(&self, obs: &Observation) -> Result<f64> {
        self.check(obs)?;
        let row = self.row(obs.as_slice());
        Ok(row[Self::argmax(row)])
    }

    fn update(&mut self, batch: &[&Transition]) -> Result<f64> {
        let eta = self.config.learning_rate;
        let mut sq = 0.0;
        for t in batch {
            let a = self.action_index(&t.action)?;
            let bootstrap = if t.done {
                0.0
            } else {
                let next = self.row(t.next_state.as_slice());
                next[Self::argmax(next)]
            };
            let s = self.discretizer.index(t.state.as_slice()) * self.actions + a;
            let td = t.reward + self.gamma * bootstrap - self.table[s];
            self.table[s] += eta * td;
            sq += td * td;
        }
        Ok(sq / batch.len() as f64)
    }

    fn set_progress(&mut self, step: usize) {
        self.epsilon = self.exploration.value(step);
    }

    fn parameters(&self) -> Vec<Tensor> {
        vec![Tensor::new(
            "q",
            vec![self.discretizer.states(), self.actions],
            self.table.clone(),
        )]
    }

    fn load_parameters(&mut self, tensors: &[Tensor]) -> Result<()> {
        let [t] = tensors else {
            return Err(PeerlabError::Checkpoint(format!(
                "tabular learner expects 1 tensor, got {}",
                tensors.len()
            )));
        };
        let expected = vec![self.discretizer.states(), self.actions];
        if t.shape != expected {
            return Err(PeerlabError::Checkpoint(format!(
                "tabular shape {:?} does not match {:?}",
                t.shape, expected
            )));
        }
        if !t.data.iter().all(|v| v.is_finite()) {
            return Err(PeerlabError::Checkpoint("non-finite Q entry".into()));
        }
        self.table.copy_from_slice(&t.data);
        Ok(())
    }
}
