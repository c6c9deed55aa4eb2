//! Off-policy base learners. Each exposes a policy (to act and to advise)
//! and a Q-function (to evaluate advice).

mod actor_critic;
pub mod checkpoint;
pub mod mlp;
mod neural_q;
mod tabular;

pub use actor_critic::{ActorCriticConfig, ActorCriticLite};
pub use checkpoint::Tensor;
pub use neural_q::{NeuralQ, NeuralQConfig};
pub use tabular::{Discretizer, TabularQ, TabularQConfig};

use serde::{Deserialize, Serialize};

use crate::envs::EnvSpec;
use crate::error::{PeerlabError, Result};
use crate::rng::RngStream;
use crate::types::{ActionValue, Observation, Transition};

/// How [`OffPolicyLearner::act`] picks an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActMode {
    /// Deterministic given the parameters. Used for advice and evaluation.
    Greedy,
    /// ε-greedy (discrete) or Gaussian noise (continuous).
    Explore,
}

/// Linear decay from `start` to `end` over `decay_steps`, then constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_steps: usize,
}

impl EpsilonSchedule {
    pub fn constant(value: f64) -> Self {
        Self {
            start: value,
            end: value,
            decay_steps: 0,
        }
    }

    /// 1.0 to 0.05 over the first `fraction` of `total_steps`.
    pub fn linear_fraction(total_steps: usize, fraction: f64) -> Self {
        Self {
            start: 1.0,
            end: 0.05,
            decay_steps: ((total_steps as f64) * fraction).round() as usize,
        }
    }

    pub fn value(&self, step: usize) -> f64 {
        if step >= self.decay_steps {
            return self.end;
        }
        let frac = step as f64 / self.decay_steps as f64;
        self.start + (self.end - self.start) * frac
    }

    pub fn validate(&self) -> Result<()> {
        for v in [self.start, self.end] {
            if !(0.0..=1.0).contains(&v) {
                return Err(PeerlabError::InvalidConfig(format!(
                    "epsilon {v} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

pub trait OffPolicyLearner: Send + Sync {
    fn name(&self) -> &'static str;

    fn act(&self, obs: &Observation, mode: ActMode, rng: &mut RngStream) -> Result<ActionValue>;

    fn q_value(&self, obs: &Observation, action: &ActionValue) -> Result<f64>;

    /// `Q(s, pi(s))` for the greedy policy.
    fn greedy_value(&self, obs: &Observation) -> Result<f64>;

    /// One learning step on `batch`; returns the mean squared TD error.
    fn update(&mut self, batch: &[&Transition]) -> Result<f64>;

    /// Advances the exploration schedule to `step`.
    fn set_progress(&mut self, step: usize);

    fn parameters(&self) -> Vec<Tensor>;

    fn load_parameters(&mut self, tensors: &[Tensor]) -> Result<()>;
}

/// A learner together with its training switch. A frozen handle never
/// changes its parameters; `update` on it is a contract violation.
pub struct LearnerHandle {
    learner: Box<dyn OffPolicyLearner>,
    frozen: bool,
}

impl LearnerHandle {
    pub fn new(learner: Box<dyn OffPolicyLearner>) -> Self {
        Self {
            learner,
            frozen: false,
        }
    }

    pub fn frozen(learner: Box<dyn OffPolicyLearner>) -> Self {
        Self {
            learner,
            frozen: true,
        }
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn is_trainable(&self) -> bool {
        !self.frozen
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn learner(&self) -> &dyn OffPolicyLearner {
        self.learner.as_ref()
    }

    pub fn act(
        &self,
        obs: &Observation,
        mode: ActMode,
        rng: &mut RngStream,
    ) -> Result<ActionValue> {
        self.learner.act(obs, mode, rng)
    }

    pub fn q_value(&self, obs: &Observation, action: &ActionValue) -> Result<f64> {
        self.learner.q_value(obs, action)
    }

    pub fn greedy_value(&self, obs: &Observation) -> Result<f64> {
        self.learner.greedy_value(obs)
    }

    pub fn update(&mut self, batch: &[&Transition]) -> Result<f64> {
        if self.frozen {
            return Err(PeerlabError::ContractViolation(
                "update called on a frozen learner".into(),
            ));
        }
        if batch.is_empty() {
            return Err(PeerlabError::ContractViolation("empty update batch".into()));
        }
        self.learner.update(batch)
    }

    pub fn set_progress(&mut self, step: usize) {
        self.learner.set_progress(step);
    }

    pub fn parameters(&self) -> Vec<Tensor> {
        self.learner.parameters()
    }

    pub fn load_parameters(&mut self, tensors: &[Tensor]) -> Result<()> {
        self.learner.load_parameters(tensors)
    }

    /// Order-sensitive hash of every parameter bit; equal iff parameters are
    /// bit-identical (up to hash collisions).
    pub fn checksum(&self) -> u64 {
        checksum(&self.parameters())
    }
}

pub fn checksum(tensors: &[Tensor]) -> u64 {
    // FNV-1a over the raw bits.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for t in tensors {
        for &v in &t.data {
            for byte in v.to_bits().to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
    }
    h
}

/// Which base learner to build for an environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LearnerConfig {
    Tabular(TabularQConfig),
    Neural(NeuralQConfig),
    ActorCritic(ActorCriticConfig),
}

impl LearnerConfig {
    pub fn build(
        &self,
        spec: &EnvSpec,
        exploration: EpsilonSchedule,
        rng: &mut RngStream,
    ) -> Result<Box<dyn OffPolicyLearner>> {
        Ok(match self {
            LearnerConfig::Tabular(c) => {
                Box::new(TabularQ::new(spec, c.clone(), exploration, rng)?)
            }
            LearnerConfig::Neural(c) => Box::new(NeuralQ::new(spec, c.clone(), exploration, rng)?),
            LearnerConfig::ActorCritic(c) => Box::new(ActorCriticLite::new(spec, c.clone(), rng)?),
        })
    }

    /// Same learner, randomly initialized so its greedy policy is arbitrary.
    pub fn build_random_init(
        &self,
        spec: &EnvSpec,
        rng: &mut RngStream,
    ) -> Result<Box<dyn OffPolicyLearner>> {
        match self {
            LearnerConfig::Tabular(c) => {
                let mut c = c.clone();
                c.init_scale = c.init_scale.max(1.0);
                Ok(Box::new(TabularQ::new(
                    spec,
                    c,
                    EpsilonSchedule::constant(0.0),
                    rng,
                )?))
            }
            other => other.build(spec, EpsilonSchedule::constant(0.0), rng),
        }
    }

    pub fn batch_size(&self) -> usize {
        match self {
            LearnerConfig::Tabular(c) => c.batch_size,
            LearnerConfig::Neural(c) => c.batch_size,
            LearnerConfig::ActorCritic(c) => c.batch_size,
        }
    }
}

/// Checks that `obs` fits the environment's observation layout.
pub(crate) fn check_obs(spec: &EnvSpec, obs: &Observation) -> Result<()> {
    if obs.len() != spec.observation_dim {
        return Err(PeerlabError::DimensionMismatch {
            expected: spec.observation_dim,
            actual: obs.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_linear_schedule() {
        let s = EpsilonSchedule::linear_fraction(1000, 0.2);
        assert_eq!(s.decay_steps, 200);
        assert_eq!(s.value(0), 1.0);
        assert!((s.value(100) - 0.525).abs() < 1e-12);
        assert_eq!(s.value(200), 0.05);
        assert_eq!(s.value(10_000), 0.05);
        assert_eq!(EpsilonSchedule::constant(0.3).value(0), 0.3);
        assert!(EpsilonSchedule::constant(1.5).validate().is_err());
    }
}
