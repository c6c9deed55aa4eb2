//! Experiment configuration, read from JSON.
//!
//! Every field has a default, so `{}` is a valid config: four tabular
//! learners on an 11x11 room with all three mechanisms and advantage.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::envs::{Environment, PointGoalEnv, RoomEnv, RoomGeometry};
use crate::error::{PeerlabError, Result};
use crate::learners::{EpsilonSchedule, LearnerConfig, TabularQConfig};
use crate::peer::{GroupSettings, MechanismSet, SelectionRule, TemperatureSchedule};
use crate::zoo::AgentKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvConfig {
    Room {
        size: usize,
        /// Defaults to `4 * size`.
        #[serde(default)]
        max_steps: Option<usize>,
    },
    PointGoal {
        #[serde(default = "default_max_speed")]
        max_speed: f64,
        #[serde(default = "default_point_steps")]
        max_steps: usize,
    },
}

fn default_max_speed() -> f64 {
    0.1
}

fn default_point_steps() -> usize {
    50
}

impl EnvConfig {
    pub fn room(size: usize) -> Self {
        EnvConfig::Room {
            size,
            max_steps: None,
        }
    }

    pub fn point_goal() -> Self {
        EnvConfig::PointGoal {
            max_speed: default_max_speed(),
            max_steps: default_point_steps(),
        }
    }

    /// Short names used on the command line: `room11`, `room21`, `pointgoal`.
    pub fn from_name(name: &str) -> Result<Self> {
        if name == "pointgoal" || name == "point_goal" {
            return Ok(Self::point_goal());
        }
        name.strip_prefix("room")
            .and_then(|s| s.trim_start_matches(['-', 'v']).parse().ok())
            .map(Self::room)
            .ok_or_else(|| PeerlabError::InvalidConfig(format!("unknown environment {name:?}")))
    }

    pub fn build(&self, gamma: f64) -> Result<Box<dyn Environment>> {
        Ok(match *self {
            EnvConfig::Room { size, max_steps } => match max_steps {
                Some(m) => Box::new(RoomEnv::with_max_steps(size, gamma, m)?),
                None => Box::new(RoomEnv::new(size, gamma)?),
            },
            EnvConfig::PointGoal {
                max_speed,
                max_steps,
            } => Box::new(PointGoalEnv::new(max_speed, max_steps, gamma)?),
        })
    }

    pub fn is_room(&self) -> bool {
        matches!(self, EnvConfig::Room { .. })
    }
}

/// ε decays linearly from `start` to `end` over the first `fraction` of training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplorationConfig {
    pub start: f64,
    pub end: f64,
    pub fraction: f64,
}

impl Default for ExplorationConfig {
    fn default() -> Self {
        Self {
            start: 1.0,
            end: 0.05,
            fraction: 0.2,
        }
    }
}

impl ExplorationConfig {
    pub fn schedule(&self, total_steps: usize) -> EpsilonSchedule {
        EpsilonSchedule {
            start: self.start,
            end: self.end,
            decay_steps: (total_steps as f64 * self.fraction).round() as usize,
        }
    }
}

/// Small random Q-table initialisation used by experiment defaults. With an
/// all-zero table every untrained learner gives identical advice.
pub const EXPERIMENT_INIT_SCALE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub env: EnvConfig,
    pub gamma: f64,
    /// One entry per group member.
    pub agents: Vec<AgentKind>,
    pub learner: LearnerConfig,
    pub selection: SelectionRule,
    pub temperature: TemperatureSchedule,
    /// Trust learning rate.
    pub alpha: f64,
    pub exploration: ExplorationConfig,
    /// Environment steps per acting agent.
    pub total_steps: usize,
    pub eval_interval: usize,
    pub eval_episodes: usize,
    pub seeds: Vec<u64>,
    pub buffer_capacity: usize,
    /// Defaults to the learner's batch size.
    pub batch_size: Option<usize>,
    pub learning_starts: usize,
    pub train_freq: usize,
    pub trust_from_replay: bool,
    /// Parameters for `expert_frozen` members.
    pub expert_checkpoint: Option<PathBuf>,
    /// Write every learner's final parameters next to the CSVs.
    pub save_checkpoints: bool,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "peer".into(),
            env: EnvConfig::room(11),
            gamma: 0.95,
            agents: vec![AgentKind::Learner; 4],
            learner: LearnerConfig::Tabular(TabularQConfig {
                init_scale: EXPERIMENT_INIT_SCALE,
                ..Default::default()
            }),
            selection: SelectionRule::Peer(MechanismSet::all(true)),
            temperature: TemperatureSchedule::default(),
            alpha: 0.99,
            exploration: ExplorationConfig::default(),
            total_steps: 200_000,
            eval_interval: 2_000,
            eval_episodes: 20,
            seeds: (1..=10).collect(),
            buffer_capacity: 50_000,
            batch_size: None,
            learning_starts: 1,
            train_freq: 1,
            trust_from_replay: false,
            expert_checkpoint: None,
            save_checkpoints: false,
            output_dir: PathBuf::from("results"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| PeerlabError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            PeerlabError::InvalidConfig(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Sets the group to `n` plain learners.
    pub fn with_learners(mut self, n: usize) -> Self {
        self.agents = vec![AgentKind::Learner; n];
        self
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size.unwrap_or_else(|| self.learner.batch_size())
    }

    pub fn group_settings(&self) -> GroupSettings {
        GroupSettings {
            selection: self.selection,
            temperature: self.temperature,
            alpha: self.alpha,
            gamma: self.gamma,
            buffer_capacity: self.buffer_capacity,
            batch_size: self.batch_size(),
            learning_starts: self.learning_starts,
            train_freq: self.train_freq,
            trust_from_replay: self.trust_from_replay,
        }
    }

    pub fn epsilon(&self) -> EpsilonSchedule {
        self.exploration.schedule(self.total_steps)
    }

    pub fn learner_count(&self) -> usize {
        self.agents.iter().filter(|k| k.trains()).count()
    }

    /// Number of evaluation checkpoints in a run.
    pub fn checkpoints(&self) -> usize {
        self.total_steps / self.eval_interval
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(PeerlabError::InvalidConfig(msg));
        if self.name.is_empty() || self.name.contains(['/', '\\']) || self.name.starts_with('.') {
            return bad(format!(
                "config name {:?} is not a valid directory name",
                self.name
            ));
        }
        if let EnvConfig::Room { size, max_steps } = self.env {
            RoomGeometry::new(size)?;
            if max_steps == Some(0) {
                return bad("room max_steps must be >= 1".into());
            }
        }
        if self.agents.is_empty() {
            return bad("at least one agent required".into());
        }
        if self.learner_count() == 0 {
            return bad("at least one agent must be a learner".into());
        }
        if !self.env.is_room() && self.agents.iter().any(|k| k.needs_room()) {
            return bad("adversarial and oracle_expert agents need a room environment".into());
        }
        if self.agents.contains(&AgentKind::ExpertFrozen) && self.expert_checkpoint.is_none() {
            return bad("expert_frozen agents need expert_checkpoint".into());
        }
        if self.total_steps == 0 || self.eval_interval == 0 || self.eval_episodes == 0 {
            return bad("total_steps, eval_interval and eval_episodes must be >= 1".into());
        }
        if self.eval_interval > self.total_steps {
            return bad("eval_interval exceeds total_steps; no checkpoint would be taken".into());
        }
        if self.seeds.is_empty() {
            return bad("at least one seed required".into());
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.seeds.len() {
            return bad("duplicate seeds".into());
        }
        let continuous = !self.env.is_room();
        match (&self.learner, continuous) {
            (LearnerConfig::ActorCritic(_), false) => {
                return bad("actor_critic needs a continuous environment".into())
            }
            (LearnerConfig::Tabular(_) | LearnerConfig::Neural(_), true) => {
                return bad("tabular and neural learners need a discrete environment".into())
            }
            _ => {}
        }
        self.exploration.schedule(self.total_steps).validate()?;
        if !(0.0..=1.0).contains(&self.exploration.fraction) {
            return bad("exploration fraction outside [0, 1]".into());
        }
        self.group_settings().validate()
    }
}
