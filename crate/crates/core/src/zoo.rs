//! Baseline and attacker agents: the poisoning adversary, frozen novices and
//! experts, the BFS oracle, early advising and random advice.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::envs::{manhattan, optimal_action, RoomAction, RoomGeometry};
use crate::error::Result;
use crate::rng::RngStream;
use crate::types::{AgentId, Observation};

/// Role of a group member, as spelled in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Learner,
    Adversarial,
    NoviceFrozen,
    ExpertFrozen,
    OracleExpert,
}

impl AgentKind {
    pub const ALL: [AgentKind; 5] = [
        AgentKind::Learner,
        AgentKind::Adversarial,
        AgentKind::NoviceFrozen,
        AgentKind::ExpertFrozen,
        AgentKind::OracleExpert,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Learner => "learner",
            AgentKind::Adversarial => "adversarial",
            AgentKind::NoviceFrozen => "novice_frozen",
            AgentKind::ExpertFrozen => "expert_frozen",
            AgentKind::OracleExpert => "oracle_expert",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Only learners act in their own environment and train.
    pub fn trains(self) -> bool {
        self == AgentKind::Learner
    }

    /// Whether this member needs to read Room geometry to advise.
    pub fn needs_room(self) -> bool {
        matches!(self, AgentKind::Adversarial | AgentKind::OracleExpert)
    }
}

/// The move that takes the advisee farthest from its goal. Ties go to the
/// first maximum in `[up, down, left, right]`.
pub fn adversarial_suggest(geometry: &RoomGeometry, obs: &Observation) -> Result<RoomAction> {
    let state = geometry.decode(obs)?;
    let mut best = RoomAction::Up;
    let mut best_dist = 0;
    for (k, a) in RoomAction::ALL.into_iter().enumerate() {
        let d = manhattan(geometry.apply(state.agent, a), state.goal);
        if k == 0 || d > best_dist {
            best = a;
            best_dist = d;
        }
    }
    Ok(best)
}

/// Shortest-path move. On the goal cell itself there is nothing to do, so
/// the oracle proposes `Up`.
pub fn oracle_suggest(geometry: &RoomGeometry, obs: &Observation) -> Result<RoomAction> {
    let state = geometry.decode(obs)?;
    if state.agent == state.goal {
        return Ok(RoomAction::Up);
    }
    optimal_action(&state)
}

/// Takes uniform advice from the other members until `budget` advice steps
/// are spent, then follows only its own suggestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EarlyAdvisingPolicy {
    budget: u64,
    consumed: u64,
}

impl EarlyAdvisingPolicy {
    pub const DEFAULT_BUDGET: u64 = 10_000;

    pub fn new(budget: u64) -> Self {
        Self {
            budget,
            consumed: 0,
        }
    }

    pub fn remaining(&self) -> u64 {
        self.budget - self.consumed
    }

    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn select(&mut self, advisee: AgentId, n: usize, rng: &mut RngStream) -> AgentId {
        if self.remaining() == 0 || n < 2 {
            return advisee;
        }
        self.consumed += 1;
        let k = rng.gen_range(0..n - 1);
        if k >= advisee {
            k + 1
        } else {
            k
        }
    }
}

/// Uniform over all `n` suggestions, self included.
pub fn random_advice_select(n: usize, rng: &mut RngStream) -> AgentId {
    rng.gen_range(0..n)
}
