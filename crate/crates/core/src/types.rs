//! Value types shared by environments, learners and the peer machinery.

use serde::{Deserialize, Serialize};

use crate::error::{PeerlabError, Result};

/// Index of an agent inside its peer group.
pub type AgentId = usize;

/// An action in either a discrete or a continuous action space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ActionValue {
    Discrete(usize),
    Continuous(Vec<f64>),
}

impl ActionValue {
    pub fn as_discrete(&self) -> Option<usize> {
        match self {
            ActionValue::Discrete(a) => Some(*a),
            ActionValue::Continuous(_) => None,
        }
    }

    pub fn as_continuous(&self) -> Option<&[f64]> {
        match self {
            ActionValue::Discrete(_) => None,
            ActionValue::Continuous(v) => Some(v),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            ActionValue::Discrete(_) => true,
            ActionValue::Continuous(v) => v.iter().all(|x| x.is_finite()),
        }
    }

    /// Bitwise equality, so that `-0.0` and `0.0` differ and NaN payloads compare.
    pub fn bitwise_eq(&self, other: &ActionValue) -> bool {
        match (self, other) {
            (ActionValue::Discrete(a), ActionValue::Discrete(b)) => a == b,
            (ActionValue::Continuous(a), ActionValue::Continuous(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            _ => false,
        }
    }
}

/// An environment observation. Layout is defined by the environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation(pub Vec<f64>);

impl Observation {
    pub fn new(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|x| x.is_finite()));
        Observation(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

/// Replay tuple extended with the id of the agent whose advice was executed.
///
/// `done` marks true termination (the bootstrap is cut); episodes that end by
/// hitting the step limit are stored with `done == false`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Observation,
    pub action: ActionValue,
    pub reward: f64,
    pub next_state: Observation,
    pub done: bool,
    pub advisor: AgentId,
}

impl Transition {
    pub fn new(
        state: Observation,
        action: ActionValue,
        reward: f64,
        next_state: Observation,
        done: bool,
        advisor: AgentId,
    ) -> Result<Self> {
        if !reward.is_finite() {
            return Err(PeerlabError::ContractViolation(format!(
                "non-finite reward {reward} in transition"
            )));
        }
        if !state.is_finite() || !next_state.is_finite() || !action.is_finite() {
            return Err(PeerlabError::ContractViolation(
                "non-finite component in transition".into(),
            ));
        }
        Ok(Self {
            state,
            action,
            reward,
            next_state,
            done,
            advisor,
        })
    }
}

/// An action proposed by one member of the group.
#[derive(Debug, Clone, PartialEq)]
pub struct Suggestion {
    pub advisor: AgentId,
    pub action: ActionValue,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transition_rejects_nan() {
        let s = Observation::new(vec![0.0; 2]);
        let r = Transition::new(
            s.clone(),
            ActionValue::Discrete(0),
            f64::NAN,
            s.clone(),
            false,
            0,
        );
        assert!(r.is_err());
        let r = Transition::new(
            s.clone(),
            ActionValue::Continuous(vec![f64::INFINITY, 0.0]),
            0.0,
            s,
            false,
            0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn bitwise_eq_distinguishes_signed_zero() {
        let a = ActionValue::Continuous(vec![0.0, 1.0]);
        let b = ActionValue::Continuous(vec![-0.0, 1.0]);
        assert!(!a.bitwise_eq(&b));
        assert!(a.bitwise_eq(&a.clone()));
        assert!(!a.bitwise_eq(&ActionValue::Discrete(0)));
    }
}
