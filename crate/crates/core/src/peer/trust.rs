//! Trust mechanisms: how much advisee `i` weighs the suggestion of advisor `j`.
//!
//! * **Critic** scores the suggested action with the advisee's own Q-function.
//! * **Trust** keeps a per-(advisee, advisor) recency-weighted average of
//!   the bootstrapped return `omega` obtained after following `j`.
//! * **Agent** keeps one such average per advisor, shared by the whole group.
//!
//! Enabled mechanisms are min-max normalized to `[-1, 1]` per advisee and
//! averaged with equal weight.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PeerlabError, Result};
use crate::learners::LearnerHandle;
use crate::rng::RngStream;
use crate::types::{AgentId, Transition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    Agent,
    Critic,
    Trust,
}

impl Mechanism {
    pub const ALL: [Mechanism; 3] = [Mechanism::Agent, Mechanism::Critic, Mechanism::Trust];

    fn slot(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Mechanism::Agent => "agent",
            Mechanism::Critic => "critic",
            Mechanism::Trust => "trust",
        }
    }
}

/// Enabled mechanisms plus the advantage switch. Written as letters, e.g.
/// `"ACT"` or `"CT"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MechanismSpelling", into = "MechanismSpelling")]
pub struct MechanismSet {
    pub agent: bool,
    pub critic: bool,
    pub trust: bool,
    pub advantage: bool,
}

impl MechanismSet {
    pub fn all(advantage: bool) -> Self {
        Self {
            agent: true,
            critic: true,
            trust: true,
            advantage,
        }
    }

    pub fn parse(letters: &str, advantage: bool) -> Result<Self> {
        let mut set = Self {
            agent: false,
            critic: false,
            trust: false,
            advantage,
        };
        for c in letters.chars() {
            let flag = match c.to_ascii_uppercase() {
                'A' => &mut set.agent,
                'C' => &mut set.critic,
                'T' => &mut set.trust,
                other => {
                    return Err(PeerlabError::InvalidConfig(format!(
                        "unknown mechanism letter {other:?} in {letters:?}"
                    )))
                }
            };
            if *flag {
                return Err(PeerlabError::InvalidConfig(format!(
                    "duplicate mechanism in {letters:?}"
                )));
            }
            *flag = true;
        }
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.agent || self.critic || self.trust) {
            return Err(PeerlabError::InvalidConfig(
                "peer selection needs at least one mechanism".into(),
            ));
        }
        Ok(())
    }

    pub fn enabled(&self, m: Mechanism) -> bool {
        match m {
            Mechanism::Agent => self.agent,
            Mechanism::Critic => self.critic,
            Mechanism::Trust => self.trust,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Mechanism> + '_ {
        Mechanism::ALL.into_iter().filter(|m| self.enabled(*m))
    }

    /// Whether any mechanism keeps state updated from `omega`.
    pub fn stateful(&self) -> bool {
        self.agent || self.trust
    }

    pub fn letters(&self) -> String {
        self.iter()
            .map(|m| match m {
                Mechanism::Agent => 'A',
                Mechanism::Critic => 'C',
                Mechanism::Trust => 'T',
            })
            .collect()
    }

    /// The seven non-empty combinations in table order: ACT, AC, AT, CT, C, A, T.
    pub fn combinations(advantage: bool) -> Vec<MechanismSet> {
        ["ACT", "AC", "AT", "CT", "C", "A", "T"]
            .iter()
            .map(|s| MechanismSet::parse(s, advantage).expect("static spelling"))
            .collect()
    }
}

impl fmt::Display for MechanismSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letters())?;
        if self.advantage {
            write!(f, "+adv")?;
        }
        Ok(())
    }
}

impl FromStr for MechanismSet {
    type Err = PeerlabError;

    /// Accepts `"ACT"` or `"ACT+adv"`.
    fn from_str(s: &str) -> Result<Self> {
        match s.strip_suffix("+adv") {
            Some(letters) => MechanismSet::parse(letters, true),
            None => MechanismSet::parse(s, false),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MechanismSpelling {
    mechanisms: String,
    #[serde(default)]
    advantage: bool,
}

impl TryFrom<MechanismSpelling> for MechanismSet {
    type Error = PeerlabError;

    fn try_from(s: MechanismSpelling) -> Result<Self> {
        MechanismSet::parse(&s.mechanisms, s.advantage)
    }
}

impl From<MechanismSet> for MechanismSpelling {
    fn from(m: MechanismSet) -> Self {
        MechanismSpelling {
            mechanisms: m.letters(),
            advantage: m.advantage,
        }
    }
}

/// Running minimum and maximum of every value observed so far.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunningMinMax {
    pub min: f64,
    pub max: f64,
}

impl Default for RunningMinMax {
    fn default() -> Self {
        Self {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl RunningMinMax {
    pub fn observe(&mut self, value: f64) {
        self.min = self.min.min(value);
        self.max = self.max.max(value);
    }

    /// Maps `value` into `[-1, 1]`; a degenerate range maps to `0`.
    pub fn normalize(&self, value: f64) -> f64 {
        if !(self.max > self.min) {
            return 0.0;
        }
        (2.0 * (value - self.min) / (self.max - self.min) - 1.0).clamp(-1.0, 1.0)
    }
}

/// Folds each mechanism's raw weights into its running range, maps them to
/// `[-1, 1]` and averages across mechanisms.
pub fn combine_weights(weights: &[&[f64]], normalizers: &mut [RunningMinMax]) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(PeerlabError::ContractViolation(
            "no enabled mechanism".into(),
        ));
    }
    if weights.len() != normalizers.len() {
        return Err(PeerlabError::ContractViolation(
            "one normalizer per mechanism required".into(),
        ));
    }
    let n = weights[0].len();
    let mut out = vec![0.0; n];
    for (w, norm) in weights.iter().zip(normalizers.iter_mut()) {
        if w.len() != n {
            return Err(PeerlabError::ContractViolation(
                "mechanism weight lengths differ".into(),
            ));
        }
        for &v in w.iter() {
            if !v.is_finite() {
                return Err(PeerlabError::ContractViolation(format!(
                    "non-finite weight {v}"
                )));
            }
            norm.observe(v);
        }
        for (o, &v) in out.iter_mut().zip(w.iter()) {
            *o += norm.normalize(v) / weights.len() as f64;
        }
    }
    Ok(out)
}

/// Bootstrapped value of following advice:
/// `r + gamma * Q_i(s', pi_i(s'))`, minus `Q_i(s, pi_i(s))` with advantage.
pub fn omega(
    learner: &LearnerHandle,
    transition: &Transition,
    gamma: f64,
    advantage: bool,
) -> Result<f64> {
    let bootstrap = if transition.done {
        0.0
    } else {
        learner.greedy_value(&transition.next_state)?
    };
    let mut w = transition.reward + gamma * bootstrap;
    if advantage {
        w -= learner.greedy_value(&transition.state)?;
    }
    if !w.is_finite() {
        return Err(PeerlabError::ContractViolation(format!(
            "non-finite omega {w}"
        )));
    }
    Ok(w)
}

/// Local trust values, the shared agent values, and per-advisee
/// normalizers for each mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustState {
    n: usize,
    alpha: f64,
    local: Vec<f64>,
    global: Vec<f64>,
    normalizers: Vec<[RunningMinMax; 3]>,
}

impl TrustState {
    /// Trust and agent values start uniform on `[0, 1)`.
    pub fn new(n: usize, alpha: f64, rng: &mut RngStream) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(PeerlabError::InvalidConfig(format!(
                "trust rate {alpha} outside [0, 1]"
            )));
        }
        if n == 0 {
            return Err(PeerlabError::InvalidConfig("empty group".into()));
        }
        let local = (0..n * n).map(|_| rng.gen::<f64>()).collect();
        let global = (0..n).map(|_| rng.gen::<f64>()).collect();
        Ok(Self {
            n,
            alpha,
            local,
            global,
            normalizers: vec![[RunningMinMax::default(); 3]; n],
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn trust(&self, advisee: AgentId, advisor: AgentId) -> f64 {
        self.local[advisee * self.n + advisor]
    }

    pub fn agent_value(&self, advisor: AgentId) -> f64 {
        self.global[advisor]
    }

    pub fn set_trust(&mut self, advisee: AgentId, advisor: AgentId, value: f64) {
        self.local[advisee * self.n + advisor] = value;
    }

    pub fn set_agent_value(&mut self, advisor: AgentId, value: f64) {
        self.global[advisor] = value;
    }

    /// Stored weight of a stateful mechanism. Critic weights are not stored;
    /// asking for them is a contract violation.
    pub fn stored_weight(
        &self,
        mech: Mechanism,
        advisee: AgentId,
        advisor: AgentId,
    ) -> Result<f64> {
        match mech {
            Mechanism::Trust => Ok(self.trust(advisee, advisor)),
            Mechanism::Agent => Ok(self.agent_value(advisor)),
            Mechanism::Critic => Err(PeerlabError::ContractViolation(
                "critic weights are computed from the Q-function, not stored".into(),
            )),
        }
    }

    fn recency(&self, old: f64, omega: f64) -> Result<f64> {
        if !omega.is_finite() {
            return Err(PeerlabError::ContractViolation(format!(
                "non-finite omega {omega}"
            )));
        }
        Ok((1.0 - self.alpha) * old + self.alpha * omega)
    }

    /// `v[i][j] <- (1 - alpha) v[i][j] + alpha * omega`.
    pub fn update_trust(&mut self, advisee: AgentId, advisor: AgentId, omega: f64) -> Result<f64> {
        let v = self.recency(self.trust(advisee, advisor), omega)?;
        self.set_trust(advisee, advisor, v);
        Ok(v)
    }

    /// `v[j] <- (1 - alpha) v[j] + alpha * omega`, shared by every advisee.
    pub fn update_agent(&mut self, advisor: AgentId, omega: f64) -> Result<f64> {
        let v = self.recency(self.agent_value(advisor), omega)?;
        self.set_agent_value(advisor, v);
        Ok(v)
    }

    /// Applies `omega` to every stateful mechanism enabled in `mechs`.
    pub fn apply_omega(
        &mut self,
        mechs: &MechanismSet,
        advisee: AgentId,
        advisor: AgentId,
        omega: f64,
    ) -> Result<()> {
        if mechs.trust {
            self.update_trust(advisee, advisor, omega)?;
        }
        if mechs.agent {
            self.update_agent(advisor, omega)?;
        }
        Ok(())
    }

    pub fn normalizer(&self, advisee: AgentId, mech: Mechanism) -> RunningMinMax {
        self.normalizers[advisee][mech.slot()]
    }

    /// Combines per-mechanism raw weights for `advisee`, updating its running
    /// normalizers.
    pub fn combine(&mut self, advisee: AgentId, raw: &[(Mechanism, Vec<f64>)]) -> Result<Vec<f64>> {
        let weights: Vec<&[f64]> = raw.iter().map(|(_, w)| w.as_slice()).collect();
        let mut norms: Vec<RunningMinMax> = raw
            .iter()
            .map(|(m, _)| self.normalizer(advisee, *m))
            .collect();
        let out = combine_weights(&weights, &mut norms)?;
        for ((m, _), norm) in raw.iter().zip(norms) {
            self.normalizers[advisee][m.slot()] = norm;
        }
        Ok(out)
    }

    pub fn all_finite(&self) -> bool {
        self.local.iter().chain(&self.global).all(|v| v.is_finite())
    }
}
