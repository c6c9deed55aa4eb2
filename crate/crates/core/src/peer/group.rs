//! A peer group: members, their private environment copies, and the
//! round-robin advice loop.

use serde::{Deserialize, Serialize};

use super::buffer::AdvisorBuffer;
use super::select::{peer_select, TemperatureSchedule};
use super::trust::{omega, Mechanism, MechanismSet, TrustState};
use crate::envs::{EnvSpec, Environment, RoomGeometry};
use crate::error::{PeerlabError, Result};
use crate::learners::{ActMode, LearnerHandle};
use crate::rng::{RngStream, SeedSpec};
use crate::types::{ActionValue, AgentId, Observation, Suggestion, Transition};
use crate::zoo::{adversarial_suggest, oracle_suggest, random_advice_select, EarlyAdvisingPolicy};

/// How an advisee picks among the suggestions it receives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SelectionRule {
    /// Boltzmann selection over combined mechanism weights.
    Peer(MechanismSet),
    /// Uniform over all suggestions.
    RandomAdvice,
    /// Uniform over the other members until the budget runs out.
    EarlyAdvising { budget: u64 },
}

impl SelectionRule {
    pub fn label(&self) -> String {
        match self {
            SelectionRule::Peer(m) => m.to_string(),
            SelectionRule::RandomAdvice => "random".into(),
            SelectionRule::EarlyAdvising { .. } => "early".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSettings {
    pub selection: SelectionRule,
    pub temperature: TemperatureSchedule,
    /// Trust learning rate.
    pub alpha: f64,
    pub gamma: f64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    /// Steps an agent takes before its first update.
    pub learning_starts: usize,
    /// One update every `train_freq` agent steps.
    pub train_freq: usize,
    /// Also feed trust with the advisor tags of replayed transitions.
    pub trust_from_replay: bool,
}

impl GroupSettings {
    pub fn validate(&self) -> Result<()> {
        self.temperature.validate()?;
        if let SelectionRule::Peer(m) = &self.selection {
            m.validate()?;
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(PeerlabError::InvalidConfig(format!(
                "alpha {} outside [0, 1]",
                self.alpha
            )));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(PeerlabError::InvalidConfig(format!(
                "gamma {} outside [0, 1)",
                self.gamma
            )));
        }
        if self.buffer_capacity == 0 || self.batch_size == 0 || self.train_freq == 0 {
            return Err(PeerlabError::InvalidConfig(
                "buffer capacity, batch size and train frequency must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

pub enum Member {
    /// A trainable or frozen learner.
    Learner(LearnerHandle),
    /// Poisoner that always points away from the goal.
    Adversary(RoomGeometry),
    /// Shortest-path advisor.
    Oracle(RoomGeometry),
}

impl Member {
    pub fn is_trainable(&self) -> bool {
        matches!(self, Member::Learner(h) if h.is_trainable())
    }

    pub fn learner(&self) -> Option<&LearnerHandle> {
        match self {
            Member::Learner(h) => Some(h),
            _ => None,
        }
    }

    /// Greedy advice for an observation of someone else's environment.
    pub fn advise(&self, obs: &Observation, rng: &mut RngStream) -> Result<ActionValue> {
        match self {
            Member::Learner(h) => h.act(obs, ActMode::Greedy, rng),
            Member::Adversary(g) => Ok(ActionValue::Discrete(adversarial_suggest(g, obs)?.index())),
            Member::Oracle(g) => Ok(ActionValue::Discrete(oracle_suggest(g, obs)?.index())),
        }
    }
}

/// Per-agent state of a member that acts in its own environment.
struct Runtime {
    env: Box<dyn Environment>,
    obs: Observation,
    buffer: AdvisorBuffer,
    env_rng: RngStream,
    explore_rng: RngStream,
    buffer_rng: RngStream,
    select_rng: RngStream,
    steps: usize,
    episode_return: f64,
    finished: Vec<f64>,
    early: EarlyAdvisingPolicy,
}

/// Outcome of one advisee decision.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub advisee: AgentId,
    pub suggestions: Vec<Suggestion>,
    pub chosen: AgentId,
    pub probabilities: Option<Vec<f64>>,
    pub transition: Transition,
    pub episode_end: bool,
}

/// Derives the RNG stream of one agent role. Shared with the single-agent
/// baseline so both consume identical randomness.
pub fn agent_stream(seed: &SeedSpec, agent: AgentId, role: &str) -> Result<RngStream> {
    seed.child("agent").child(agent).child(role).stream()
}

pub struct PeerGroup {
    members: Vec<Member>,
    runtimes: Vec<Option<Runtime>>,
    trust: TrustState,
    settings: GroupSettings,
    acceptance: Vec<Vec<u64>>,
    spec: EnvSpec,
}

impl PeerGroup {
    pub fn new(
        members: Vec<Member>,
        env: &dyn Environment,
        settings: GroupSettings,
        seed: &SeedSpec,
    ) -> Result<Self> {
        settings.validate()?;
        let n = members.len();
        if n == 0 {
            return Err(PeerlabError::InvalidConfig(
                "a group needs at least one member".into(),
            ));
        }
        if !members.iter().any(Member::is_trainable) {
            return Err(PeerlabError::InvalidConfig(
                "a group needs at least one trainable learner".into(),
            ));
        }
        if env.room_geometry().is_none()
            && members
                .iter()
                .any(|m| matches!(m, Member::Adversary(_) | Member::Oracle(_)))
        {
            return Err(PeerlabError::InvalidConfig(
                "adversary and oracle members need the room environment".into(),
            ));
        }
        let mut runtimes = Vec::with_capacity(n);
        for (i, m) in members.iter().enumerate() {
            if !m.is_trainable() {
                runtimes.push(None);
                continue;
            }
            let mut env_copy = env.fresh_copy();
            let mut env_rng = agent_stream(seed, i, "env")?;
            let obs = env_copy.reset(&mut env_rng);
            let budget = match settings.selection {
                SelectionRule::EarlyAdvising { budget } => budget,
                _ => 0,
            };
            runtimes.push(Some(Runtime {
                env: env_copy,
                obs,
                buffer: AdvisorBuffer::new(settings.buffer_capacity, n)?,
                env_rng,
                explore_rng: agent_stream(seed, i, "explore")?,
                buffer_rng: agent_stream(seed, i, "buffer")?,
                select_rng: agent_stream(seed, i, "select")?,
                steps: 0,
                episode_return: 0.0,
                finished: Vec::new(),
                early: EarlyAdvisingPolicy::new(budget),
            }));
        }
        let trust = TrustState::new(n, settings.alpha, &mut seed.child("trust").stream()?)?;
        Ok(Self {
            members,
            runtimes,
            trust,
            settings,
            acceptance: vec![vec![0; n]; n],
            spec: env.spec().clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn settings(&self) -> &GroupSettings {
        &self.settings
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn trust(&self) -> &TrustState {
        &self.trust
    }

    /// `acceptance[i][j]`: how often advisee `i` executed `j`'s suggestion.
    pub fn acceptance(&self) -> &[Vec<u64>] {
        &self.acceptance
    }

    /// Ids of members that act and train.
    pub fn learner_ids(&self) -> Vec<AgentId> {
        (0..self.len())
            .filter(|&i| self.runtimes[i].is_some())
            .collect()
    }

    pub fn steps(&self, agent: AgentId) -> usize {
        self.runtimes[agent].as_ref().map_or(0, |r| r.steps)
    }

    pub fn early_advice_taken(&self, agent: AgentId) -> u64 {
        self.runtimes[agent]
            .as_ref()
            .map_or(0, |r| r.early.consumed())
    }

    /// Returns of training episodes finished since the last call.
    pub fn drain_episode_returns(&mut self, agent: AgentId) -> Vec<f64> {
        self.runtimes[agent]
            .as_mut()
            .map(|r| std::mem::take(&mut r.finished))
            .unwrap_or_default()
    }

    /// One suggestion per member, ordered by id. The advisee's own slot is
    /// its exploratory action; every other slot is that member's greedy advice.
    pub fn collect_suggestions(
        &self,
        advisee: AgentId,
        obs: &Observation,
        rng: &mut RngStream,
    ) -> Result<Vec<Suggestion>> {
        self.members
            .iter()
            .enumerate()
            .map(|(j, m)| {
                let action = if j == advisee {
                    let h = m.learner().ok_or_else(|| {
                        PeerlabError::ContractViolation(format!("member {j} cannot be an advisee"))
                    })?;
                    h.act(obs, ActMode::Explore, rng)?
                } else {
                    m.advise(obs, rng)?
                };
                Ok(Suggestion { advisor: j, action })
            })
            .collect()
    }

    /// Raw weight that `advisee` gives `suggestion` under one mechanism.
    pub fn mechanism_weight(
        &self,
        mech: Mechanism,
        advisee: AgentId,
        obs: &Observation,
        suggestion: &Suggestion,
    ) -> Result<f64> {
        match mech {
            Mechanism::Critic => {
                let h = self.members[advisee].learner().ok_or_else(|| {
                    PeerlabError::ContractViolation(format!("member {advisee} has no Q-function"))
                })?;
                h.q_value(obs, &suggestion.action)
            }
            other => self.trust.stored_weight(other, advisee, suggestion.advisor),
        }
    }

    fn select(
        &mut self,
        advisee: AgentId,
        obs: &Observation,
        suggestions: &[Suggestion],
        rt: &mut Runtime,
    ) -> Result<(AgentId, Option<Vec<f64>>)> {
        let n = suggestions.len();
        match self.settings.selection {
            SelectionRule::Peer(mechs) => {
                let mut raw = Vec::with_capacity(3);
                for m in mechs.iter() {
                    let w = suggestions
                        .iter()
                        .map(|s| self.mechanism_weight(m, advisee, obs, s))
                        .collect::<Result<Vec<f64>>>()?;
                    raw.push((m, w));
                }
                let weights = self.trust.combine(advisee, &raw)?;
                let tau = self.settings.temperature.at_step(rt.steps);
                let (k, probs) = peer_select(&weights, tau, &mut rt.select_rng)?;
                Ok((k, Some(probs)))
            }
            SelectionRule::RandomAdvice => Ok((random_advice_select(n, &mut rt.select_rng), None)),
            SelectionRule::EarlyAdvising { .. } => {
                Ok((rt.early.select(advisee, n, &mut rt.select_rng), None))
            }
        }
    }

    /// One decision of `advisee`: gather advice, pick, act, record, learn.
    pub fn peer_step(&mut self, advisee: AgentId) -> Result<StepReport> {
        let mut rt = self
            .runtimes
            .get_mut(advisee)
            .and_then(Option::take)
            .ok_or_else(|| {
                PeerlabError::ContractViolation(format!("member {advisee} does not act"))
            })?;
        let result = self.step_with(advisee, &mut rt);
        self.runtimes[advisee] = Some(rt);
        result
    }

    fn step_with(&mut self, i: AgentId, rt: &mut Runtime) -> Result<StepReport> {
        if let Member::Learner(h) = &mut self.members[i] {
            h.set_progress(rt.steps);
        }
        let obs = rt.obs.clone();
        let suggestions = self.collect_suggestions(i, &obs, &mut rt.explore_rng)?;
        let (chosen, probabilities) = self.select(i, &obs, &suggestions, rt)?;
        let action = suggestions[chosen].action.clone();

        let out = rt.env.step(&action)?;
        rt.episode_return += out.reward;
        let transition = Transition::new(
            obs,
            action,
            out.reward,
            out.observation.clone(),
            out.terminated,
            chosen,
        )?;

        let gamma = self.settings.gamma;
        let mechs = match self.settings.selection {
            SelectionRule::Peer(m) if m.stateful() => Some(m),
            _ => None,
        };
        let Member::Learner(learner) = &mut self.members[i] else {
            unreachable!("only learners have runtimes")
        };
        if let Some(m) = mechs {
            let w = omega(learner, &transition, gamma, m.advantage)?;
            self.trust.apply_omega(&m, i, chosen, w)?;
        }
        rt.buffer.push(transition.clone())?;
        rt.steps += 1;

        if rt.steps >= self.settings.learning_starts
            && rt.steps.is_multiple_of(self.settings.train_freq)
        {
            let batch = rt
                .buffer
                .sample(self.settings.batch_size, &mut rt.buffer_rng)?;
            if let (Some(m), true) = (mechs, self.settings.trust_from_replay) {
                for t in &batch {
                    let w = omega(learner, t, gamma, m.advantage)?;
                    self.trust.apply_omega(&m, i, t.advisor, w)?;
                }
            }
            learner.update(&batch)?;
        }
        self.acceptance[i][chosen] += 1;

        let episode_end = out.done();
        if episode_end {
            rt.finished.push(rt.episode_return);
            rt.episode_return = 0.0;
            rt.obs = rt.env.reset(&mut rt.env_rng);
        } else {
            rt.obs = out.observation;
        }
        Ok(StepReport {
            advisee: i,
            suggestions,
            chosen,
            probabilities,
            transition,
            episode_end,
        })
    }

    /// Every acting member takes one step, in id order.
    pub fn round(&mut self) -> Result<Vec<StepReport>> {
        self.learner_ids()
            .into_iter()
            .map(|i| self.peer_step(i))
            .collect()
    }

    /// Like [`round`](Self::round) without keeping the reports.
    pub fn advance(&mut self) -> Result<()> {
        for i in 0..self.len() {
            if self.runtimes[i].is_some() {
                self.peer_step(i)?;
            }
        }
        Ok(())
    }

    pub fn into_members(self) -> Vec<Member> {
        self.members
    }
}
