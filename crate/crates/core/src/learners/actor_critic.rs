//! Minimal deterministic actor-critic (DDPG-style) for continuous actions.
//!
//! The actor outputs `high * tanh(z)`; the critic sees the observation
//! concatenated with the action rescaled to `[-1, 1]`. Both networks have
//! soft-updated targets.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::mlp::{Adam, Mlp};
use super::neural_q::{load_mlp, mlp_tensors};
use super::{check_obs, ActMode, OffPolicyLearner, Tensor};
use crate::envs::{ActionSpace, EnvSpec};
use crate::error::{PeerlabError, Result};
use crate::rng::RngStream;
use crate::types::{ActionValue, Observation, Transition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActorCriticConfig {
    pub hidden: usize,
    pub actor_learning_rate: f64,
    pub critic_learning_rate: f64,
    pub batch_size: usize,
    /// Soft target update rate.
    pub tau: f64,
    /// Exploration noise standard deviation, as a fraction of the action bound.
    pub noise_std: f64,
}

impl Default for ActorCriticConfig {
    fn default() -> Self {
        Self {
            hidden: 64,
            actor_learning_rate: 1e-3,
            critic_learning_rate: 1e-3,
            batch_size: 64,
            tau: 0.005,
            noise_std: 0.3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ActorCriticLite {
    config: ActorCriticConfig,
    spec: EnvSpec,
    high: Vec<f64>,
    actor: Mlp,
    critic: Mlp,
    actor_target: Mlp,
    critic_target: Mlp,
    actor_opt: Adam,
    critic_opt: Adam,
}

impl ActorCriticLite {
    pub fn new(spec: &EnvSpec, config: ActorCriticConfig, rng: &mut RngStream) -> Result<Self> {
        let ActionSpace::Continuous { low, high } = &spec.action_space else {
            return Err(PeerlabError::InvalidConfig(
                "actor-critic needs a continuous action space".into(),
            ));
        };
        if low
            .iter()
            .zip(high)
            .any(|(l, h)| *h <= 0.0 || (l + h).abs() > 1e-12)
        {
            return Err(PeerlabError::InvalidConfig(
                "actor-critic expects symmetric action bounds".into(),
            ));
        }
        if !(0.0..=1.0).contains(&config.tau) || config.hidden == 0 || config.noise_std < 0.0 {
            return Err(PeerlabError::InvalidConfig(format!(
                "bad actor-critic config {config:?}"
            )));
        }
        let act_dim = high.len();
        let obs_dim = spec.observation_dim;
        let actor = Mlp::new(&[obs_dim, config.hidden, config.hidden, act_dim], rng);
        let critic = Mlp::new(&[obs_dim + act_dim, config.hidden, config.hidden, 1], rng);
        Ok(Self {
            actor_opt: Adam::new(config.actor_learning_rate, actor.param_count()),
            critic_opt: Adam::new(config.critic_learning_rate, critic.param_count()),
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
            high: high.clone(),
            spec: spec.clone(),
            config,
        })
    }

    fn act_dim(&self) -> usize {
        self.high.len()
    }

    fn policy(&self, net: &Mlp, obs: &[f64]) -> Vec<f64> {
        net.forward(obs)
            .into_iter()
            .zip(&self.high)
            .map(|(z, h)| h * z.tanh())
            .collect()
    }

    fn critic_input(&self, obs: &[f64], action: &[f64], out: &mut Vec<f64>) {
        out.extend_from_slice(obs);
        out.extend(action.iter().zip(&self.high).map(|(a, h)| a / h));
    }

    fn evaluate(&self, net: &Mlp, obs: &[f64], action: &[f64]) -> f64 {
        let mut input = Vec::with_capacity(obs.len() + action.len());
        self.critic_input(obs, action, &mut input);
        net.forward(&input)[0]
    }

    fn clip(&self, action: &mut [f64]) {
        for (a, h) in action.iter_mut().zip(&self.high) {
            *a = a.clamp(-h, *h);
        }
    }

    fn continuous<'a>(&self, action: &'a ActionValue) -> Result<&'a [f64]> {
        let a = action.as_continuous().ok_or_else(|| {
            PeerlabError::InvalidAction("actor-critic expects a continuous action".into())
        })?;
        if a.len() != self.act_dim() {
            return Err(PeerlabError::DimensionMismatch {
                expected: self.act_dim(),
                actual: a.len(),
            });
        }
        Ok(a)
    }

    fn all_finite(&self) -> bool {
        self.actor.all_finite() && self.critic.all_finite()
    }
}

impl OffPolicyLearner for ActorCriticLite {
    fn name(&self) -> &'static str {
        "actor_critic"
    }

    fn act(&self, obs: &Observation, mode: ActMode, rng: &mut RngStream) -> Result<ActionValue> {
        check_obs(&self.spec, obs)?;
        let mut a = self.policy(&self.actor, obs.as_slice());
        if mode == ActMode::Explore && self.config.noise_std > 0.0 {
            let normal = Normal::new(0.0, self.config.noise_std).expect("std validated");
            for (x, h) in a.iter_mut().zip(&self.high) {
                *x += h * normal.sample(rng);
            }
        }
        self.clip(&mut a);
        Ok(ActionValue::Continuous(a))
    }

    fn q_value(&self, obs: &Observation, action: &ActionValue) -> Result<f64> {
        check_obs(&self.spec, obs)?;
        let a = self.continuous(action)?;
        Ok(self.evaluate(&self.critic, obs.as_slice(), a))
    }

    fn greedy_value(&self, obs: &Observation) -> Result<f64> {
        check_obs(&self.spec, obs)?;
        let a = self.policy(&self.actor, obs.as_slice());
        Ok(self.evaluate(&self.critic, obs.as_slice(), &a))
    }

    fn update(&mut self, batch: &[&Transition]) -> Result<f64> {
        let n = batch.len();
        let obs_dim = self.spec.observation_dim;
        let act_dim = self.act_dim();
        let in_dim = obs_dim + act_dim;
        let scale = 1.0 / n as f64;

        // Critic step.
        let mut critic_in = Vec::with_capacity(n * in_dim);
        let mut states = Vec::with_capacity(n * obs_dim);
        let mut next_states = Vec::with_capacity(n * obs_dim);
        for t in batch {
            check_obs(&self.spec, &t.state)?;
            check_obs(&self.spec, &t.next_state)?;
            let a = self.continuous(&t.action)?;
            self.critic_input(t.state.as_slice(), a, &mut critic_in);
            states.extend_from_slice(t.state.as_slice());
            next_states.extend_from_slice(t.next_state.as_slice());
        }
        // bootstrap targets, batched through the target networks
        let z_next = self.actor_target.forward_batch(&next_states, n);
        let mut target_in = Vec::with_capacity(n * in_dim);
        for b in 0..n {
            target_in.extend_from_slice(&next_states[b * obs_dim..(b + 1) * obs_dim]);
            let a_next: Vec<f64> = z_next.output()[b * act_dim..(b + 1) * act_dim]
                .iter()
                .zip(&self.high)
                .map(|(z, h)| h * z.tanh())
                .collect();
            target_in.extend(a_next.iter().zip(&self.high).map(|(a, h)| a / h));
        }
        let q_next = self.critic_target.forward_batch(&target_in, n);
        let targets: Vec<f64> = batch
            .iter()
            .zip(q_next.output())
            .map(|(t, q)| {
                if t.done {
                    t.reward
                } else {
                    t.reward + self.spec.gamma * q
                }
            })
            .collect();
        let cache = self.critic.forward_batch(&critic_in, n);
        let q = cache.output();
        let mut loss = 0.0;
        let grad: Vec<f64> = q
            .iter()
            .zip(&targets)
            .map(|(q, y)| {
                let e = q - y;
                loss += e * e * scale;
                2.0 * e * scale
            })
            .collect();
        let (critic_grads, _) = self.critic.backward(&cache, &grad);
        self.critic_opt.step(&mut self.critic, &critic_grads);

        // Actor step: ascend Q(s, mu(s)).
        let actor_cache = self.actor.forward_batch(&states, n);
        let z = actor_cache.output();
        let tanh: Vec<f64> = z.iter().map(|v| v.tanh()).collect();
        let mut policy_in = Vec::with_capacity(n * in_dim);
        for b in 0..n {
            policy_in.extend_from_slice(&states[b * obs_dim..(b + 1) * obs_dim]);
            policy_in.extend_from_slice(&tanh[b * act_dim..(b + 1) * act_dim]);
        }
        let q_cache = self.critic.forward_batch(&policy_in, n);
        let (_, d_input) = self.critic.backward(&q_cache, &vec![-scale; n]);
        let mut d_z = vec![0.0; n * act_dim];
        for b in 0..n {
            for k in 0..act_dim {
                // critic sees a / high = tanh(z)
                let g = d_input[b * in_dim + obs_dim + k];
                let t = tanh[b * act_dim + k];
                d_z[b * act_dim + k] = g * (1.0 - t * t);
            }
        }
        let (actor_grads, _) = self.actor.backward(&actor_cache, &d_z);
        self.actor_opt.step(&mut self.actor, &actor_grads);

        self.actor_target
            .soft_update_from(&self.actor, self.config.tau);
        self.critic_target
            .soft_update_from(&self.critic, self.config.tau);

        if !self.all_finite() || !loss.is_finite() {
            return Err(PeerlabError::ContractViolation(
                "actor-critic parameters diverged to non-finite values".into(),
            ));
        }
        Ok(loss)
    }

    fn set_progress(&mut self, _step: usize) {}

    fn parameters(&self) -> Vec<Tensor> {
        [
            ("actor", &self.actor),
            ("critic", &self.critic),
            ("actor_target", &self.actor_target),
            ("critic_target", &self.critic_target),
        ]
        .into_iter()
        .flat_map(|(name, net)| mlp_tensors(name, net))
        .collect()
    }

    fn load_parameters(&mut self, tensors: &[Tensor]) -> Result<()> {
        let na = self.actor.layers.len() * 2;
        let nc = self.critic.layers.len() * 2;
        if tensors.len() != 2 * (na + nc) {
            return Err(PeerlabError::Checkpoint(format!(
                "actor-critic expects {} tensors, got {}",
                2 * (na + nc),
                tensors.len()
            )));
        }
        let (a, rest) = tensors.split_at(na);
        let (c, rest) = rest.split_at(nc);
        let (at, ct) = rest.split_at(na);
        load_mlp(&mut self.actor, a)?;
        load_mlp(&mut self.critic, c)?;
        load_mlp(&mut self.actor_target, at)?;
        load_mlp(&mut self.critic_target, ct)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{Environment, PointGoalEnv};
    use crate::rng::SeedSpec;

    fn rng(tag: &str) -> RngStream {
        SeedSpec::new(8).child(tag).stream().unwrap()
    }

    fn learner() -> (PointGoalEnv, ActorCriticLite) {
        let env = PointGoalEnv::new(0.1, 50, 0.95).unwrap();
        let ac = ActorCriticLite::new(
            env.spec(),
            ActorCriticConfig {
                hidden: 16,
                ..Default::default()
            },
            &mut rng("init"),
        )
        .unwrap();
        (env, ac)
    }

    #[test]
    fn actions_stay_within_bounds() {
        let (mut env, ac) = learner();
        let mut r = rng("act");
        for _ in 0..200 {
            let obs = env.reset(&mut r);
            for mode in [ActMode::Greedy, ActMode::Explore] {
                let a = ac.act(&obs, mode, &mut r).unwrap();
                assert!(env.spec().action_space.contains(&a), "{a:?}");
            }
        }
    }

    #[test]
    fn greedy_is_deterministic() {
        let (mut env, ac) = learner();
        let obs = env.reset(&mut rng("r"));
        let a = ac.act(&obs, ActMode::Greedy, &mut rng("x")).unwrap();
        let b = ac.act(&obs, ActMode::Greedy, &mut rng("y")).unwrap();
        assert!(a.bitwise_eq(&b));
    }

    #[test]
    fn critic_fits_terminal_reward_and_actor_improves() {
        let (mut env, mut ac) = learner();
        // Reward depends on the action: the critic must learn it and the actor
        // must move towards the rewarded direction.
        let obs = env.set_state([0.0, 0.0], [1.0, 0.0]);
        let mut batch = Vec::new();
        for k in 0..9 {
            let vx = -0.1 + 0.025 * k as f64;
            let reward = vx * 10.0;
            batch.push(
                Transition::new(
                    obs.clone(),
                    ActionValue::Continuous(vec![vx, 0.0]),
                    reward,
                    obs.clone(),
                    true,
                    0,
                )
                .unwrap(),
            );
        }
        let refs: Vec<&Transition> = batch.iter().collect();
        let before = ac
            .act(&obs, ActMode::Greedy, &mut rng("g"))
            .unwrap()
            .as_continuous()
            .unwrap()[0];
        let mut loss = f64::INFINITY;
        for _ in 0..1500 {
            loss = ac.update(&refs).unwrap();
        }
        let after = ac
            .act(&obs, ActMode::Greedy, &mut rng("g"))
            .unwrap()
            .as_continuous()
            .unwrap()[0];
        assert!(loss < 0.05, "critic loss {loss}");
        assert!(
            after > before && after > 0.08,
            "actor x-velocity {before} -> {after}"
        );
    }

    #[test]
    fn checkpoint_roundtrip() {
        let (_, a) = learner();
        let env = PointGoalEnv::new(0.1, 50, 0.95).unwrap();
        let mut b = ActorCriticLite::new(
            env.spec(),
            ActorCriticConfig {
                hidden: 16,
                ..Default::default()
            },
            &mut rng("other"),
        )
        .unwrap();
        assert_ne!(a.parameters(), b.parameters());
        b.load_parameters(&a.parameters()).unwrap();
        assert_eq!(a.parameters(), b.parameters());
    }

    #[test]
    fn rejects_discrete_space() {
        let env = crate::envs::RoomEnv::new(5, 0.9).unwrap();
        assert!(
            ActorCriticLite::new(env.spec(), ActorCriticConfig::default(), &mut rng("x")).is_err()
        );
    }
}
