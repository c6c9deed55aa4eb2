use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{Adam, Gradients, Mlp};
use super::{check_obs, ActMode, EpsilonSchedule, OffPolicyLearner, Tensor};
use crate::envs::{ActionSpace, EnvSpec};
use crate::error::{PeerlabError, Result};
use crate::rng::RngStream;
use crate::types::{ActionValue, Observation, Transition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NeuralQConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Number of updates between hard target-network copies.
    pub target_period: usize,
}

impl Default for NeuralQConfig {
    fn default() -> Self {
        Self {
            hidden: 64,
            learning_rate: 1e-3,
            batch_size: 64,
            target_period: 500,
        }
    }
}

/// DQN-style learner: an MLP `Q(s) -> |A|` trained on mean squared TD error
/// against a periodically copied target network.
#[derive(Debug, Clone)]
pub struct NeuralQ {
    config: NeuralQConfig,
    spec: EnvSpec,
    actions: usize,
    online: Mlp,
    target: Mlp,
    optimizer: Adam,
    exploration: EpsilonSchedule,
    epsilon: f64,
    updates: usize,
}

impl NeuralQ {
    pub fn new(
        spec: &EnvSpec,
        config: NeuralQConfig,
        exploration: EpsilonSchedule,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let ActionSpace::Discrete(actions) = spec.action_space else {
            return Err(PeerlabError::InvalidConfig(
                "neural Q-learning needs a discrete action space".into(),
            ));
        };
        if config.hidden == 0 || config.target_period == 0 {
            return Err(PeerlabError::InvalidConfig(
                "hidden width and target period must be positive".into(),
            ));
        }
        exploration.validate()?;
        let online = Mlp::new(
            &[spec.observation_dim, config.hidden, config.hidden, actions],
            rng,
        );
        let optimizer = Adam::new(config.learning_rate, online.param_count());
        Ok(Self {
            target: online.clone(),
            online,
            optimizer,
            epsilon: exploration.value(0),
            exploration,
            actions,
            spec: spec.clone(),
            config,
            updates: 0,
        })
    }

    pub fn online(&self) -> &Mlp {
        &self.online
    }

    pub fn target(&self) -> &Mlp {
        &self.target
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn flat_params(&self) -> Vec<f64> {
        self.online.flat_params()
    }

    pub fn set_flat_params(&mut self, params: &[f64]) {
        self.online.set_flat_params(params);
    }

    fn q_row(&self, obs: &[f64]) -> Vec<f64> {
        self.online.forward(obs)
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

    fn action_index(&self, action: &ActionValue) -> Result<usize> {
        match action {
            ActionValue::Discrete(a) if *a < self.actions => Ok(*a),
            other => Err(PeerlabError::InvalidAction(format!(
                "{other:?} is not one of {} discrete actions",
                self.actions
            ))),
        }
    }

    /// TD targets from the target network.
    fn targets(&self, batch: &[&Transition]) -> Vec<f64> {
        batch
            .iter()
            .map(|t| {
                if t.done {
                    t.reward
                } else {
                    let next = self.target.forward(t.next_state.as_slice());
                    t.reward + self.spec.gamma * next[Self::argmax(&next)]
                }
            })
            .collect()
    }

    /// Mean squared TD error and its gradient with respect to the online
    /// network's parameters. Targets are held fixed.
    pub fn loss_and_gradient(&self, batch: &[&Transition]) -> Result<(f64, Gradients)> {
        let dim = self.spec.observation_dim;
        let mut input = Vec::with_capacity(batch.len() * dim);
        let mut actions = Vec::with_capacity(batch.len());
        for t in batch {
            check_obs(&self.spec, &t.state)?;
            input.extend_from_slice(t.state.as_slice());
            actions.push(self.action_index(&t.action)?);
        }
        let targets = self.targets(batch);
        let cache = self.online.forward_batch(&input, batch.len());
        let out = cache.output();
        let scale = 1.0 / batch.len() as f64;
        let mut grad = vec![0.0; out.len()];
        let mut loss = 0.0;
        for (b, (&a, &y)) in actions.iter().zip(&targets).enumerate() {
            let err = out[b * self.actions + a] - y;
            loss += err * err * scale;
            grad[b * self.actions + a] = 2.0 * err * scale;
        }
        let (grads, _) = self.online.backward(&cache, &grad);
        Ok((loss, grads))
    }
}

impl OffPolicyLearner for NeuralQ {
    fn name(&self) -> &'static str {
        "neural"
    }

    fn act(&self, obs: &Observation, mode: ActMode, rng: &mut RngStream) -> Result<ActionValue> {
        check_obs(&self.spec, obs)?;
        if mode == ActMode::Explore && rng.gen::<f64>() < self.epsilon {
            return Ok(ActionValue::Discrete(rng.gen_range(0..self.actions)));
        }
        Ok(ActionValue::Discrete(Self::argmax(
            &self.q_row(obs.as_slice()),
        )))
    }

    fn q_value(&self, obs: &Observation, action: &ActionValue) -> Result<f64> {
        check_obs(&self.spec, obs)?;
        let a = self.action_index(action)?;
        Ok(self.q_row(obs.as_slice())[a])
    }

    fn greedy_value(&self, obs: &Observation) -> Result<f64> {
        check_obs(&self.spec, obs)?;
        let row = self.q_row(obs.as_slice());
        Ok(row[Self::argmax(&row)])
    }

    fn update(&mut self, batch: &[&Transition]) -> Result<f64> {
        let (loss, grads) = self.loss_and_gradient(batch)?;
        self.optimizer.step(&mut self.online, &grads);
        self.updates += 1;
        if self.updates.is_multiple_of(self.config.target_period) {
            self.target = self.online.clone();
        }
        if !self.online.all_finite() {
            return Err(PeerlabError::ContractViolation(
                "neural Q parameters diverged to non-finite values".into(),
            ));
        }
        Ok(loss)
    }

    fn set_progress(&mut self, step: usize) {
        self.epsilon = self.exploration.value(step);
    }

    fn parameters(&self) -> Vec<Tensor> {
        mlp_tensors("online", &self.online)
            .into_iter()
            .chain(mlp_tensors("target", &self.target))
            .collect()
    }

    fn load_parameters(&mut self, tensors: &[Tensor]) -> Result<()> {
        let n = self.online.layers.len() * 2;
        if tensors.len() != 2 * n {
            return Err(PeerlabError::Checkpoint(format!(
                "neural learner expects {} tensors, got {}",
                2 * n,
                tensors.len()
            )));
        }
        load_mlp(&mut self.online, &tensors[..n])?;
        load_mlp(&mut self.target, &tensors[n..])?;
        Ok(())
    }
}

pub(crate) fn mlp_tensors(prefix: &str, net: &Mlp) -> Vec<Tensor> {
    let mut out = Vec::new();
    for (i, l) in net.layers.iter().enumerate() {
        out.push(Tensor::new(
            format!("{prefix}.{i}.w"),
            vec![l.inputs, l.outputs],
            l.weights.clone(),
        ));
        out.push(Tensor::new(
            format!("{prefix}.{i}.b"),
            vec![l.outputs],
            l.bias.clone(),
        ));
    }
    out
}

pub(crate) fn load_mlp(net: &mut Mlp, tensors: &[Tensor]) -> Result<()> {
    if tensors.len() != net.layers.len() * 2 {
        return Err(PeerlabError::Checkpoint("layer count mismatch".into()));
    }
    for (l, pair) in net.layers.iter_mut().zip(tensors.chunks_exact(2)) {
        let (w, b) = (&pair[0], &pair[1]);
        if w.shape != [l.inputs, l.outputs] || b.shape != [l.outputs] {
            return Err(PeerlabError::Checkpoint(format!(
                "tensor {} has shape {:?}, expected [{}, {}]",
                w.name, w.shape, l.inputs, l.outputs
            )));
        }
        if !w.data.iter().chain(&b.data).all(|v| v.is_finite()) {
            return Err(PeerlabError::Checkpoint(format!(
                "non-finite value in {}",
                w.name
            )));
        }
        l.weights.copy_from_slice(&w.data);
        l.bias.copy_from_slice(&b.data);
    }
    Ok(())
}
