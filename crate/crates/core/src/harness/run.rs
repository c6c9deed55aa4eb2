//! Training runs: one seed of one configuration.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use super::config::ExperimentConfig;
use super::eval::evaluate_alone;
use super::metrics::{average_reward_over_time, final_quarter_mean, mean};
use super::output::RunWriter;
use crate::envs::Environment;
use crate::error::{PeerlabError, Result};
use crate::learners::checkpoint::Checkpoint;
use crate::learners::{ActMode, LearnerHandle};
use crate::peer::{
    agent_stream, AdvisorBuffer, Mechanism, Member, PeerGroup, SelectionRule, StepReport,
    TrustState,
};
use crate::rng::{RngStream, SeedSpec};
use crate::types::{AgentId, Transition};
use crate::zoo::AgentKind;

/// State of a run at one evaluation checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    /// `(agent, solo return, mean training return in the window)` per learner.
    pub solo: Vec<(AgentId, f64, Option<f64>)>,
    /// Cumulative `count[advisee][advisor]`.
    pub acceptance: Vec<Vec<u64>>,
    /// Stored weights of the stateful mechanisms, `[advisee][advisor]`.
    pub trust: Vec<(Mechanism, Vec<Vec<f64>>)>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config_name: String,
    pub seed: u64,
    pub kinds: Vec<AgentKind>,
    pub learners: Vec<AgentId>,
    pub snapshots: Vec<Snapshot>,
    pub wall_clock: Duration,
}

impl RunResult {
    pub fn steps(&self) -> Vec<usize> {
        self.snapshots.iter().map(|s| s.step).collect()
    }

    /// Solo evaluation curve of one learner.
    pub fn curve(&self, agent: AgentId) -> Result<Vec<f64>> {
        let pos = self
            .learners
            .iter()
            .position(|&a| a == agent)
            .ok_or_else(|| {
                PeerlabError::ContractViolation(format!("agent {agent} is not a learner"))
            })?;
        Ok(self.snapshots.iter().map(|s| s.solo[pos].1).collect())
    }

    pub fn average_reward(&self, agent: AgentId) -> Result<f64> {
        average_reward_over_time(&self.curve(agent)?)
    }

    /// Mean over learners of their average reward over time.
    pub fn score(&self) -> Result<f64> {
        let v = self
            .learners
            .iter()
            .map(|&a| self.average_reward(a))
            .collect::<Result<Vec<_>>>()?;
        Ok(mean(&v))
    }

    /// Mean over learners of the final-quarter mean solo return.
    pub fn final_quarter_score(&self) -> Result<f64> {
        let v = self
            .learners
            .iter()
            .map(|&a| final_quarter_mean(&self.curve(a)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(mean(&v))
    }

    /// Mean over learners of the solo return at each checkpoint.
    pub fn mean_curve(&self) -> Vec<f64> {
        self.snapshots
            .iter()
            .map(|s| mean(&s.solo.iter().map(|x| x.1).collect::<Vec<_>>()))
            .collect()
    }

    pub fn final_acceptance(&self) -> Option<&Vec<Vec<u64>>> {
        self.snapshots.last().map(|s| &s.acceptance)
    }

    /// Acceptance counts gathered between checkpoint `k - 1` and `k`.
    pub fn window_acceptance(&self, k: usize) -> Vec<Vec<u64>> {
        let now = &self.snapshots[k].acceptance;
        if k == 0 {
            return now.clone();
        }
        let before = &self.snapshots[k - 1].acceptance;
        now.iter()
            .zip(before)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect()
    }
}

fn eval_stream(seed: &SeedSpec, agent: AgentId, checkpoint: usize) -> Result<RngStream> {
    seed.child("agent")
        .child(agent)
        .child("eval")
        .child(checkpoint)
        .stream()
}

fn load_expert(cfg: &ExperimentConfig, handle: &mut LearnerHandle) -> Result<()> {
    let path = cfg.expert_checkpoint.as_ref().ok_or_else(|| {
        PeerlabError::InvalidConfig("expert_frozen needs expert_checkpoint".into())
    })?;
    let ckpt = Checkpoint::load(path)?;
    if ckpt.learner != handle.learner().name() {
        return Err(PeerlabError::Checkpoint(format!(
            "checkpoint holds a {} learner, config builds {}",
            ckpt.learner,
            handle.learner().name()
        )));
    }
    handle.load_parameters(&ckpt.tensors)
}

/// Builds the group members of `cfg` for one seed.
pub fn build_members(
    cfg: &ExperimentConfig,
    env: &dyn Environment,
    seed: &SeedSpec,
) -> Result<Vec<Member>> {
    let epsilon = cfg.epsilon();
    cfg.agents
        .iter()
        .enumerate()
        .map(|(i, kind)| {
            let mut rng = agent_stream(seed, i, "init")?;
            let geometry = || {
                env.room_geometry().ok_or_else(|| {
                    PeerlabError::InvalidConfig(format!("{} needs a room", kind.as_str()))
                })
            };
            Ok(match kind {
                AgentKind::Learner => Member::Learner(LearnerHandle::new(cfg.learner.build(
                    env.spec(),
                    epsilon,
                    &mut rng,
                )?)),
                AgentKind::NoviceFrozen => Member::Learner(LearnerHandle::frozen(
                    cfg.learner.build_random_init(env.spec(), &mut rng)?,
                )),
                AgentKind::ExpertFrozen => {
                    let mut h =
                        LearnerHandle::new(cfg.learner.build(env.spec(), epsilon, &mut rng)?);
                    load_expert(cfg, &mut h)?;
                    h.freeze();
                    Member::Learner(h)
                }
                AgentKind::Adversarial => Member::Adversary(geometry()?),
                AgentKind::OracleExpert => Member::Oracle(geometry()?),
            })
        })
        .collect()
}

fn trust_snapshot(
    selection: &SelectionRule,
    trust: &TrustState,
) -> Vec<(Mechanism, Vec<Vec<f64>>)> {
    let SelectionRule::Peer(mechs) = selection else {
        return Vec::new();
    };
    let n = trust.len();
    [Mechanism::Agent, Mechanism::Trust]
        .into_iter()
        .filter(|m| mechs.enabled(*m))
        .map(|m| {
            let table = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| trust.stored_weight(m, i, j).expect("stateful"))
                        .collect()
                })
                .collect();
            (m, table)
        })
        .collect()
}

/// Directory holding the per-run CSVs of one seed.
pub fn run_dir(out: &Path, config_name: &str, seed: u64) -> PathBuf {
    out.join("runs")
        .join(config_name)
        .join(format!("seed_{seed}"))
}

fn window_mean(returns: Vec<f64>) -> Option<f64> {
    if returns.is_empty() {
        None
    } else {
        Some(mean(&returns))
    }
}

/// Trains the configured group for one seed, evaluating every learner alone
/// at each checkpoint. With `out` set, per-run CSVs are appended as the run
/// progresses.
pub fn run_experiment(cfg: &ExperimentConfig, seed: u64, out: Option<&Path>) -> Result<RunResult> {
    run_inner(cfg, seed, out, None)
}

/// [`run_experiment`] that hands every round's step reports to `observer`.
pub fn run_experiment_observed(
    cfg: &ExperimentConfig,
    seed: u64,
    out: Option<&Path>,
    observer: &mut Observer,
) -> Result<RunResult> {
    run_inner(cfg, seed, out, Some(observer))
}

/// Callback receiving every round of a run.
pub type Observer<'a> = dyn FnMut(&[StepReport]) -> Result<()> + 'a;

fn run_inner(
    cfg: &ExperimentConfig,
    seed: u64,
    out: Option<&Path>,
    mut observer: Option<&mut Observer>,
) -> Result<RunResult> {
    cfg.validate()?;
    let started = Instant::now();
    let spec = SeedSpec::new(seed);
    let env = cfg.env.build(cfg.gamma)?;
    let members = build_members(cfg, env.as_ref(), &spec)?;
    let mut group = PeerGroup::new(members, env.as_ref(), cfg.group_settings(), &spec)?;
    let learners = group.learner_ids();
    let mut writer = match out {
        Some(dir) => Some(RunWriter::create(&run_dir(dir, &cfg.name, seed))?),
        None => None,
    };

    let mut snapshots = Vec::with_capacity(cfg.checkpoints());
    for t in 1..=cfg.total_steps {
        match observer.as_mut() {
            Some(f) => f(&group.round()?)?,
            None => group.advance()?,
        }
        if t % cfg.eval_interval != 0 {
            continue;
        }
        let k = t / cfg.eval_interval;
        let mut solo = Vec::with_capacity(learners.len());
        for &i in &learners {
            let handle = group.members()[i].learner().expect("learners have handles");
            let r = evaluate_alone(
                handle,
                env.as_ref(),
                cfg.eval_episodes,
                &mut eval_stream(&spec, i, k)?,
            )?;
            solo.push((i, r, window_mean(group.drain_episode_returns(i))));
        }
        let snap = Snapshot {
            step: t,
            solo,
            acceptance: group.acceptance().to_vec(),
            trust: trust_snapshot(&cfg.selection, group.trust()),
        };
        if let Some(w) = writer.as_mut() {
            w.write(&cfg.name, seed, &snap)?;
        }
        snapshots.push(snap);
    }

    if let (true, Some(w)) = (cfg.save_checkpoints, writer.as_ref()) {
        for &i in &learners {
            let h = group.members()[i].learner().expect("learners have handles");
            Checkpoint {
                learner: h.learner().name().to_owned(),
                tensors: h.parameters(),
            }
            .save(&w.dir().join(format!("agent_{i}.ckpt")))?;
        }
    }

    Ok(RunResult {
        config_name: cfg.name.clone(),
        seed,
        kinds: cfg.agents.clone(),
        learners,
        snapshots,
        wall_clock: started.elapsed(),
    })
}

/// A lone off-policy learner with no group machinery at all: act, store,
/// replay. Uses agent 0's streams, so it matches a one-member group run.
pub fn run_single_agent(cfg: &ExperimentConfig, seed: u64) -> Result<RunResult> {
    cfg.validate()?;
    let started = Instant::now();
    let spec = SeedSpec::new(seed);
    let env_template = cfg.env.build(cfg.gamma)?;
    let mut learner = LearnerHandle::new(cfg.learner.build(
        env_template.spec(),
        cfg.epsilon(),
        &mut agent_stream(&spec, 0, "init")?,
    )?);
    let mut env = env_template.fresh_copy();
    let mut env_rng = agent_stream(&spec, 0, "env")?;
    let mut explore_rng = agent_stream(&spec, 0, "explore")?;
    let mut buffer_rng = agent_stream(&spec, 0, "buffer")?;
    let mut buffer = AdvisorBuffer::new(cfg.buffer_capacity, 1)?;
    let batch = cfg.batch_size();

    let mut obs = env.reset(&mut env_rng);
    let mut episode_return = 0.0;
    let mut finished = Vec::new();
    let mut snapshots = Vec::new();
    for t in 1..=cfg.total_steps {
        learner.set_progress(t - 1);
        let action = learner.act(&obs, ActMode::Explore, &mut explore_rng)?;
        let out = env.step(&action)?;
        episode_return += out.reward;
        let next = out.observation.clone();
        buffer.push(Transition::new(
            obs,
            action,
            out.reward,
            out.observation,
            out.terminated,
            0,
        )?)?;
        if t >= cfg.learning_starts && t % cfg.train_freq == 0 {
            let sample = buffer.sample(batch, &mut buffer_rng)?;
            learner.update(&sample)?;
        }
        if out.terminated || out.truncated {
            finished.push(episode_return);
            episode_return = 0.0;
            obs = env.reset(&mut env_rng);
        } else {
            obs = next;
        }
        if t % cfg.eval_interval == 0 {
            let k = t / cfg.eval_interval;
            let r = evaluate_alone(
                &learner,
                env_template.as_ref(),
                cfg.eval_episodes,
                &mut eval_stream(&spec, 0, k)?,
            )?;
            snapshots.push(Snapshot {
                step: t,
                solo: vec![(0, r, window_mean(std::mem::take(&mut finished)))],
                acceptance: vec![vec![t as u64]],
                trust: Vec::new(),
            });
        }
    }
    Ok(RunResult {
        config_name: cfg.name.clone(),
        seed,
        kinds: vec![AgentKind::Learner],
        learners: vec![0],
        snapshots,
        wall_clock: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::EnvConfig;

    fn small(n: usize) -> ExperimentConfig {
        ExperimentConfig {
            env: EnvConfig::room(5),
            total_steps: 3000,
            eval_interval: 500,
            eval_episodes: 5,
            seeds: vec![1],
            ..Default::default()
        }
        .with_learners(n)
    }

    #[test]
    fn acceptance_conserved_and_curves_shaped() {
        let r = run_experiment(&small(3), 4, None).unwrap();
        assert_eq!(r.steps(), vec![500, 1000, 1500, 2000, 2500, 3000]);
        for (k, s) in r.snapshots.iter().enumerate() {
            for i in 0..3 {
                assert_eq!(s.acceptance[i].iter().sum::<u64>(), s.step as u64);
                assert!(r.window_acceptance(k)[i].iter().sum::<u64>() == 500);
            }
            assert_eq!(s.solo.len(), 3);
            assert_eq!(s.trust.len(), 2);
        }
        assert!(r.score().unwrap() >= 0.0);
    }

    #[test]
    fn single_member_group_matches_plain_loop() {
        let cfg = small(1);
        let a = run_experiment(&cfg, 9, None).unwrap();
        let b = run_single_agent(&cfg, 9).unwrap();
        assert_eq!(a.curve(0).unwrap(), b.curve(0).unwrap());
        let ta: Vec<_> = a.snapshots.iter().map(|s| s.solo[0].2).collect();
        let tb: Vec<_> = b.snapshots.iter().map(|s| s.solo[0].2).collect();
        assert_eq!(ta, tb);
    }

    #[test]
    fn oracle_and_novice_members_do_not_act() {
        let mut cfg = small(2);
        cfg.agents.push(AgentKind::OracleExpert);
        cfg.agents.push(AgentKind::NoviceFrozen);
        let r = run_experiment(&cfg, 2, None).unwrap();
        assert_eq!(r.learners, vec![0, 1]);
        let acc = r.final_acceptance().unwrap();
        assert!(acc[2].iter().chain(&acc[3]).all(|&c| c == 0));
    }

    #[test]
    fn expert_checkpoint_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(1);
        cfg.save_checkpoints = true;
        run_experiment(&cfg, 3, Some(dir.path())).unwrap();
        let ckpt = run_dir(dir.path(), "peer", 3).join("agent_0.ckpt");
        assert!(ckpt.exists());

        let mut cfg = small(1);
        cfg.agents.push(AgentKind::ExpertFrozen);
        cfg.expert_checkpoint = Some(ckpt);
        let r = run_experiment(&cfg, 3, None).unwrap();
        assert_eq!(r.learners, vec![0]);

        cfg.expert_checkpoint = Some(dir.path().join("nope.ckpt"));
        assert!(run_experiment(&cfg, 3, None).is_err());
    }
}
