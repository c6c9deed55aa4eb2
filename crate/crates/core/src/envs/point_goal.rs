//! Continuous point-mass navigation on the square `[-1, 1]^2`.
//!
//! The agent starts at the origin and steers with a 2-d velocity whose
//! components are clipped to `max_speed`. A goal is drawn uniformly on the
//! square's border; reaching within [`PointGoalEnv::GOAL_RADIUS`] pays `+1`
//! and ends the episode.

use rand::Rng;

use super::{ActionSpace, EnvSpec, Environment, StepOutcome};
use crate::error::{PeerlabError, Result};
use crate::rng::RngStream;
use crate::types::{ActionValue, Observation};

#[derive(Debug, Clone)]
pub struct PointGoalEnv {
    spec: EnvSpec,
    agent: [f64; 2],
    goal: [f64; 2],
    max_speed: f64,
    max_steps: usize,
    step_count: usize,
    done: bool,
}

impl PointGoalEnv {
    pub const GOAL_RADIUS: f64 = 0.05;

    pub fn new(max_speed: f64, max_steps: usize, gamma: f64) -> Result<Self> {
        if !(max_speed > 0.0 && max_speed.is_finite()) {
            return Err(PeerlabError::InvalidConfig(format!(
                "max_speed must be positive, got {max_speed}"
            )));
        }
        if max_steps == 0 {
            return Err(PeerlabError::InvalidConfig("max_steps must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(PeerlabError::InvalidConfig(format!(
                "discount must lie in [0, 1), got {gamma}"
            )));
        }
        Ok(Self {
            spec: EnvSpec {
                name: "pointgoal".into(),
                observation_dim: 4,
                observation_bounds: (-1.0, 1.0),
                observation_levels: None,
                action_space: ActionSpace::Continuous {
                    low: vec![-max_speed; 2],
                    high: vec![max_speed; 2],
                },
                gamma,
                horizon: max_steps,
            },
            agent: [0.0; 2],
            goal: [1.0, 0.0],
            max_speed,
            max_steps,
            step_count: 0,
            done: true,
        })
    }

    pub fn agent(&self) -> [f64; 2] {
        self.agent
    }

    pub fn goal(&self) -> [f64; 2] {
        self.goal
    }

    pub fn set_state(&mut self, agent: [f64; 2], goal: [f64; 2]) -> Observation {
        self.agent = agent.map(|v| v.clamp(-1.0, 1.0));
        self.goal = goal;
        self.step_count = 0;
        self.done = false;
        self.observe()
    }

    fn observe(&self) -> Observation {
        Observation::new(vec![
            self.agent[0],
            self.agent[1],
            self.goal[0],
            self.goal[1],
        ])
    }

    /// Maps a perimeter coordinate `t` in `[0, 8)` to a border point.
    fn border_point(t: f64) -> [f64; 2] {
        let side = ((t / 2.0).floor() as usize).min(3);
        let u = (t - 2.0 * side as f64 - 1.0).clamp(-1.0, 1.0);
        match side {
            0 => [u, -1.0],
            1 => [1.0, u],
            2 => [-u, 1.0],
            _ => [-1.0, -u],
        }
    }
}

impl Environment for PointGoalEnv {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut RngStream) -> Observation {
        self.agent = [0.0, 0.0];
        self.goal = Self::border_point(rng.gen_range(0.0..8.0));
        self.step_count = 0;
        self.done = false;
        self.observe()
    }

    fn step(&mut self, action: &ActionValue) -> Result<StepOutcome> {
        if self.done {
            return Err(PeerlabError::EpisodeDone);
        }
        let v = action.as_continuous().ok_or_else(|| {
            PeerlabError::InvalidAction("point-goal expects a continuous action".into())
        })?;
        if v.len() != 2 {
            return Err(PeerlabError::DimensionMismatch {
                expected: 2,
                actual: v.len(),
            });
        }
        if !v.iter().all(|x| x.is_finite()) {
            return Err(PeerlabError::InvalidAction("non-finite velocity".into()));
        }
        for (pos, &vk) in self.agent.iter_mut().zip(v) {
            let dv = vk.clamp(-self.max_speed, self.max_speed);
            *pos = (*pos + dv).clamp(-1.0, 1.0);
        }
        self.step_count += 1;
        let dist = ((self.agent[0] - self.goal[0]).powi(2)
            + (self.agent[1] - self.goal[1]).powi(2))
        .sqrt();
        let terminated = dist <= Self::GOAL_RADIUS;
        let truncated = !terminated && self.step_count >= self.max_steps;
        self.done = terminated || truncated;
        Ok(StepOutcome {
            observation: self.observe(),
            reward: if terminated { 1.0 } else { 0.0 },
            terminated,
            truncated,
        })
    }

    fn is_done(&self) -> bool {
        self.done
    }

    fn fresh_copy(&self) -> Box<dyn Environment> {
        Box::new(
            PointGoalEnv::new(self.max_speed, self.max_steps, self.spec.gamma)
                .expect("parameters were validated on construction"),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedSpec;

    #[test]
    fn goals_lie_on_border() {
        let mut env = PointGoalEnv::new(0.1, 50, 0.99).unwrap();
        let mut rng = SeedSpec::new(5).child("pg").stream().unwrap();
        let mut sides = [0usize; 4];
        for _ in 0..4000 {
            let obs = env.reset(&mut rng);
            assert_eq!(&obs.as_slice()[..2], &[0.0, 0.0]);
            let [gx, gy] = env.goal();
            let on_border = (gx.abs() - 1.0).abs() < 1e-12 || (gy.abs() - 1.0).abs() < 1e-12;
            assert!(on_border, "goal ({gx}, {gy})");
            let side = if gy == -1.0 {
                0
            } else if gx == 1.0 {
                1
            } else if gy == 1.0 {
                2
            } else {
                3
            };
            sides[side] += 1;
        }
        for s in sides {
            assert!((s as f64 - 1000.0).abs() < 5.0 * (4000.0f64 * 0.25 * 0.75).sqrt());
        }
    }

    #[test]
    fn velocity_is_clipped_and_position_clamped() {
        let mut env = PointGoalEnv::new(0.1, 50, 0.99).unwrap();
        env.set_state([0.95, 0.0], [-1.0, 0.0]);
        let out = env
            .step(&ActionValue::Continuous(vec![5.0, -0.05]))
            .unwrap();
        assert_eq!(env.agent(), [1.0, -0.05]);
        assert!(out
            .observation
            .as_slice()
            .iter()
            .all(|v| (-1.0..=1.0).contains(v)));
        assert!(env.step(&ActionValue::Continuous(vec![0.0])).is_err());
        assert!(env.step(&ActionValue::Discrete(0)).is_err());
    }

    #[test]
    fn reaching_goal_pays_one() {
        let mut env = PointGoalEnv::new(0.1, 50, 0.99).unwrap();
        env.set_state([0.92, 0.0], [1.0, 0.0]);
        let out = env.step(&ActionValue::Continuous(vec![0.05, 0.0])).unwrap();
        assert_eq!(out.reward, 1.0);
        assert!(out.terminated);
        assert!(matches!(
            env.step(&ActionValue::Continuous(vec![0.0, 0.0])),
            Err(PeerlabError::EpisodeDone)
        ));
    }

    #[test]
    fn truncates_at_limit() {
        let mut env = PointGoalEnv::new(0.1, 3, 0.99).unwrap();
        env.set_state([0.0, 0.0], [1.0, 0.0]);
        for k in 1..=3 {
            let out = env.step(&ActionValue::Continuous(vec![0.0, 0.0])).unwrap();
            assert_eq!(out.truncated, k == 3);
        }
    }
}
