use std::collections::VecDeque;

use rand::Rng;

use crate::error::{PeerlabError, Result};
use crate::rng::RngStream;
use crate::types::Transition;

/// FIFO replay memory whose entries remember which advisor's action was
/// executed.
#[derive(Debug, Clone)]
pub struct AdvisorBuffer {
    capacity: usize,
    group_size: usize,
    items: VecDeque<Transition>,
}

impl AdvisorBuffer {
    pub fn new(capacity: usize, group_size: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(PeerlabError::InvalidConfig(
                "buffer capacity must be >= 1".into(),
            ));
        }
        Ok(Self {
            capacity,
            group_size,
            items: VecDeque::with_capacity(capacity.min(1 << 16)),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, transition: Transition) -> Result<()> {
        if transition.advisor >= self.group_size {
            return Err(PeerlabError::ContractViolation(format!(
                "advisor {} outside group of {}",
                transition.advisor, self.group_size
            )));
        }
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(transition);
        Ok(())
    }

    /// Uniform sample with replacement.
    pub fn sample(&self, batch: usize, rng: &mut RngStream) -> Result<Vec<&Transition>> {
        if self.items.is_empty() {
            return Err(PeerlabError::EmptyBuffer);
        }
        Ok((0..batch)
            .map(|_| &self.items[rng.gen_range(0..self.items.len())])
            .collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedSpec;
    use crate::types::{ActionValue, Observation};

    fn tr(reward: f64, advisor: usize) -> Transition {
        Transition::new(
            Observation::new(vec![0.0]),
            ActionValue::Discrete(0),
            reward,
            Observation::new(vec![0.0]),
            false,
            advisor,
        )
        .unwrap()
    }

    #[test]
    fn fifo_eviction() {
        let mut b = AdvisorBuffer::new(2, 1).unwrap();
        for r in [1.0, 2.0, 3.0] {
            b.push(tr(r, 0)).unwrap();
        }
        let rewards: Vec<f64> = b.iter().map(|t| t.reward).collect();
        assert_eq!(rewards, [2.0, 3.0]);
    }

    #[test]
    fn rejects_foreign_advisor_and_empty_sample() {
        let mut b = AdvisorBuffer::new(4, 3).unwrap();
        assert!(b.push(tr(0.0, 3)).is_err());
        let mut rng = SeedSpec::new(1).child("buf").stream().unwrap();
        assert!(matches!(
            b.sample(4, &mut rng),
            Err(PeerlabError::EmptyBuffer)
        ));
        assert!(AdvisorBuffer::new(0, 1).is_err());
    }

    #[test]
    fn uniform_sampling_frequency() {
        let mut b = AdvisorBuffer::new(10, 4).unwrap();
        for k in 0..10 {
            b.push(tr(k as f64, k % 4)).unwrap();
        }
        let mut rng = SeedSpec::new(3).child("buf").stream().unwrap();
        let draws = b.sample(10_000, &mut rng).unwrap();
        let mut counts = [0usize; 10];
        for t in &draws {
            assert!(t.advisor < 4);
            counts[t.reward as usize] += 1;
        }
        let sigma = (10_000.0f64 * 0.1 * 0.9).sqrt();
        for c in counts {
            assert!((c as f64 - 1000.0).abs() < 5.0 * sigma, "{counts:?}");
        }
    }
}
