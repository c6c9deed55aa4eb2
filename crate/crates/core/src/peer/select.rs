//! Boltzmann selection over suggestions and its temperature schedule.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PeerlabError, Result};
use crate::rng::RngStream;

/// `tau_m = tau_0 * exp(-lambda * m)`, with `m` counted in epochs of
/// `epoch_steps` environment steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureSchedule {
    pub initial: f64,
    pub decay: f64,
    pub epoch_steps: usize,
}

impl Default for TemperatureSchedule {
    fn default() -> Self {
        Self {
            initial: 1.0,
            decay: 0.05,
            epoch_steps: 1000,
        }
    }
}

impl TemperatureSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial > 0.0 && self.initial.is_finite())
            || !(self.decay >= 0.0)
            || self.epoch_steps == 0
        {
            return Err(PeerlabError::InvalidConfig(format!(
                "temperature schedule needs tau0 > 0, lambda >= 0, epoch > 0; got {self:?}"
            )));
        }
        Ok(())
    }

    /// Temperature at epoch `m`; never reaches zero.
    pub fn temperature(&self, epoch: u64) -> f64 {
        (self.initial * (-self.decay * epoch as f64).exp()).max(f64::MIN_POSITIVE)
    }

    pub fn epoch_of(&self, step: usize) -> u64 {
        (step / self.epoch_steps) as u64
    }

    pub fn at_step(&self, step: usize) -> f64 {
        self.temperature(self.epoch_of(step))
    }
}

/// Softmax of `weights / tau`, computed with max-subtraction.
pub fn boltzmann_probabilities(weights: &[f64], tau: f64) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(PeerlabError::ContractViolation(
            "no weights to select from".into(),
        ));
    }
    if !(tau > 0.0) {
        return Err(PeerlabError::ContractViolation(format!(
            "temperature {tau} must be > 0"
        )));
    }
    if weights.iter().any(|w| w.is_nan()) {
        return Err(PeerlabError::ContractViolation(
            "NaN selection weight".into(),
        ));
    }
    let max = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = weights
        .iter()
        .map(|&w| {
            if w == max {
                1.0
            } else {
                ((w - max) / tau).exp()
            }
        })
        .collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    Ok(probs)
}

/// Draws an index from `probs` with one uniform variate.
pub fn sample_index(probs: &[f64], rng: &mut RngStream) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
        }
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_positive
}

/// Samples one suggestion index by Boltzmann weights. Returns the chosen
/// index and the full probability vector.
pub fn peer_select(weights: &[f64], tau: f64, rng: &mut RngStream) -> Result<(usize, Vec<f64>)> {
    let probs = boltzmann_probabilities(weights, tau)?;
    Ok((sample_index(&probs, rng), probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedSpec;
    use proptest::prelude::*;

    #[test]
    fn temperature_examples() {
        let s = TemperatureSchedule {
            initial: 1.0,
            decay: 0.0,
            epoch_steps: 1000,
        };
        for m in [0, 1, 17, 10_000] {
            assert_eq!(s.temperature(m), 1.0);
        }
        let s = TemperatureSchedule {
            initial: 2.0,
            decay: 0.5,
            epoch_steps: 1000,
        };
        assert_eq!(s.temperature(0), 2.0);
        assert!((s.temperature(2) - 0.735_758_882_342_884_6).abs() < 1e-15);
        assert_eq!(s.epoch_of(2999), 2);
        assert_eq!(s.at_step(2999), s.temperature(2));
        let s = TemperatureSchedule {
            initial: 1.0,
            decay: 1.0,
            epoch_steps: 1,
        };
        assert!(s.temperature(100_000) > 0.0);
    }

    #[test]
    fn selection_examples() {
        let p = boltzmann_probabilities(&[0.0; 4], 1.0).unwrap();
        assert_eq!(p, vec![0.25; 4]);
        let p = boltzmann_probabilities(&[1.0, 1.0 + 2f64.ln()], 1.0).unwrap();
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-15 && (p[1] - 2.0 / 3.0).abs() < 1e-15);
        let p = boltzmann_probabilities(&[0.2, 0.9, 0.5], 1e-3).unwrap();
        assert!(p[1] > 1.0 - 1e-12);
        assert!(boltzmann_probabilities(&[0.0, f64::NAN], 1.0).is_err());
        assert!(boltzmann_probabilities(&[0.0], 0.0).is_err());
        assert!(boltzmann_probabilities(&[], 1.0).is_err());
    }

    #[test]
    fn extreme_weights_do_not_overflow() {
        let p = boltzmann_probabilities(&[1e308, -1e308, 0.0], 1e-300).unwrap();
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn sampling_frequencies_match() {
        let mut rng = SeedSpec::new(4).child("sel").stream().unwrap();
        let w = [0.0, 1.0, 2.0];
        let p = boltzmann_probabilities(&w, 1.0).unwrap();
        let n = 20_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[peer_select(&w, 1.0, &mut rng).unwrap().0] += 1;
        }
        for k in 0..3 {
            let sigma = (n as f64 * p[k] * (1.0 - p[k])).sqrt();
            assert!((counts[k] as f64 - n as f64 * p[k]).abs() < 5.0 * sigma);
        }
    }

    proptest! {
        #[test]
        fn probabilities_sum_to_one_and_are_shift_invariant(
            w in prop::collection::vec(-50.0f64..50.0, 1..10),
            shift in -100.0f64..100.0,
            tau in 0.01f64..10.0,
        ) {
            let p = boltzmann_probabilities(&w, tau).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let shifted: Vec<f64> = w.iter().map(|x| x + shift).collect();
            let q = boltzmann_probabilities(&shifted, tau).unwrap();
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn raising_one_weight_raises_its_probability(
            w in prop::collection::vec(-5.0f64..5.0, 2..8),
            k in 0usize..8,
            bump in 0.01f64..3.0,
        ) {
            let k = k % w.len();
            let p = boltzmann_probabilities(&w, 1.0).unwrap();
            let mut w2 = w.clone();
            w2[k] += bump;
            let q = boltzmann_probabilities(&w2, 1.0).unwrap();
            prop_assert!(q[k] > p[k]);
            for j in 0..w.len() {
                if j != k {
                    prop_assert!(q[j] < p[j]);
                }
            }
        }
    }
}
