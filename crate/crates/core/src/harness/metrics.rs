//! Summary statistics over learning curves and seeds.

use crate::error::{PeerlabError, Result};

/// Mean of the evaluation returns across checkpoints. With evenly spaced
/// checkpoints this is proportional to the area under the learning curve.
pub fn average_reward_over_time(curve: &[f64]) -> Result<f64> {
    if curve.is_empty() {
        return Err(PeerlabError::ContractViolation(
            "empty evaluation curve".into(),
        ));
    }
    Ok(mean(curve))
}

/// Mean over the last quarter of a curve (at least one point).
pub fn final_quarter_mean(curve: &[f64]) -> Result<f64> {
    if curve.is_empty() {
        return Err(PeerlabError::ContractViolation(
            "empty evaluation curve".into(),
        ));
    }
    let k = curve.len().div_ceil(4);
    Ok(mean(&curve[curve.len() - k..]))
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation; zero for fewer than two values.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Standard error of the mean.
pub fn sem(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    std_dev(values) / (values.len() as f64).sqrt()
}

/// Min-max rescale to `[0, 100]`; all-equal inputs map to 0.
pub fn normalize_0_100(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|v| {
            if hi > lo {
                100.0 * (v - lo) / (hi - lo)
            } else {
                0.0
            }
        })
        .collect()
}

/// `m(s)` with both rounded to integers, as in result tables.
pub fn format_mean_std(mean: f64, std: f64) -> String {
    format!("{:.0}({:.0})", mean, std)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn average_reward_examples() {
        assert_eq!(average_reward_over_time(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(average_reward_over_time(&[0.75; 8]).unwrap(), 0.75);
        assert!(average_reward_over_time(&[]).is_err());
    }

    #[test]
    fn spread_statistics() {
        let v = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert_eq!(mean(&v), 5.0);
        let s = (32.0f64 / 7.0).sqrt();
        assert!((std_dev(&v) - s).abs() < 1e-12);
        assert!((sem(&v) - s / 8f64.sqrt()).abs() < 1e-12);
        assert_eq!(std_dev(&[3.0]), 0.0);
        assert_eq!(format_mean_std(72.4, 8.2), "72(8)");
    }

    #[test]
    fn final_quarter_and_normalization() {
        assert_eq!(
            final_quarter_mean(&[0.0, 0.0, 0.0, 0.0, 1.0, 3.0]).unwrap(),
            2.0
        );
        assert_eq!(final_quarter_mean(&[5.0]).unwrap(), 5.0);
        assert_eq!(normalize_0_100(&[1.0, 2.0, 3.0]), vec![0.0, 50.0, 100.0]);
        assert_eq!(normalize_0_100(&[4.0, 4.0]), vec![0.0, 0.0]);
    }
}
