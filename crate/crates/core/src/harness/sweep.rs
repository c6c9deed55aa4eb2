//! Fan-out of (config, seed) runs over a worker pool and the deterministic
//! reduce that follows.

use std::collections::HashSet;
use std::path::Path;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::metrics::{mean, sem, std_dev};
use super::output::{write_aggregate, SummaryRow};
use super::run::{run_experiment, RunResult};
use crate::error::{PeerlabError, Result};

pub const THREADS_VAR: &str = "PEERLAB_THREADS";

/// Worker count: `PEERLAB_THREADS` when set, else the available parallelism.
pub fn worker_threads() -> Result<usize> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(PeerlabError::InvalidConfig(format!(
                "{THREADS_VAR}={v:?} is not a positive integer"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Per-config mean, std and standard error of the run scores. All configs
/// must share one seed list.
pub fn summarize(configs: &[ExperimentConfig], runs: &[RunResult]) -> Result<Vec<SummaryRow>> {
    if let Some(first) = configs.first() {
        if let Some(other) = configs.iter().find(|c| c.seeds != first.seeds) {
            return Err(PeerlabError::InvalidConfig(format!(
                "configs {:?} and {:?} use different seed lists",
                first.name, other.name
            )));
        }
    }
    configs
        .iter()
        .map(|cfg| {
            let scores = runs
                .iter()
                .filter(|r| r.config_name == cfg.name)
                .map(RunResult::score)
                .collect::<Result<Vec<f64>>>()?;
            Ok(SummaryRow {
                config_name: cfg.name.clone(),
                mean: mean(&scores),
                std: std_dev(&scores),
                sem: sem(&scores),
                n_seeds: scores.len(),
            })
        })
        .collect()
}

fn check_names(configs: &[ExperimentConfig]) -> Result<()> {
    let mut seen = HashSet::new();
    for c in configs {
        c.validate()?;
        if !seen.insert(c.name.as_str()) {
            return Err(PeerlabError::InvalidConfig(format!(
                "duplicate config name {:?}",
                c.name
            )));
        }
    }
    Ok(())
}

/// Runs every seed of every config. Results come back ordered by config,
/// then by position in the seed list, regardless of completion order.
pub fn run_all(configs: &[ExperimentConfig], out: Option<&Path>) -> Result<Vec<RunResult>> {
    check_names(configs)?;
    let jobs: Vec<(&ExperimentConfig, u64)> = configs
        .iter()
        .flat_map(|c| c.seeds.iter().map(move |&s| (c, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_threads()?)
        .build()
        .map_err(|e| PeerlabError::ContractViolation(format!("thread pool: {e}")))?;
    pool.install(|| {
        jobs.par_iter()
            .map(|(cfg, seed)| run_experiment(cfg, *seed, out))
            .collect()
    })
}

/// Runs a set of configs, then writes the combined CSVs, `summary.csv` and
/// the resolved configs into `out`.
pub fn run_and_write(
    configs: &[ExperimentConfig],
    out: &Path,
) -> Result<(Vec<RunResult>, Vec<SummaryRow>)> {
    let runs = run_all(configs, Some(out))?;
    let summary = summarize(configs, &runs)?;
    write_aggregate(out, &runs, &summary)?;
    let cfg_dir = out.join("configs");
    std::fs::create_dir_all(&cfg_dir)?;
    for c in configs {
        c.save(&cfg_dir.join(format!("{}.json", c.name)))?;
    }
    Ok((runs, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::EnvConfig;

    fn tiny(name: &str, seeds: Vec<u64>) -> ExperimentConfig {
        ExperimentConfig {
            name: name.into(),
            env: EnvConfig::room(5),
            total_steps: 400,
            eval_interval: 200,
            eval_episodes: 2,
            seeds,
            ..Default::default()
        }
        .with_learners(2)
    }

    #[test]
    fn identical_configs_identical_rows() {
        let a = tiny("a", vec![1, 2]);
        let b = tiny("b", vec![1, 2]);
        let runs = run_all(&[a.clone(), b.clone()], None).unwrap();
        assert_eq!(runs.len(), 4);
        assert_eq!(
            runs.iter()
                .map(|r| (r.config_name.as_str(), r.seed))
                .collect::<Vec<_>>(),
            [("a", 1), ("a", 2), ("b", 1), ("b", 2)]
        );
        let s = summarize(&[a, b], &runs).unwrap();
        assert_eq!(
            (s[0].mean, s[0].std, s[0].sem),
            (s[1].mean, s[1].std, s[1].sem)
        );
        assert_eq!(s[0].n_seeds, 2);
    }

    #[test]
    fn mismatched_seeds_and_names_rejected() {
        let a = tiny("a", vec![1]);
        let b = tiny("b", vec![2]);
        assert!(summarize(&[a.clone(), b], &[])
            .unwrap_err()
            .is_config_error());
        assert!(run_all(&[a.clone(), a], None)
            .unwrap_err()
            .is_config_error());
    }
}
