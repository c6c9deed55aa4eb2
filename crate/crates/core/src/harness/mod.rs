//! Experiment orchestration: configs, seeded sweeps, solo evaluation,
//! metrics and CSV persistence.

pub mod config;
mod eval;
pub mod metrics;
pub mod output;
pub mod presets;
mod run;
mod sweep;

pub use config::{EnvConfig, ExperimentConfig, ExplorationConfig};
pub use eval::evaluate_alone;
pub use run::{
    build_members, run_dir, run_experiment, run_experiment_observed, run_single_agent, Observer,
    RunResult, Snapshot,
};
pub use sweep::{run_all, run_and_write, summarize, worker_threads, THREADS_VAR};
