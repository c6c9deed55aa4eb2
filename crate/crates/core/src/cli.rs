//! Command-line front end. Exit codes: 0 success, 1 configuration error,
//! 2 runtime failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{PeerlabError, Result};
use crate::harness::metrics::format_mean_std;
use crate::harness::output::SummaryRow;
use crate::harness::{presets, run_and_write, EnvConfig, ExperimentConfig};
use crate::learners::LearnerConfig;
use crate::peer::{MechanismSet, SelectionRule};
use crate::plot::plot_curves;

#[derive(Debug, Parser)]
#[command(
    name = "peerlab",
    version,
    about = "Peer learning simulator and experiment harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one configuration over its seeds.
    Run(RunArgs),
    /// Run several configurations and summarize them side by side.
    Compare(CompareArgs),
    /// Mechanism ablation: every combination with and without advantage, single agent, random advice.
    Ablate(RunArgs),
    /// Group-size sweep.
    Groupsize(GroupsizeArgs),
    /// Learner group with and without an adversarial advisor.
    Adversary(RunArgs),
    /// Two learners advised by an expert and a frozen novice.
    Expertstudy(RunArgs),
    /// Render SVG learning curves from a curves.csv file.
    Plot(PlotArgs),
}

#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// Base configuration file (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Environment: room5, room11, room21, pointgoal.
    #[arg(long)]
    pub env: Option<String>,
    /// Single master seed.
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// Seed list, e.g. `1,2,3` or `1-10`.
    #[arg(long)]
    pub seeds: Option<String>,
    /// Environment steps per learner.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Number of learners in the group.
    #[arg(long)]
    pub agents: Option<usize>,
    /// Enabled mechanisms, e.g. ACT, AC, T.
    #[arg(long)]
    pub mechanisms: Option<String>,
    /// Subtract the advisee's own value from trust updates.
    #[arg(long, conflicts_with = "no_advantage")]
    pub advantage: bool,
    /// Plain trust updates without advantage.
    #[arg(long)]
    pub no_advantage: bool,
    /// Training steps between solo evaluations
    #[arg(long)]
    pub eval_interval: Option<usize>,
    /// Greedy episodes per evaluation
    #[arg(long)]
    pub eval_episodes: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub overrides: Overrides,
    /// Write the resolved configs to this directory and exit.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Config files to compare. Without any, compares a peer group with the single agent.
    pub configs: Vec<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct GroupsizeArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Group sizes to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = presets::GROUP_SIZES)]
    pub sizes: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// curves.csv produced by a run.
    pub curves: PathBuf,
    /// Directory for the SVG files; defaults to the CSV's directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let bad = || PeerlabError::InvalidConfig(format!("bad seed list {spec:?}"));
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once(['-', ':']) {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                );
                if b < a {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

impl Overrides {
    /// The base config: file (or defaults) with flags applied on top.
    pub fn resolve(&self, default_out: &str) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig {
                output_dir: PathBuf::from("results").join(default_out),
                ..Default::default()
            },
        };
        self.apply(&mut cfg)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(e) = &self.env {
            cfg.env = EnvConfig::from_name(e)?;
            // keep the learner compatible with the new action space
            let continuous_learner = matches!(cfg.learner, LearnerConfig::ActorCritic(_));
            if cfg.env.is_room() == continuous_learner {
                cfg.learner = if continuous_learner {
                    ExperimentConfig::default().learner
                } else {
                    LearnerConfig::ActorCritic(Default::default())
                };
            }
        }
        if let Some(s) = self.seed {
            cfg.seeds = vec![s];
        }
        if let Some(s) = &self.seeds {
            cfg.seeds = parse_seeds(s)?;
        }
        if let Some(s) = self.steps {
            cfg.total_steps = s;
        }
        if let Some(n) = self.agents {
            *cfg = cfg.clone().with_learners(n);
        }
        if self.mechanisms.is_some() || self.advantage || self.no_advantage {
            let current = match cfg.selection {
                SelectionRule::Peer(m) => m,
                _ => MechanismSet::all(true),
            };
            let advantage = if self.advantage {
                true
            } else if self.no_advantage {
                false
            } else {
                current.advantage
            };
            let mechs = match &self.mechanisms {
                Some(letters) => MechanismSet::parse(letters, advantage)?,
                None => MechanismSet {
                    advantage,
                    ..current
                },
            };
            cfg.selection = SelectionRule::Peer(mechs);
        }
        if let Some(v) = self.eval_interval {
            cfg.eval_interval = v;
        }
        if let Some(v) = self.eval_episodes {
            cfg.eval_episodes = v;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        Ok(())
    }
}

fn print_summary(out: &mut dyn Write, dir: &Path, rows: &[SummaryRow]) -> Result<()> {
    writeln!(
        out,
        "{:<20} {:>10} {:>10} {:>10} {:>6}  {:>8}",
        "config", "mean", "std", "sem", "seeds", "x100"
    )?;
    for r in rows {
        writeln!(
            out,
            "{:<20} {:>10.4} {:>10.4} {:>10.4} {:>6}  {:>8}",
            r.config_name,
            r.mean,
            r.std,
            r.sem,
            r.n_seeds,
            format_mean_std(100.0 * r.mean, 100.0 * r.std)
        )?;
    }
    writeln!(out, "results written to {}", dir.display())?;
    Ok(())
}

fn execute(configs: Vec<ExperimentConfig>, dump: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    if let Some(dir) = dump {
        std::fs::create_dir_all(dir)?;
        for c in &configs {
            let path = dir.join(format!("{}.json", c.name));
            c.save(&path)?;
            writeln!(out, "{}", path.display())?;
        }
        return Ok(());
    }
    let dir = configs
        .first()
        .map(|c| c.output_dir.clone())
        .ok_or_else(|| PeerlabError::InvalidConfig("nothing to run".into()))?;
    let (_, summary) = run_and_write(&configs, &dir)?;
    print_summary(out, &dir, &summary)
}

pub fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Run(a) => {
            let cfg = a.overrides.resolve("run")?;
            execute(vec![cfg], a.dump.as_deref(), out)
        }
        Command::Compare(a) => {
            let configs = if a.configs.is_empty() {
                presets::peer_vs_single(&a.run.overrides.resolve("compare")?)
            } else {
                let mut v = Vec::new();
                for p in &a.configs {
                    let mut c = ExperimentConfig::load(p)?;
                    a.run.overrides.apply(&mut c)?;
                    c.validate()?;
                    v.push(c);
                }
                v
            };
            execute(configs, a.run.dump.as_deref(), out)
        }
        Command::Ablate(a) => {
            let base = a.overrides.resolve("ablate")?;
            execute(presets::ablation(&base), a.dump.as_deref(), out)
        }
        Command::Groupsize(g) => {
            let base = g.run.overrides.resolve("groupsize")?;
            execute(
                presets::group_sizes(&base, &g.sizes),
                g.run.dump.as_deref(),
                out,
            )
        }
        Command::Adversary(a) => {
            let base = a.overrides.resolve("adversary")?;
            execute(presets::adversary(&base), a.dump.as_deref(), out)
        }
        Command::Expertstudy(a) => {
            let base = a.overrides.resolve("expertstudy")?;
            execute(vec![presets::expert_study(&base)], a.dump.as_deref(), out)
        }
        Command::Plot(p) => {
            let dir = p
                .out
                .clone()
                .unwrap_or_else(|| p.curves.parent().map(Path::to_path_buf).unwrap_or_default());
            for path in plot_curves(&p.curves, &dir)? {
                writeln!(out, "{}", path.display())?;
            }
            Ok(())
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match dispatch(cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                1
            } else {
                2
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1,2,5").unwrap(), vec![1, 2, 5]);
        assert_eq!(parse_seeds("1-4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_seeds("7, 1:2").unwrap(), vec![7, 1, 2]);
        assert!(parse_seeds("").is_err());
        assert!(parse_seeds("3-1").is_err());
        assert!(parse_seeds("a").is_err());
    }

    #[test]
    fn overrides_apply() {
        let cli = Cli::try_parse_from([
            "peerlab",
            "run",
            "--env",
            "room5",
            "--seeds",
            "1-3",
            "--steps",
            "100",
            "--agents",
            "2",
            "--mechanisms",
            "CT",
            "--no-advantage",
            "--eval-interval",
            "50",
        ])
        .unwrap();
        let Command::Run(a) = cli.command else {
            panic!()
        };
        let cfg = a.overrides.resolve("run").unwrap();
        assert_eq!(cfg.env, EnvConfig::room(5));
        assert_eq!(cfg.seeds, vec![1, 2, 3]);
        assert_eq!(cfg.agents.len(), 2);
        assert_eq!(
            cfg.selection,
            SelectionRule::Peer(MechanismSet::parse("CT", false).unwrap())
        );
        assert_eq!(cfg.output_dir, PathBuf::from("results/run"));

        let cli = Cli::try_parse_from(["peerlab", "run", "--env", "pointgoal"]).unwrap();
        let Command::Run(a) = cli.command else {
            panic!()
        };
        let cfg = a.overrides.resolve("run").unwrap();
        assert!(matches!(cfg.learner, LearnerConfig::ActorCritic(_)));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with_args(["peerlab", "--help"]), 0);
        assert_eq!(main_with_args(["peerlab", "run", "--bogus"]), 1);
        assert_eq!(
            main_with_args(["peerlab", "run", "--config", "/nonexistent/x.json"]),
            1
        );
        assert_eq!(main_with_args(["peerlab", "run", "--env", "room4"]), 1);
        assert_eq!(
            main_with_args(["peerlab", "plot", "/nonexistent/curves.csv"]),
            2
        );
    }
}
