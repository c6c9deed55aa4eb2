use std::path::Path;

use peerlab::harness::output::{ACCEPTANCE, CURVES, SUMMARY, TRUST};
use peerlab::harness::{
    presets, run_and_write, run_experiment, run_single_agent, EnvConfig, ExperimentConfig,
};
use peerlab::zoo::AgentKind;

fn tiny() -> ExperimentConfig {
    ExperimentConfig {
        name: "tiny".into(),
        env: EnvConfig::room(5),
        total_steps: 1_500,
        eval_interval: 500,
        eval_episodes: 3,
        seeds: vec![3, 4],
        ..Default::default()
    }
    .with_learners(3)
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                files.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn reruns_write_identical_bytes() {
    let mut configs = presets::adversary(&tiny());
    configs.push(presets::expert_study(&tiny()));
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_and_write(&configs, a.path()).unwrap();
    run_and_write(&configs, b.path()).unwrap();
    let fa = read_all(a.path());
    let fb = read_all(b.path());
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    for f in [CURVES, ACCEPTANCE, TRUST, SUMMARY] {
        assert!(names.contains(&f), "{f} missing");
    }
    assert!(names.contains(&"runs/peer_adversary/seed_4/curves.csv"));
    assert_eq!(fa, fb);
}

#[test]
fn seeds_change_results() {
    let cfg = tiny();
    let r3 = run_experiment(&cfg, 3, None).unwrap();
    let r4 = run_experiment(&cfg, 4, None).unwrap();
    assert_ne!(r3.snapshots, r4.snapshots);
    assert_eq!(
        r3.snapshots,
        run_experiment(&cfg, 3, None).unwrap().snapshots
    );
}

#[test]
fn one_member_group_is_the_plain_learner() {
    let cfg = tiny().with_learners(1);
    for seed in [1, 2] {
        let group = run_experiment(&cfg, seed, None).unwrap();
        let plain = run_single_agent(&cfg, seed).unwrap();
        assert_eq!(group.curve(0).unwrap(), plain.curve(0).unwrap());
    }
}

#[test]
fn frozen_members_are_not_scored() {
    let r = run_experiment(&presets::expert_study(&tiny()), 1, None).unwrap();
    assert_eq!(r.learners, [0, 1]);
    assert_eq!(r.kinds[3], AgentKind::NoviceFrozen);
    let acc = r.final_acceptance().unwrap();
    assert_eq!(acc.len(), 4);
    // only learners act, so only their rows count anything
    assert!(acc[2].iter().chain(&acc[3]).all(|&c| c == 0));
    assert_eq!(acc[0].iter().sum::<u64>(), 1_500);
}
