use std::path::Path;
use std::process::{Command, Output};

fn peerlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peerlab"))
        .args(args)
        .current_dir(cwd)
        .env("PEERLAB_THREADS", "1")
        .output()
        .unwrap()
}

const QUICK: [&str; 8] = [
    "--env",
    "room5",
    "--steps",
    "600",
    "--eval-interval",
    "300",
    "--eval-episodes",
    "2",
];

fn quick(cmd: &str, out: &Path, extra: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = vec![cmd.into()];
    v.extend(QUICK.iter().map(|s| s.to_string()));
    v.extend([
        "--seeds".into(),
        "1-2".into(),
        "--out".into(),
        out.display().to_string(),
    ]);
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn run(args: &[String], cwd: &Path) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    peerlab(&refs, cwd)
}

#[test]
fn help_lists_every_command() {
    let dir = tempfile::tempdir().unwrap();
    let o = peerlab(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for c in [
        "run",
        "compare",
        "ablate",
        "groupsize",
        "adversary",
        "expertstudy",
        "plot",
    ] {
        assert!(text.contains(c), "{c} not in help");
    }
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        peerlab(&["run", "--steps"], dir.path()).status.code(),
        Some(1)
    );
    assert_eq!(
        peerlab(&["run", "--env", "room6"], dir.path())
            .status
            .code(),
        Some(1)
    );
    std::fs::write(dir.path().join("bad.json"), r#"{"gamma": 1.5}"#).unwrap();
    assert_eq!(
        peerlab(&["run", "--config", "bad.json"], dir.path())
            .status
            .code(),
        Some(1)
    );
    std::fs::write(dir.path().join("typo.json"), r#"{"gama": 0.9}"#).unwrap();
    assert_eq!(
        peerlab(&["run", "--config", "typo.json"], dir.path())
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("curves.csv"), "not,a,curve\n1,2,3\n").unwrap();
    assert_eq!(
        peerlab(&["plot", "curves.csv"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn run_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res");
    let o = run(&quick("run", &out, &[]), dir.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("peer"));
    for f in [
        "curves.csv",
        "acceptance.csv",
        "trust.csv",
        "summary.csv",
        "configs/peer.json",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let o = peerlab(&["plot", "res/curves.csv", "--out", "figs"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.path().join("figs/solo_return.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("peer"));
}

#[test]
fn dumped_presets_rerun_through_compare() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("adv");
    let mut args = quick("adversary", &out, &["--dump", "cfgs"]);
    let o = run(&args, dir.path());
    assert_eq!(o.status.code(), Some(0));
    let listed = String::from_utf8(o.stdout).unwrap();
    assert_eq!(listed.lines().count(), 5);
    assert!(!out.exists());

    // presets are plain configs: comparing the dumped files reproduces the preset run
    args.truncate(args.len() - 2);
    assert_eq!(run(&args, dir.path()).status.code(), Some(0));
    let names = [
        "peer",
        "peer_adversary",
        "random",
        "random_adversary",
        "single",
    ];
    let mut cmp: Vec<String> = vec!["compare".into()];
    cmp.extend(names.iter().map(|n| format!("cfgs/{n}.json")));
    cmp.extend(["--out".into(), "cmp".into()]);
    assert_eq!(run(&cmp, dir.path()).status.code(), Some(0));
    assert_eq!(
        std::fs::read(out.join("curves.csv")).unwrap(),
        std::fs::read(dir.path().join("cmp/curves.csv")).unwrap()
    );
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}"));
        let args = quick("ablate", &out, &["--agents", "2"]);
        let o = Command::new(env!("CARGO_BIN_EXE_peerlab"))
            .args(&args)
            .current_dir(dir.path())
            .env("PEERLAB_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        outputs.push(std::fs::read(out.join("curves.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
