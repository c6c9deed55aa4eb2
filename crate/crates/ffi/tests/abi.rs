use std::ffi::{CStr, CString};
use std::ptr;

use peerlab::harness::{run_experiment, EnvConfig, ExperimentConfig};
use peerlab_ffi::*;

fn tiny() -> ExperimentConfig {
    ExperimentConfig {
        name: "ffi".into(),
        env: EnvConfig::room(5),
        total_steps: 1_200,
        eval_interval: 400,
        eval_episodes: 3,
        seeds: vec![1],
        ..Default::default()
    }
    .with_learners(3)
}

fn config(cfg: &ExperimentConfig) -> *mut PeerlabConfig {
    let json = CString::new(cfg.to_json()).unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { peerlab_config_from_json(json.as_ptr(), &mut out) };
    assert_eq!(st, PeerlabStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let p = peerlab_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(peerlab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn bad_inputs_give_codes_and_messages() {
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(
            peerlab_config_from_json(ptr::null(), &mut cfg),
            PeerlabStatus::NullPointer
        );
        assert!(last_error().contains("json"));

        let bad = CString::new(vec![b'{', 0xff, b'}']).unwrap();
        assert_eq!(
            peerlab_config_from_json(bad.as_ptr(), &mut cfg),
            PeerlabStatus::InvalidUtf8
        );

        let typo = CString::new(r#"{"gama": 0.9}"#).unwrap();
        assert_eq!(
            peerlab_config_from_json(typo.as_ptr(), &mut cfg),
            PeerlabStatus::InvalidConfig
        );
        assert!(last_error().contains("gama"));
        assert!(cfg.is_null());

        let gamma = CString::new(r#"{"gamma": 1.5}"#).unwrap();
        assert_eq!(
            peerlab_config_from_json(gamma.as_ptr(), &mut cfg),
            PeerlabStatus::InvalidConfig
        );

        let mut x = 0.0;
        assert_eq!(
            peerlab_run_score(ptr::null(), &mut x),
            PeerlabStatus::NullPointer
        );
        assert_eq!(
            peerlab_group_advance(ptr::null_mut(), 1),
            PeerlabStatus::NullPointer
        );

        // freeing null is a no-op
        peerlab_config_free(ptr::null_mut());
        peerlab_run_free(ptr::null_mut());
        peerlab_group_free(ptr::null_mut());
    }
}

#[test]
fn success_clears_the_error() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(
            peerlab_temperature(1.0, 0.05, 0, ptr::null_mut()),
            PeerlabStatus::NullPointer
        );
        assert!(!peerlab_last_error_message().is_null());
        assert_eq!(peerlab_temperature(1.0, 0.05, 0, &mut x), PeerlabStatus::Ok);
    }
    assert!(peerlab_last_error_message().is_null());
}

#[test]
fn temperature_and_boltzmann() {
    let mut t = 0.0;
    unsafe {
        assert_eq!(peerlab_temperature(2.0, 0.1, 10, &mut t), PeerlabStatus::Ok);
    }
    assert!((t - 2.0 * (-1.0f64).exp()).abs() < 1e-12);
    unsafe {
        assert_eq!(
            peerlab_temperature(-1.0, 0.1, 10, &mut t),
            PeerlabStatus::InvalidConfig
        );
    }

    let w = [0.5, -1.0, 0.25];
    let mut p = [0.0; 3];
    unsafe {
        assert_eq!(
            peerlab_boltzmann(w.as_ptr(), 3, 0.5, p.as_mut_ptr()),
            PeerlabStatus::Ok
        );
    }
    let z: f64 = w.iter().map(|x| (x / 0.5).exp()).sum();
    for (pi, wi) in p.iter().zip(w) {
        assert!((pi - (wi / 0.5).exp() / z).abs() < 1e-12);
    }
    unsafe {
        assert_ne!(
            peerlab_boltzmann(w.as_ptr(), 3, 0.0, p.as_mut_ptr()),
            PeerlabStatus::Ok
        );
    }
}

#[test]
fn config_json_uses_the_length_protocol() {
    let cfg = tiny();
    let h = config(&cfg);
    let mut need = 0usize;
    unsafe {
        let st = peerlab_config_to_json(h, ptr::null_mut(), 0, &mut need);
        assert_eq!(st, PeerlabStatus::BufferTooSmall);
        let mut buf = vec![0 as std::ffi::c_char; need];
        assert_eq!(
            peerlab_config_to_json(h, buf.as_mut_ptr(), need, &mut need),
            PeerlabStatus::Ok
        );
        let text = CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
        assert_eq!(ExperimentConfig::from_json(text).unwrap(), cfg);
        peerlab_config_free(h);
    }
}

#[test]
fn run_matches_the_rust_api() {
    let cfg = tiny();
    let direct = run_experiment(&cfg, 9, None).unwrap();
    let h = config(&cfg);
    let mut run = ptr::null_mut();
    unsafe {
        assert_eq!(peerlab_run(h, 9, &mut run), PeerlabStatus::Ok);
        peerlab_config_free(h);

        let mut score = 0.0;
        assert_eq!(peerlab_run_score(run, &mut score), PeerlabStatus::Ok);
        assert_eq!(score.to_bits(), direct.score().unwrap().to_bits());

        let mut n = 0usize;
        assert_eq!(peerlab_run_member_count(run, &mut n), PeerlabStatus::Ok);
        assert_eq!(n, 3);

        let mut len = 0usize;
        let mut steps = [0u64; 8];
        assert_eq!(
            peerlab_run_steps(run, steps.as_mut_ptr(), 8, &mut len),
            PeerlabStatus::Ok
        );
        assert_eq!(&steps[..len], &[400, 800, 1200]);

        let mut curve = vec![0.0; len];
        for agent in 0..n {
            let mut got = 0usize;
            let st = peerlab_run_curve(run, agent, curve.as_mut_ptr(), len, &mut got);
            assert_eq!(st, PeerlabStatus::Ok);
            assert_eq!(got, len);
            assert_eq!(curve, direct.curve(agent).unwrap());
        }
        let st = peerlab_run_curve(run, n, curve.as_mut_ptr(), len, &mut len);
        assert_eq!(st, PeerlabStatus::OutOfRange);

        let mut acc = vec![0u64; n * n];
        assert_eq!(
            peerlab_run_acceptance(run, acc.as_mut_ptr(), n * n, &mut len),
            PeerlabStatus::Ok
        );
        assert_eq!(len, n * n);
        let total: u64 = acc.iter().sum();
        assert_eq!(total, (cfg.total_steps * n) as u64);

        peerlab_run_free(run);
    }
}

#[test]
fn group_steps_and_reports() {
    let h = config(&tiny());
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(peerlab_group_new(h, 4, &mut g), PeerlabStatus::Ok);
        peerlab_config_free(h);
        assert_eq!(peerlab_group_advance(g, 250), PeerlabStatus::Ok);
        let mut rounds = 0;
        assert_eq!(peerlab_group_rounds(g, &mut rounds), PeerlabStatus::Ok);
        assert_eq!(rounds, 250);

        let mut acc = [0u64; 9];
        let mut len = 0usize;
        assert_eq!(
            peerlab_group_acceptance(g, acc.as_mut_ptr(), 9, &mut len),
            PeerlabStatus::Ok
        );
        assert_eq!(len, 9);
        for row in acc.chunks(3) {
            assert_eq!(row.iter().sum::<u64>(), 250);
        }

        let mut t = f64::NAN;
        assert_eq!(peerlab_group_trust(g, 0, 1, &mut t), PeerlabStatus::Ok);
        assert!(t.is_finite());
        assert_eq!(
            peerlab_group_trust(g, 0, 3, &mut t),
            PeerlabStatus::OutOfRange
        );
        peerlab_group_free(g);
    }
}
