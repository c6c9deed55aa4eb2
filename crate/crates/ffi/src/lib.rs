//! C ABI over the peerlab simulator.
//!
//! Objects cross the boundary as opaque handles created by `*_new` /
//! `*_from_json` functions and released with the matching `*_free`. Every
//! fallible call returns a [`PeerlabStatus`]; on failure a message is kept
//! per thread and can be read with [`peerlab_last_error_message`].
//! Array outputs use caller-owned buffers: pass the buffer length, and the
//! required length is written to `*out_len` (`BUFFER_TOO_SMALL` if short).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use peerlab::harness::{build_members, run_experiment, ExperimentConfig, RunResult};
use peerlab::peer::{boltzmann_probabilities, PeerGroup, TemperatureSchedule};
use peerlab::rng::SeedSpec;
use peerlab::PeerlabError;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeerlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    Runtime = 4,
    BufferTooSmall = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// A validated experiment configuration.
pub struct PeerlabConfig {
    inner: ExperimentConfig,
}

/// The finished result of one seed of one configuration.
pub struct PeerlabRun {
    inner: RunResult,
}

/// A live peer group that can be stepped round by round.
pub struct PeerlabGroup {
    inner: PeerGroup,
    rounds: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn from_error(err: PeerlabError) -> PeerlabStatus {
    let status = if err.is_config_error() {
        PeerlabStatus::InvalidConfig
    } else {
        PeerlabStatus::Runtime
    };
    set_error(err.to_string());
    status
}

/// Runs `f`, turning panics into `PANIC` and recording failures.
fn guard(f: impl FnOnce() -> Result<(), PeerlabStatus>) -> PeerlabStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PeerlabStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PeerlabStatus::Panic
        }
    }
}

fn null(what: &str) -> PeerlabStatus {
    set_error(format!("{what} is null"));
    PeerlabStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, PeerlabStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, PeerlabStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Copies `data` into the caller's buffer, reporting the needed length.
unsafe fn fill<T: Copy>(
    data: &[T],
    buf: *mut T,
    len: usize,
    out_len: *mut usize,
) -> Result<(), PeerlabStatus> {
    if !out_len.is_null() {
        *out_len = data.len();
    }
    if len < data.len() {
        set_error(format!("buffer holds {len} values, {} needed", data.len()));
        return Err(PeerlabStatus::BufferTooSmall);
    }
    if !data.is_empty() {
        if buf.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next peerlab call on the same thread.
#[no_mangle]
pub extern "C" fn peerlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn peerlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Temperature `tau0 * exp(-decay * epoch)`.
///
/// # Safety
/// `out` must be null or point to writable memory for one double.
#[no_mangle]
pub unsafe extern "C" fn peerlab_temperature(
    tau0: f64,
    decay: f64,
    epoch: u64,
    out: *mut f64,
) -> PeerlabStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        let schedule = TemperatureSchedule {
            initial: tau0,
            decay,
            epoch_steps: 1,
        };
        schedule.validate().map_err(from_error)?;
        *out = schedule.temperature(epoch);
        Ok(())
    })
}

/// Boltzmann selection probabilities of `n` weights at temperature `tau`,
/// written to `out_probs` (`n` doubles).
///
/// # Safety
/// `weights` and `out_probs` must each point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn peerlab_boltzmann(
    weights: *const f64,
    n: usize,
    tau: f64,
    out_probs: *mut f64,
) -> PeerlabStatus {
    guard(|| {
        if weights.is_null() {
            return Err(null("weights"));
        }
        if out_probs.is_null() {
            return Err(null("out_probs"));
        }
        let w = std::slice::from_raw_parts(weights, n);
        let p = boltzmann_probabilities(w, tau).map_err(from_error)?;
        ptr::copy_nonoverlapping(p.as_ptr(), out_probs, n);
        Ok(())
    })
}

/// Parses and validates a JSON experiment configuration. Missing fields
/// take their defaults, so `"{}"` is valid.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn peerlab_config_from_json(
    json: *const c_char,
    out: *mut *mut PeerlabConfig,
) -> PeerlabStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| {
            set_error(e.to_string());
            PeerlabStatus::InvalidUtf8
        })?;
        let inner = ExperimentConfig::from_json(text).map_err(from_error)?;
        *out = Box::into_raw(Box::new(PeerlabConfig { inner }));
        Ok(())
    })
}

/// Serializes a configuration, all defaults filled in, as JSON.
///
/// # Safety
/// `config` must come from [`peerlab_config_from_json`]; `buf` must hold
/// `len` bytes. The text is NUL-terminated and `*out_len` includes the NUL.
#[no_mangle]
pub unsafe extern "C" fn peerlab_config_to_json(
    config: *const PeerlabConfig,
    buf: *mut c_char,
    len: usize,
    out_len: *mut usize,
) -> PeerlabStatus {
    guard(|| {
        let cfg = deref(config, "config")?;
        let text = CString::new(cfg.inner.to_json()).map_err(|e| {
            set_error(e.to_string());
            PeerlabStatus::Runtime
        })?;
        fill(text.as_bytes_with_nul(), buf.cast::<u8>(), len, out_len)
    })
}

/// # Safety
/// `config` must be null or come from [`peerlab_config_from_json`], and is
/// invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn peerlab_config_free(config: *mut PeerlabConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Trains the configured group for one seed (no files written).
///
/// # Safety
/// `config` must be a live config handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn peerlab_run(
    config: *const PeerlabConfig,
    seed: u64,
    out: *mut *mut PeerlabRun,
) -> PeerlabStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let cfg = deref(config, "config")?;
        let inner = run_experiment(&cfg.inner, seed, None).map_err(from_error)?;
        *out = Box::into_raw(Box::new(PeerlabRun { inner }));
        Ok(())
    })
}

/// # Safety
/// `run` must be null or come from [`peerlab_run`], and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn peerlab_run_free(run: *mut PeerlabRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Mean over learners of their average reward over time.
///
/// # Safety
/// `run` must be a live run handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn peerlab_run_score(run: *const PeerlabRun, out: *mut f64) -> PeerlabStatus {
    guard(|| {
        let run = deref(run, "run")?;
        let out = deref_mut(out, "out")?;
        *out = run.inner.score().map_err(from_error)?;
        Ok(())
    })
}

/// Number of group members (learners and frozen advisors).
///
/// # Safety
/// `run` must be a live run handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn peerlab_run_member_count(
    run: *const PeerlabRun,
    out: *mut usize,
) -> PeerlabStatus {
    guard(|| {
        let run = deref(run, "run")?;
        *deref_mut(out, "out")? = run.inner.kinds.len();
        Ok(())
    })
}

/// Evaluation steps of the run's checkpoints.
///
/// # Safety
/// `run` must be a live run handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn peerlab_run_steps(
    run: *const PeerlabRun,
    buf: *mut u64,
    len: usize,
    out_len: *mut usize,
) -> PeerlabStatus {
    guard(|| {
        let run = deref(run, "run")?;
        let steps: Vec<u64> = run.inner.steps().into_iter().map(|s| s as u64).collect();
        fill(&steps, buf, len, out_len)
    })
}

/// Solo evaluation curve of member `agent`, one value per checkpoint.
///
/// # Safety
/// `run` must be a live run handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn peerlab_run_curve(
    run: *const PeerlabRun,
    agent: usize,
    buf: *mut f64,
    len: usize,
    out_len: *mut usize,
) -> PeerlabStatus {
    guard(|| {
        let run = deref(run, "run")?;
        if !run.inner.learners.contains(&agent) {
            set_error(format!("member {agent} is not a learner"));
            return Err(PeerlabStatus::OutOfRange);
        }
        let curve = run.inner.curve(agent).map_err(from_error)?;
        fill(&curve, buf, len, out_len)
    })
}

/// Final acceptance counts, row-major `n x n`: entry `i * n + j` counts how
/// often member `i` executed member `j`'s suggestion.
///
/// # Safety
/// `run` must be a live run handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn peerlab_run_acceptance(
    run: *const PeerlabRun,
    buf: *mut u64,
    len: usize,
    out_len: *mut usize,
) -> PeerlabStatus {
    guard(|| {
        let run = deref(run, "run")?;
        let flat: Vec<u64> = run
            .inner
            .final_acceptance()
            .map(|m| m.iter().flatten().copied().collect())
            .unwrap_or_default();
        fill(&flat, buf, len, out_len)
    })
}

/// Builds the configured group for `seed` without running it.
///
/// # Safety
/// `config` must be a live config handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn peerlab_group_new(
    config: *const PeerlabConfig,
    seed: u64,
    out: *mut *mut PeerlabGroup,
) -> PeerlabStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let cfg = &deref(config, "config")?.inner;
        let spec = SeedSpec::new(seed);
        let build = || -> peerlab::Result<PeerGroup> {
            let env = cfg.env.build(cfg.gamma)?;
            let members = build_members(cfg, env.as_ref(), &spec)?;
            PeerGroup::new(members, env.as_ref(), cfg.group_settings(), &spec)
        };
        let inner = build().map_err(from_error)?;
        *out = Box::into_raw(Box::new(PeerlabGroup { inner, rounds: 0 }));
        Ok(())
    })
}

/// # Safety
/// `group` must be null or come from [`peerlab_group_new`], and is invalid
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn peerlab_group_free(group: *mut PeerlabGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// Advances every learner by `rounds` environment steps.
///
/// # Safety
/// `group` must be a live group handle.
#[no_mangle]
pub unsafe extern "C" fn peerlab_group_advance(
    group: *mut PeerlabGroup,
    rounds: u64,
) -> PeerlabStatus {
    guard(|| {
        let g = deref_mut(group, "group")?;
        for _ in 0..rounds {
            g.inner.advance().map_err(from_error)?;
            g.rounds += 1;
        }
        Ok(())
    })
}

/// Rounds completed so far.
///
/// # Safety
/// `group` must be a live group handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn peerlab_group_rounds(
    group: *const PeerlabGroup,
    out: *mut u64,
) -> PeerlabStatus {
    guard(|| {
        let g = deref(group, "group")?;
        *deref_mut(out, "out")? = g.rounds;
        Ok(())
    })
}

/// Current acceptance counts, row-major `n x n` as in
/// [`peerlab_run_acceptance`].
///
/// # Safety
/// `group` must be a live group handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn peerlab_group_acceptance(
    group: *const PeerlabGroup,
    buf: *mut u64,
    len: usize,
    out_len: *mut usize,
) -> PeerlabStatus {
    guard(|| {
        let g = deref(group, "group")?;
        let flat: Vec<u64> = g.inner.acceptance().iter().flatten().copied().collect();
        fill(&flat, buf, len, out_len)
    })
}

/// Trust value member `advisee` holds for `advisor`.
///
/// # Safety
/// `group` must be a live group handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn peerlab_group_trust(
    group: *const PeerlabGroup,
    advisee: usize,
    advisor: usize,
    out: *mut f64,
) -> PeerlabStatus {
    guard(|| {
        let g = deref(group, "group")?;
        let n = g.inner.len();
        if advisee >= n || advisor >= n {
            set_error(format!("members are 0..{n}"));
            return Err(PeerlabStatus::OutOfRange);
        }
        *deref_mut(out, "out")? = g.inner.trust().trust(advisee, advisor);
        Ok(())
    })
}
