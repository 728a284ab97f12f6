//! C ABI over the `infodesign` library.
//!
//! Every fallible function returns an [`InfodesignStatus`] and writes its
//! results through out-pointers. On failure the message is kept per thread
//! and can be read with [`infodesign_last_error`]. Strings returned through
//! `char **` are owned by the caller and released with
//! [`infodesign_string_free`]; scenario handles with
//! [`infodesign_scenario_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use infodesign::channel::{self, Dmc};
use infodesign::coding::{generate_codebook, run_experiment_with, CodingConfig};
use infodesign::mac::{scenario_from_json, DEFAULT_CONFIG};
use infodesign::persuasion::{solve_equilibrium, EquilibriumResult, Scenario, SolveMode};
use infodesign::prob::StochasticMatrix;
use infodesign::splitting::{self, BinarySignal, PosteriorPair};
use infodesign::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfodesignStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Panic = 3,
    InvalidDistribution = 10,
    DimensionMismatch = 11,
    OutOfRange = 12,
    AbsoluteContinuity = 13,
    NonConvergence = 14,
    InvalidSplit = 15,
    NoInformation = 16,
    Unsupported = 17,
    InvalidConfig = 18,
    CodebookTooLarge = 19,
    Intractable = 20,
    InfeasibleRate = 21,
    EmptyFeasibleSet = 22,
    Io = 23,
    Parse = 24,
}

impl From<&Error> for InfodesignStatus {
    fn from(e: &Error) -> Self {
        use InfodesignStatus as S;
        match e {
            Error::InvalidDistribution(_) => S::InvalidDistribution,
            Error::DimensionMismatch(_) => S::DimensionMismatch,
            Error::OutOfRange { .. } => S::OutOfRange,
            Error::AbsoluteContinuity { .. } => S::AbsoluteContinuity,
            Error::NonConvergence { .. } => S::NonConvergence,
            Error::InvalidSplit { .. } => S::InvalidSplit,
            Error::NoInformation(_) => S::NoInformation,
            Error::Unsupported(_) => S::Unsupported,
            Error::InvalidConfig(_) => S::InvalidConfig,
            Error::CodebookTooLarge { .. } => S::CodebookTooLarge,
            Error::Intractable { .. } => S::Intractable,
            Error::InfeasibleRate { .. } => S::InfeasibleRate,
            Error::EmptyFeasibleSet => S::EmptyFeasibleSet,
            Error::Io(_) => S::Io,
            Error::Parse(_) => S::Parse,
        }
    }
}

/// Feasibility constraint for [`infodesign_solve`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfodesignMode {
    /// any Bayes-plausible split
    Unconstrained = 0,
    /// one symbol over a BSC; `param` is the crossover probability
    OneShot = 1,
    /// block coding; `param` is the channel capacity in bits
    Block = 2,
}

/// Sender-optimal binary split.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InfodesignEquilibrium {
    pub p1: f64,
    pub p2: f64,
    pub alpha: f64,
    pub beta: f64,
    /// probability of message w1
    pub weight_w1: f64,
    pub action_w1: usize,
    pub action_w2: usize,
    pub phi1_star: f64,
    pub phi2_star: f64,
    pub no_information: bool,
    pub feasible: bool,
    pub slack: f64,
}

impl From<&EquilibriumResult> for InfodesignEquilibrium {
    fn from(r: &EquilibriumResult) -> Self {
        InfodesignEquilibrium {
            p1: r.posteriors.p1,
            p2: r.posteriors.p2,
            alpha: r.signal.alpha,
            beta: r.signal.beta,
            weight_w1: r.message_weights.probs()[0],
            action_w1: r.receiver_actions[0],
            action_w2: r.receiver_actions[1],
            phi1_star: r.phi1_star,
            phi2_star: r.phi2_star,
            no_information: r.no_information,
            feasible: r.feasibility.feasible,
            slack: r.feasibility.slack,
        }
    }
}

/// Opaque persuasion scenario.
pub struct InfodesignScenario(Scenario);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(InfodesignStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure((&e).into(), e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn null(name: &str) -> Failure {
    Failure(InfodesignStatus::NullPointer, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Outcome + UnwindSafe) -> InfodesignStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(f) {
        Ok(Ok(())) => InfodesignStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            InfodesignStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, name: &str, value: T) -> Outcome {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn read_str<'a>(s: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Failure(InfodesignStatus::InvalidUtf8, format!("{name}: {e}")))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no nul bytes").into_raw()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn infodesign_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn infodesign_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn infodesign_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Capacity of a BSC, in bits.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn infodesign_bsc_capacity(eps: f64, out: *mut f64) -> InfodesignStatus {
    guard(|| {
        let c = channel::capacity(&channel::bsc(eps)?)?;
        write(out, "out", c.capacity)
    })
}

/// Capacity in bits of the `rows × cols` row-major channel matrix.
///
/// # Safety
/// `matrix` must hold `rows * cols` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn infodesign_capacity(
    matrix: *const f64,
    rows: usize,
    cols: usize,
    out: *mut f64,
) -> InfodesignStatus {
    guard(|| {
        if matrix.is_null() {
            return Err(null("matrix"));
        }
        let flat = std::slice::from_raw_parts(matrix, rows * cols);
        let table = StochasticMatrix::new(flat.chunks(cols.max(1)).map(<[f64]>::to_vec).collect())?;
        let c = channel::capacity(&Dmc::new(table))?;
        write(out, "out", c.capacity)
    })
}

/// Signal parameters `(alpha, beta)` inducing the split `(p1, p2)` of `p`.
///
/// # Safety
/// `alpha` and `beta` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn infodesign_signal_from_posteriors(
    p: f64,
    p1: f64,
    p2: f64,
    alpha: *mut f64,
    beta: *mut f64,
) -> InfodesignStatus {
    guard(|| {
        let s = splitting::signal_from_posteriors(p, &PosteriorPair::new(p1, p2)?)?;
        write(alpha, "alpha", s.alpha)?;
        write(beta, "beta", s.beta)
    })
}

/// Posteriors `(p1, p2)` induced by the signal `(alpha, beta)` under prior `p`.
///
/// # Safety
/// `p1` and `p2` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn infodesign_posteriors_from_signal(
    p: f64,
    alpha: f64,
    beta: f64,
    p1: *mut f64,
    p2: *mut f64,
) -> InfodesignStatus {
    guard(|| {
        let r = splitting::posteriors_from_signal(p, &BinarySignal::new(alpha, beta)?)?;
        write(p1, "p1", r.pair.p1)?;
        write(p2, "p2", r.pair.p2)
    })
}

/// One-shot feasibility of the split `(p1, p2)` over a BSC(`eps`).
///
/// # Safety
/// `feasible` and `slack` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn infodesign_one_shot_feasible(
    p: f64,
    p1: f64,
    p2: f64,
    eps: f64,
    feasible: *mut bool,
    slack: *mut f64,
) -> InfodesignStatus {
    guard(|| {
        let v = splitting::one_shot_feasible(p, &PosteriorPair::new(p1, p2)?, eps)?;
        write(feasible, "feasible", v.feasible)?;
        write(slack, "slack", v.slack)
    })
}

/// Block-coding feasibility of the signal `(alpha, beta)` under capacity
/// `capacity` bits.
///
/// # Safety
/// `feasible` and `slack` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn infodesign_block_feasible(
    p: f64,
    alpha: f64,
    beta: f64,
    capacity: f64,
    feasible: *mut bool,
    slack: *mut f64,
) -> InfodesignStatus {
    guard(|| {
        let v = splitting::block_feasible(p, &BinarySignal::new(alpha, beta)?, capacity)?;
        write(feasible, "feasible", v.feasible)?;
        write(slack, "slack", v.slack)
    })
}

/// Parse a scenario document (a utility table or a MAC configuration).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn infodesign_scenario_from_json(
    json: *const c_char,
    out: *mut *mut InfodesignScenario,
) -> InfodesignStatus {
    guard(|| {
        let sc = scenario_from_json(read_str(json, "json")?)?;
        write(out, "out", Box::into_raw(Box::new(InfodesignScenario(sc))))
    })
}

/// The bundled MAC power-allocation scenario.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn infodesign_scenario_mac_default(
    out: *mut *mut InfodesignScenario,
) -> InfodesignStatus {
    guard(|| {
        let sc = scenario_from_json(DEFAULT_CONFIG)?;
        write(out, "out", Box::into_raw(Box::new(InfodesignScenario(sc))))
    })
}

/// Number of receiver actions, or 0 for NULL.
///
/// # Safety
/// `sc` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn infodesign_scenario_actions(sc: *const InfodesignScenario) -> usize {
    sc.as_ref().map_or(0, |s| s.0.actions().len())
}

/// Release a scenario handle. NULL is ignored.
///
/// # Safety
/// `sc` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn infodesign_scenario_free(sc: *mut InfodesignScenario) {
    if !sc.is_null() {
        drop(Box::from_raw(sc));
    }
}

fn solve_mode(mode: InfodesignMode, param: f64) -> SolveMode {
    match mode {
        InfodesignMode::Unconstrained => SolveMode::Unconstrained,
        InfodesignMode::OneShot => SolveMode::OneShot { eps: param },
        InfodesignMode::Block => SolveMode::Block { capacity: param },
    }
}

unsafe fn solve(
    sc: *const InfodesignScenario,
    mode: InfodesignMode,
    param: f64,
    resolution: f64,
) -> Result<EquilibriumResult, Failure> {
    let sc = sc.as_ref().ok_or_else(|| null("scenario"))?;
    Ok(solve_equilibrium(
        &sc.0,
        solve_mode(mode, param),
        resolution,
    )?)
}

/// Grid-search the sender-optimal split at posterior step `resolution`.
///
/// # Safety
/// `sc` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn infodesign_solve(
    sc: *const InfodesignScenario,
    mode: InfodesignMode,
    param: f64,
    resolution: f64,
    out: *mut InfodesignEquilibrium,
) -> InfodesignStatus {
    guard(|| {
        let r = solve(sc, mode, param, resolution)?;
        write(out, "out", (&r).into())
    })
}

/// As [`infodesign_solve`], returning the full report as JSON.
///
/// # Safety
/// `sc` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn infodesign_solve_json(
    sc: *const InfodesignScenario,
    mode: InfodesignMode,
    param: f64,
    resolution: f64,
    out: *mut *mut c_char,
) -> InfodesignStatus {
    guard(|| {
        let r = solve(sc, mode, param, resolution)?;
        let text = serde_json::to_string(&r).map_err(Error::from)?;
        write(out, "out", owned_string(text))
    })
}

/// Run a simulator experiment described by `experiment_json` and return its
/// summary as JSON. `trials` of 0 uses the experiment's own count.
///
/// # Safety
/// `experiment_json` must be a NUL-terminated string; `out` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn infodesign_simulate_json(
    experiment_json: *const c_char,
    trials: usize,
    out: *mut *mut c_char,
) -> InfodesignStatus {
    guard(|| {
        let cfg = CodingConfig::from_json(read_str(experiment_json, "experiment_json")?)?;
        cfg.check_rate()?;
        let trials = if trials == 0 { cfg.trials } else { trials };
        let cb = generate_codebook(&cfg)?;
        let exp = run_experiment_with(&cfg, &cb, trials)?;
        let text = serde_json::to_string(&exp.summary).map_err(Error::from)?;
        write(out, "out", owned_string(text))
    })
}
