//! C ABI over the edgecache library.
//!
//! Scenarios and reports are opaque handles owned by the caller and released
//! with the matching `_free` function. Every fallible call returns an
//! [`EcStatus`]; on failure, [`ec_last_error_message`] describes the error
//! for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use edgecache::config::{ScenarioConfig, ScenarioTemplate};
use edgecache::oracle::{exhaustive_optimal, OracleBudget};
use edgecache::sweep::{run_policy, Evaluation, Policy};
use edgecache::{Error, Placement, Scenario};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigError = 3,
    Intractable = 4,
    BudgetExceeded = 5,
    SolverLimit = 6,
    Infeasible = 7,
    OutOfRange = 8,
    Internal = 9,
}

/// A validated network instance.
pub struct EcScenario {
    inner: Scenario,
}

/// A placement with its score.
pub struct EcReport {
    placement: Placement,
    objective: f64,
    nodes_explored: u64,
    status: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).expect("interior NULs removed"));
}

fn status_of(e: &Error) -> EcStatus {
    match e {
        Error::Intractable(_) => EcStatus::Intractable,
        Error::BudgetExceeded { .. } => EcStatus::BudgetExceeded,
        Error::SolverLimit(_) => EcStatus::SolverLimit,
        Error::Infeasible | Error::InfeasiblePlacement { .. } => EcStatus::Infeasible,
        Error::Dimension(_) => EcStatus::OutOfRange,
        _ => EcStatus::ConfigError,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (EcStatus, String)>) -> EcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EcStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EcStatus::Internal
        }
    }
}

fn lib(e: Error) -> (EcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (EcStatus, String) {
    (EcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (EcStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (EcStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (EcStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ec_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn ec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a scenario from a TOML config.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ec_scenario_from_toml(toml: *const c_char, out: *mut *mut EcScenario) -> EcStatus {
    guard(|| {
        let toml = text(toml, "toml")?;
        let inner = ScenarioConfig::from_toml(toml).and_then(|c| c.build()).map_err(lib)?;
        write(out, Box::into_raw(Box::new(EcScenario { inner })), "out")
    })
}

/// Generates a scenario with the default parameters, `node_count` nodes (base
/// station included), `content_count` contents and `capacity_gb` of storage
/// at every node.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ec_scenario_generate(
    node_count: usize,
    content_count: usize,
    capacity_gb: f64,
    seed: u64,
    out: *mut *mut EcScenario,
) -> EcStatus {
    guard(|| {
        if node_count < 2 || content_count == 0 || !(capacity_gb >= 0.0) {
            return Err((EcStatus::ConfigError, "need two nodes, one content and a non-negative capacity".into()));
        }
        let inner = ScenarioTemplate { node_count, content_count, ..Default::default() }
            .with_capacity_gb(capacity_gb)
            .build(seed)
            .map_err(lib)?;
        write(out, Box::into_raw(Box::new(EcScenario { inner })), "out")
    })
}

/// # Safety
/// `scenario` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ec_scenario_free(scenario: *mut EcScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Node count, base station included; 0 for a null handle.
///
/// # Safety
/// `scenario` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ec_scenario_node_count(scenario: *const EcScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.inner.node_count())
}

/// Content count; 0 for a null handle.
///
/// # Safety
/// `scenario` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ec_scenario_content_count(scenario: *const EcScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.inner.content_count())
}

/// Total average delay (seconds) of a row-major `nodes x contents` 0/1
/// placement.
///
/// # Safety
/// `placement` must point to `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ec_total_delay(
    scenario: *const EcScenario,
    placement: *const u8,
    len: usize,
    out: *mut f64,
) -> EcStatus {
    guard(|| {
        let s = &scenario.as_ref().ok_or_else(|| null("scenario"))?.inner;
        if placement.is_null() {
            return Err(null("placement"));
        }
        let (n, i) = (s.node_count(), s.content_count());
        if len != n * i {
            return Err((EcStatus::OutOfRange, format!("placement has {len} entries, expected {}", n * i)));
        }
        let bytes = std::slice::from_raw_parts(placement, len);
        let rows: Vec<Vec<bool>> = bytes.chunks(i).map(|r| r.iter().map(|&b| b != 0).collect()).collect();
        let value = s.total_average_delay(&Placement::from_rows(&rows)).map_err(lib)?;
        write(out, value, "out")
    })
}

/// Runs a policy: `greedy`, `most-foa`, `guaranteed-greedy`,
/// `locally-optimal`, `distributed`, `centralized` or `oracle`.
///
/// # Safety
/// `scenario` must be a live handle, `policy` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ec_solve(scenario: *const EcScenario, policy: *const c_char, out: *mut *mut EcReport) -> EcStatus {
    guard(|| {
        let s = &scenario.as_ref().ok_or_else(|| null("scenario"))?.inner;
        let policy: Policy = text(policy, "policy")?.parse().map_err(lib)?;
        let outcome = run_policy(s, policy, &Evaluation::default()).map_err(lib)?;
        let report = EcReport {
            placement: outcome.placement,
            objective: outcome.objective,
            nodes_explored: outcome.nodes_explored.unwrap_or(0),
            status: CString::new(outcome.status).expect("static status"),
        };
        write(out, Box::into_raw(Box::new(report)), "out")
    })
}

/// Exhaustive optimum under an enumeration budget.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ec_oracle(scenario: *const EcScenario, budget: u64, out: *mut *mut EcReport) -> EcStatus {
    guard(|| {
        let s = &scenario.as_ref().ok_or_else(|| null("scenario"))?.inner;
        let sol = exhaustive_optimal(s, OracleBudget { max_enumerations: budget }).map_err(lib)?;
        let report = EcReport {
            placement: sol.placement,
            objective: sol.objective,
            nodes_explored: 0,
            status: CString::new("ok").expect("static status"),
        };
        write(out, Box::into_raw(Box::new(report)), "out")
    })
}

/// # Safety
/// `report` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ec_report_free(report: *mut EcReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ec_report_objective(report: *const EcReport, out: *mut f64) -> EcStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        write(out, r.objective, "out")
    })
}

/// Branch-and-bound nodes explored; 0 for other policies.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ec_report_nodes_explored(report: *const EcReport, out: *mut u64) -> EcStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        write(out, r.nodes_explored, "out")
    })
}

/// Solver status string (`ok`, `eta_optimal` or `node_limit`), owned by the
/// report; null for a null handle.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ec_report_status(report: *const EcReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.status.as_ptr())
}

/// Copies the row-major 0/1 placement into `buf`, which must hold exactly
/// `nodes x contents` bytes.
///
/// # Safety
/// `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ec_report_placement(report: *const EcReport, buf: *mut u8, len: usize) -> EcStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let cells = r.placement.as_slice();
        if len != cells.len() {
            return Err((EcStatus::OutOfRange, format!("buffer holds {len} bytes, placement has {}", cells.len())));
        }
        let out = std::slice::from_raw_parts_mut(buf, len);
        for (o, &c) in out.iter_mut().zip(cells) {
            *o = u8::from(c);
        }
        Ok(())
    })
}
