//! C interface to tireplan.
//!
//! Instances and plans cross the boundary as opaque handles that the caller
//! releases with the matching `_free` function. Every fallible call returns
//! a [`TpStatus`]; on failure the message of the last error on the calling
//! thread is available from [`tp_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Duration;

use tireplan::baseline::greedy_edd;
use tireplan::evaluator::{audit, compute_kpis, load_plan, save_plan, DEFAULT_AUDIT_CAP};
use tireplan::instance::{generate, SizeSpec};
use tireplan::integrated::solve_integrated;
use tireplan::matheuristic::{run_rolling_horizon, RunConfig};
use tireplan::milp::{MilpError, SolverConfig};
use tireplan::{Error, Instance, ObjectiveWeights, PlanSolution};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInstance = 4,
    Infeasible = 5,
    Solver = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
    Other = 10,
}

/// Opaque problem instance.
pub struct TpInstance(Instance);

/// Opaque production plan.
pub struct TpPlan(PlanSolution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> TpStatus {
    match e {
        Error::Parse(_) | Error::Json(_) | Error::Csv(_) | Error::Dimension(_) => TpStatus::Parse,
        Error::InvalidInstance(_) | Error::InvalidSizeSpec(_) => TpStatus::InvalidInstance,
        Error::Milp(MilpError::NoSolution { .. }) | Error::WeekFailed { .. } => {
            TpStatus::Infeasible
        }
        Error::Milp(_) | Error::Decode(_) => TpStatus::Solver,
        Error::Io(_) => TpStatus::Io,
        Error::Scenario(_) | Error::Calibration(_) => TpStatus::Other,
    }
}

struct Fail(TpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, records any failure and turns panics into [`TpStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TpStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            TpStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(TpStatus::NullArgument, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(TpStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn inst_arg<'a>(p: *const TpInstance) -> Result<&'a Instance, Fail> {
    p.as_ref().map(|h| &h.0).ok_or_else(|| null("instance"))
}

unsafe fn plan_arg<'a>(p: *const TpPlan) -> Result<&'a PlanSolution, Fail> {
    p.as_ref().map(|h| &h.0).ok_or_else(|| null("plan"))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn limit(seconds: f64) -> Result<Duration, Fail> {
    if seconds.is_finite() && seconds > 0.0 {
        Ok(Duration::from_secs_f64(seconds))
    } else {
        Err(Fail(
            TpStatus::Parse,
            format!("time limit {seconds} must be positive"),
        ))
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn tp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn tp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and validates an instance from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_instance_from_json(
    json: *const c_char,
    out: *mut *mut TpInstance,
) -> TpStatus {
    guard(|| {
        let inst = Instance::from_json(str_arg(json, "json")?)?;
        put(out, TpInstance(inst))
    })
}

/// Loads and validates an instance file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_instance_load(
    path: *const c_char,
    out: *mut *mut TpInstance,
) -> TpStatus {
    guard(|| {
        let inst = Instance::load(PathBuf::from(str_arg(path, "path")?))?;
        put(out, TpInstance(inst))
    })
}

/// Generates a small seeded instance of one week.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_instance_generate(
    seed: u64,
    items: usize,
    presses: usize,
    periods: usize,
    out: *mut *mut TpInstance,
) -> TpStatus {
    guard(|| {
        let inst = generate(seed, &SizeSpec::small(items, presses, periods))?;
        put(out, TpInstance(inst))
    })
}

/// Writes the instance dimensions; any output pointer may be null.
///
/// # Safety
/// `inst` must be a live handle; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn tp_instance_dims(
    inst: *const TpInstance,
    items: *mut usize,
    presses: *mut usize,
    periods: *mut usize,
) -> TpStatus {
    guard(|| {
        let inst = inst_arg(inst)?;
        for (out, v) in [
            (items, inst.sets.items),
            (presses, inst.sets.presses),
            (periods, inst.periods()),
        ] {
            if let Some(o) = out.as_mut() {
                *o = v;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `inst` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tp_instance_free(inst: *mut TpInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Runs the rolling-horizon matheuristic with the calibrated weights.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_solve_matheuristic(
    inst: *const TpInstance,
    lssp_seconds: f64,
    assp_seconds: f64,
    out: *mut *mut TpPlan,
) -> TpStatus {
    guard(|| {
        let inst = inst_arg(inst)?;
        let config = RunConfig {
            lssp_time_limit: limit(lssp_seconds)?,
            assp_time_limit: limit(assp_seconds)?,
            ..RunConfig::default()
        };
        let weights = ObjectiveWeights::calibrated(inst.sets.classes);
        let result = run_rolling_horizon(inst, &weights, &config)?;
        match (result.plan, result.failure) {
            (Some(plan), _) => put(out, TpPlan(plan)),
            (None, Some((week, reason))) => Err(Fail(
                TpStatus::Infeasible,
                format!("week {week} failed: {reason}"),
            )),
            (None, None) => Err(Fail(TpStatus::Other, "run produced no plan".into())),
        }
    })
}

/// Solves the integrated model with the calibrated weights.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_solve_integrated(
    inst: *const TpInstance,
    seconds: f64,
    out: *mut *mut TpPlan,
) -> TpStatus {
    guard(|| {
        let inst = inst_arg(inst)?;
        let weights = ObjectiveWeights::calibrated(inst.sets.classes);
        let sol = solve_integrated(
            inst,
            &weights,
            &SolverConfig::default().with_time_limit(limit(seconds)?),
        )?;
        match sol.plan {
            Some(plan) => put(out, TpPlan(plan)),
            None => Err(Fail(
                TpStatus::Infeasible,
                format!("solver reported {} without a plan", sol.status),
            )),
        }
    })
}

/// Greedy earliest-due-date plan.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_greedy_plan(
    inst: *const TpInstance,
    out: *mut *mut TpPlan,
) -> TpStatus {
    guard(|| {
        let plan = greedy_edd(inst_arg(inst)?)?;
        put(out, TpPlan(plan))
    })
}

/// # Safety
/// `inst` must be a live handle, `path` a NUL-terminated string and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_plan_load(
    inst: *const TpInstance,
    path: *const c_char,
    out: *mut *mut TpPlan,
) -> TpStatus {
    guard(|| {
        let plan = load_plan(PathBuf::from(str_arg(path, "path")?), inst_arg(inst)?)?;
        put(out, TpPlan(plan))
    })
}

/// # Safety
/// Both handles must be live and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tp_plan_save(
    inst: *const TpInstance,
    plan: *const TpPlan,
    path: *const c_char,
) -> TpStatus {
    guard(|| {
        Ok(save_plan(
            PathBuf::from(str_arg(path, "path")?),
            inst_arg(inst)?,
            plan_arg(plan)?,
        )?)
    })
}

/// # Safety
/// `plan` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tp_plan_free(plan: *mut TpPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Counts the rule violations of a plan; zero means feasible.
///
/// # Safety
/// Both handles must be live and `violations` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_audit(
    inst: *const TpInstance,
    plan: *const TpPlan,
    violations: *mut usize,
) -> TpStatus {
    guard(|| {
        let report = audit(inst_arg(inst)?, plan_arg(plan)?, DEFAULT_AUDIT_CAP)?;
        *violations.as_mut().ok_or_else(|| null("violations"))? = report.total;
        Ok(())
    })
}

/// Writes the KPIs `BC1..BCγ, BT, OS, US, OF` under the calibrated weights
/// into `values`. `len` receives the number of values even when `capacity`
/// is too small, in which case nothing is written.
///
/// # Safety
/// Both handles must be live, `len` valid and `values` valid for `capacity`
/// writes.
#[no_mangle]
pub unsafe extern "C" fn tp_kpis(
    inst: *const TpInstance,
    plan: *const TpPlan,
    values: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> TpStatus {
    guard(|| {
        let inst = inst_arg(inst)?;
        let plan = plan_arg(plan)?;
        let len = len.as_mut().ok_or_else(|| null("len"))?;
        if plan.x.len() != inst.sets.items || plan.backorder.len() != inst.sets.tires {
            return Err(Fail(
                TpStatus::Parse,
                "plan does not match the instance".into(),
            ));
        }
        let report =
            compute_kpis(inst, plan, &ObjectiveWeights::calibrated(inst.sets.classes)).values();
        *len = report.len();
        if capacity < report.len() {
            return Err(Fail(
                TpStatus::BufferTooSmall,
                format!(
                    "{} values need a larger buffer than {capacity}",
                    report.len()
                ),
            ));
        }
        if values.is_null() {
            return Err(null("values"));
        }
        std::slice::from_raw_parts_mut(values, report.len()).copy_from_slice(&report);
        Ok(())
    })
}
