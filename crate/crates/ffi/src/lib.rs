//! C interface to the decider and the simulation oracle.
//!
//! Every entry point returns an [`NtmStatus`]. On failure the message is kept
//! per thread and can be read with [`ntm_last_error`]. Handles are opaque and
//! must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ntmflow::decider::{decide, format_decision, DeciderConfig, Decision, Verdict};
use ntmflow::lp::SolveLimits;
use ntmflow::machine::{parse_machine, MachineSpec};
use ntmflow::oracle::{oracle_decide, OracleVerdict};
use ntmflow::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NtmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidWord = 4,
    InvalidArgument = 5,
    CapacityExceeded = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NtmVerdict {
    Accept = 0,
    Reject = 1,
    /// The step cap was reached without a decision.
    Undecided = 2,
}

/// A parsed machine.
pub struct NtmMachine(MachineSpec);

/// The outcome of one decider run.
pub struct NtmDecision {
    decision: Decision,
    report: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    // interior NULs would truncate the message on the C side anyway
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: NtmStatus, msg: impl Into<String>) -> NtmStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> NtmStatus {
    match e {
        Error::Parse(_) => NtmStatus::ParseError,
        Error::InvalidWord(_) => NtmStatus::InvalidWord,
        Error::Capacity { .. } => NtmStatus::CapacityExceeded,
        _ => NtmStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> NtmStatus) -> NtmStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(NtmStatus::Panic, msg)
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, NtmStatus> {
    if p.is_null() {
        return Err(fail(NtmStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| fail(NtmStatus::InvalidUtf8, e.to_string()))
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn ntm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a machine description. On success `*out` owns a new handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ntm_machine_parse(text: *const c_char, out: *mut *mut NtmMachine) -> NtmStatus {
    guard(|| {
        if out.is_null() {
            return fail(NtmStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_machine(text) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(NtmMachine(m)));
                NtmStatus::Ok
            }
            Err(e) => fail(NtmStatus::ParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `m` must come from [`ntm_machine_parse`] and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn ntm_machine_free(m: *mut NtmMachine) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Runs the decider on `word`. Symbols are separated by whitespace when the
/// word contains any, otherwise each character is one symbol.
///
/// `max_variables` bounds each linear system; 0 selects the default.
///
/// # Safety
/// `m` must be a live machine handle, `word` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ntm_decide(
    m: *const NtmMachine,
    word: *const c_char,
    step_cap: u32,
    max_variables: usize,
    out: *mut *mut NtmDecision,
) -> NtmStatus {
    guard(|| {
        if m.is_null() || out.is_null() {
            return fail(NtmStatus::NullPointer, "null handle or output pointer");
        }
        *out = ptr::null_mut();
        if step_cap == 0 {
            return fail(NtmStatus::InvalidArgument, "step cap must be positive");
        }
        let machine = &(*m).0;
        let word = match read_str(word) {
            Ok(w) => w,
            Err(s) => return s,
        };
        let x = match machine.parse_word(word) {
            Ok(x) => x,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        let mut limits = SolveLimits::default();
        if max_variables > 0 {
            limits.max_variables = max_variables;
        }
        let config = DeciderConfig {
            step_cap,
            limits,
            parallel: true,
        };
        match decide(machine, &x, config) {
            Ok(decision) => {
                let report = CString::new(format_decision(machine, &decision)).unwrap_or_default();
                *out = Box::into_raw(Box::new(NtmDecision { decision, report }));
                NtmStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `d` must be a live decision handle.
#[no_mangle]
pub unsafe extern "C" fn ntm_decision_verdict(d: *const NtmDecision) -> NtmVerdict {
    match d.as_ref().map(|d| d.decision.verdict) {
        Some(Verdict::Accept) => NtmVerdict::Accept,
        Some(Verdict::Reject) => NtmVerdict::Reject,
        _ => NtmVerdict::Undecided,
    }
}

/// Sequence length at which the decider stopped.
///
/// # Safety
/// `d` must be a live decision handle.
#[no_mangle]
pub unsafe extern "C" fn ntm_decision_mu(d: *const NtmDecision) -> u32 {
    d.as_ref().map_or(0, |d| d.decision.mu_final)
}

/// Line-oriented report, owned by the handle.
///
/// # Safety
/// `d` must be a live decision handle.
#[no_mangle]
pub unsafe extern "C" fn ntm_decision_report(d: *const NtmDecision) -> *const c_char {
    d.as_ref().map_or(ptr::null(), |d| d.report.as_ptr())
}

/// # Safety
/// `d` must come from [`ntm_decide`] and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn ntm_decision_free(d: *mut NtmDecision) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Breadth-first simulation up to `step_cap` steps.
///
/// # Safety
/// `m` must be a live machine handle, `word` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ntm_oracle(
    m: *const NtmMachine,
    word: *const c_char,
    step_cap: u32,
    out: *mut NtmVerdict,
) -> NtmStatus {
    guard(|| {
        if m.is_null() || out.is_null() {
            return fail(NtmStatus::NullPointer, "null handle or output pointer");
        }
        let machine = &(*m).0;
        let word = match read_str(word) {
            Ok(w) => w,
            Err(s) => return s,
        };
        let x = match machine.parse_word(word) {
            Ok(x) => x,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        *out = match oracle_decide(machine, &x, step_cap).verdict {
            OracleVerdict::Accept => NtmVerdict::Accept,
            OracleVerdict::Reject => NtmVerdict::Reject,
            OracleVerdict::UndecidedAtCap => NtmVerdict::Undecided,
        };
        NtmStatus::Ok
    })
}
