//! C ABI for embedding the analyzer.
//!
//! All handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free` function. Functions return a [`CtStatus`]; on
//! failure [`ct_last_error`] describes the problem for the calling thread.
//! Strings passed in must be NUL-terminated UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use cryptriage::cli::{gate, FailOn};
use cryptriage::pipeline::{scan_paths, scan_units, ScanOptions};
use cryptriage::report::{render_json, render_text, Report};
use cryptriage::rulelang::load_rule_pack;
use cryptriage::threatmodel::ThreatModel;
use cryptriage::parse_java;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    RulePack = 3,
    ThreatModel = 4,
    Parse = 5,
    Io = 6,
    Panic = 7,
}

/// Severity threshold for [`ct_report_exit_code`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtFailOn {
    High = 0,
    Medium = 1,
    Low = 2,
    Never = 3,
}

/// Loaded rules, threat model and settings.
pub struct CtScanner {
    opts: ScanOptions,
}

/// A finished scan with its rendered JSON cached.
pub struct CtReport {
    report: Report,
    json: CString,
    text: Option<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: CtStatus, msg: impl Into<String>) -> CtStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> CtStatus) -> CtStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(CtStatus::Panic, "internal panic"))
}

unsafe fn opt_str<'a>(p: *const c_char) -> Result<Option<&'a str>, CtStatus> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Some)
        .map_err(|_| fail(CtStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

unsafe fn req_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, CtStatus> {
    opt_str(p)?.ok_or_else(|| fail(CtStatus::NullArgument, format!("`{what}` is null")))
}

fn boxed_report(report: Report) -> *mut CtReport {
    let json = CString::new(render_json(&report)).unwrap_or_default();
    Box::into_raw(Box::new(CtReport {
        report,
        json,
        text: None,
    }))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ct_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn ct_version() -> *const c_char {
    static V: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    V.as_ptr().cast()
}

/// Create a scanner. `rules_dir` and `threat_model_path` may be null to use
/// the built-in pack and catalog.
///
/// # Safety
/// String arguments must be null or valid NUL-terminated strings; `out` must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ct_scanner_new(
    rules_dir: *const c_char,
    threat_model_path: *const c_char,
    out: *mut *mut CtScanner,
) -> CtStatus {
    guard(|| {
        if out.is_null() {
            return fail(CtStatus::NullArgument, "`out` is null");
        }
        *out = ptr::null_mut();
        let mut opts = ScanOptions::default();
        match opt_str(rules_dir) {
            Err(s) => return s,
            Ok(Some(d)) => match load_rule_pack(&PathBuf::from(d)) {
                Ok(p) => opts.rules = p.rules,
                Err(e) => return fail(CtStatus::RulePack, e.to_string()),
            },
            Ok(None) => {}
        }
        match opt_str(threat_model_path) {
            Err(s) => return s,
            Ok(Some(p)) => match ThreatModel::load(&PathBuf::from(p)) {
                Ok(tm) => opts.threat_model = tm,
                Err(e) => return fail(CtStatus::ThreatModel, e.to_string()),
            },
            Ok(None) => {}
        }
        *out = Box::into_raw(Box::new(CtScanner { opts }));
        CtStatus::Ok
    })
}

/// # Safety
/// `scanner` must be null or a handle from [`ct_scanner_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ct_scanner_free(scanner: *mut CtScanner) {
    if !scanner.is_null() {
        drop(Box::from_raw(scanner));
    }
}

/// Set the helper inlining depth (default 1) and worker count (0 = all
/// cores).
///
/// # Safety
/// `scanner` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_scanner_configure(
    scanner: *mut CtScanner,
    inline_depth: usize,
    jobs: usize,
) -> CtStatus {
    guard(|| {
        let Some(s) = scanner.as_mut() else {
            return fail(CtStatus::NullArgument, "`scanner` is null");
        };
        s.opts.inline_depth = inline_depth;
        s.opts.jobs = (jobs > 0).then_some(jobs);
        CtStatus::Ok
    })
}

/// Scan one in-memory Java source. `path` names the unit in the report.
///
/// # Safety
/// `scanner` must be a live handle, strings valid, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ct_scan_source(
    scanner: *const CtScanner,
    source: *const c_char,
    path: *const c_char,
    out: *mut *mut CtReport,
) -> CtStatus {
    guard(|| {
        if out.is_null() {
            return fail(CtStatus::NullArgument, "`out` is null");
        }
        *out = ptr::null_mut();
        let Some(s) = scanner.as_ref() else {
            return fail(CtStatus::NullArgument, "`scanner` is null");
        };
        let (src, path) = match (req_str(source, "source"), req_str(path, "path")) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return e,
        };
        let unit = match parse_java(src, path) {
            Ok(u) => u,
            Err(e) => return fail(CtStatus::Parse, e.to_string()),
        };
        *out = boxed_report(scan_units(&[unit], &s.opts));
        CtStatus::Ok
    })
}

/// Scan files and directories.
///
/// # Safety
/// `paths` must point to `count` valid strings.
#[no_mangle]
pub unsafe extern "C" fn ct_scan_paths(
    scanner: *const CtScanner,
    paths: *const *const c_char,
    count: usize,
    out: *mut *mut CtReport,
) -> CtStatus {
    guard(|| {
        if out.is_null() {
            return fail(CtStatus::NullArgument, "`out` is null");
        }
        *out = ptr::null_mut();
        let Some(s) = scanner.as_ref() else {
            return fail(CtStatus::NullArgument, "`scanner` is null");
        };
        if paths.is_null() && count > 0 {
            return fail(CtStatus::NullArgument, "`paths` is null");
        }
        let mut inputs = Vec::with_capacity(count);
        for i in 0..count {
            match req_str(*paths.add(i), "paths[i]") {
                Ok(p) => inputs.push(PathBuf::from(p)),
                Err(e) => return e,
            }
        }
        match scan_paths(&inputs, &s.opts) {
            Ok(r) => {
                *out = boxed_report(r);
                CtStatus::Ok
            }
            Err(e) => fail(CtStatus::Io, e.to_string()),
        }
    })
}

/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn ct_report_free(report: *mut CtReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of findings, or 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn ct_report_finding_count(report: *const CtReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.findings.len())
}

/// The JSON report, owned by the handle.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn ct_report_json(report: *const CtReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// The text summary, rendered on first use and owned by the handle.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn ct_report_text(report: *mut CtReport) -> *const c_char {
    let Some(r) = report.as_mut() else {
        return ptr::null();
    };
    let report = &r.report;
    r.text
        .get_or_insert_with(|| CString::new(render_text(report)).unwrap_or_default())
        .as_ptr()
}

/// Exit code the CLI would return: 0, 1 for findings at or above the
/// threshold, or -1 for a null handle.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn ct_report_exit_code(
    report: *const CtReport,
    fail_on: CtFailOn,
    demote_efp: bool,
) -> i32 {
    let Some(r) = report.as_ref() else {
        return -1;
    };
    let f = match fail_on {
        CtFailOn::High => FailOn::High,
        CtFailOn::Medium => FailOn::Medium,
        CtFailOn::Low => FailOn::Low,
        CtFailOn::Never => FailOn::Never,
    };
    gate(&r.report, f, demote_efp)
}
