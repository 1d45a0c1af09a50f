use std::ffi::{CStr, CString};
use std::ptr;

use cryptriage_ffi::*;

fn cstr(p: *const std::ffi::c_char) -> String {
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

const MD5: &str = r#"import java.security.MessageDigest;
class H { byte[] h(byte[] b) throws Exception { MessageDigest md = MessageDigest.getInstance("MD5"); return md.digest(b); } }"#;

#[test]
fn scan_source_round_trip() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(ct_scanner_new(ptr::null(), ptr::null(), &mut s), CtStatus::Ok);
        let src = CString::new(MD5).unwrap();
        let path = CString::new("H.java").unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(ct_scan_source(s, src.as_ptr(), path.as_ptr(), &mut r), CtStatus::Ok);
        assert_eq!(ct_report_finding_count(r), 1);
        let json: serde_json::Value = serde_json::from_str(&cstr(ct_report_json(r))).unwrap();
        assert_eq!(json["findings"][0]["classification"]["displayName"], "Insecure cryptographic hash");
        assert!(cstr(ct_report_text(r)).contains("[H] Insecure cryptographic hash"));
        assert_eq!(ct_report_exit_code(r, CtFailOn::High, false), 1);
        assert_eq!(ct_report_exit_code(r, CtFailOn::Never, false), 0);
        ct_report_free(r);
        ct_scanner_free(s);
    }
}

#[test]
fn errors_are_reported_with_codes() {
    unsafe {
        assert_eq!(ct_scanner_new(ptr::null(), ptr::null(), ptr::null_mut()), CtStatus::NullArgument);
        assert!(cstr(ct_last_error()).contains("out"));
        let missing = CString::new("/nonexistent/rules").unwrap();
        let mut s = ptr::null_mut();
        assert_eq!(ct_scanner_new(missing.as_ptr(), ptr::null(), &mut s), CtStatus::RulePack);
        assert!(s.is_null());

        assert_eq!(ct_scanner_new(ptr::null(), ptr::null(), &mut s), CtStatus::Ok);
        let bad = CString::new("class {").unwrap();
        let path = CString::new("B.java").unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(ct_scan_source(s, bad.as_ptr(), path.as_ptr(), &mut r), CtStatus::Parse);
        assert!(r.is_null());
        assert_eq!(ct_scan_source(s, ptr::null(), path.as_ptr(), &mut r), CtStatus::NullArgument);
        let invalid = [0xffu8, 0];
        assert_eq!(
            ct_scan_source(s, invalid.as_ptr().cast(), path.as_ptr(), &mut r),
            CtStatus::InvalidUtf8
        );
        assert_eq!(ct_report_exit_code(ptr::null(), CtFailOn::High, false), -1);
        ct_scanner_free(s);
        ct_scanner_free(ptr::null_mut());
        ct_report_free(ptr::null_mut());
    }
}

#[test]
fn scan_paths_over_a_directory() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("H.java"), MD5).unwrap();
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(ct_scanner_new(ptr::null(), ptr::null(), &mut s), CtStatus::Ok);
        assert_eq!(ct_scanner_configure(s, 1, 2), CtStatus::Ok);
        let p = CString::new(d.path().to_str().unwrap()).unwrap();
        let paths = [p.as_ptr()];
        let mut r = ptr::null_mut();
        assert_eq!(ct_scan_paths(s, paths.as_ptr(), 1, &mut r), CtStatus::Ok);
        assert_eq!(ct_report_finding_count(r), 1);
        ct_report_free(r);
        let gone = CString::new(d.path().join("nope").to_str().unwrap()).unwrap();
        let paths = [gone.as_ptr()];
        assert_eq!(ct_scan_paths(s, paths.as_ptr(), 1, &mut r), CtStatus::Io);
        ct_scanner_free(s);
    }
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cryptriage.h")).unwrap();
    for name in [
        "ct_scanner_new",
        "ct_scanner_free",
        "ct_scanner_configure",
        "ct_scan_source",
        "ct_scan_paths",
        "ct_report_json",
        "ct_report_text",
        "ct_report_exit_code",
        "ct_report_finding_count",
        "ct_report_free",
        "ct_last_error",
        "ct_version",
        "typedef struct CtScanner CtScanner",
        "CT_STATUS_OK = 0",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
    assert_eq!(cstr(ct_version()), env!("CARGO_PKG_VERSION"));
}
