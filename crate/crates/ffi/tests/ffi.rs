use mobsamp_ffi::*;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ms_last_error_message()) }.to_string_lossy().into_owned()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_string_lossy().into_owned();
    ms_string_free(s);
    out
}

const LINES: &str = r#"{"family":"parallel_lines","normal":[1,0],"offsets":{"kind":"arithmetic","step":1,"offset":0}}"#;

#[test]
fn support_of_square_and_disk() {
    unsafe {
        let xy = [-1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, 1.0];
        let mut sq = ptr::null_mut();
        assert_eq!(ms_body_polygon(xy.as_ptr(), 4, &mut sq), MsStatus::Ok);
        let mut h = 0.0;
        assert_eq!(ms_support(sq, 1.0, 1.0, &mut h), MsStatus::Ok);
        assert!((h - 2.0).abs() < 1e-12);
        ms_body_free(sq);

        let mut d = ptr::null_mut();
        let j = c(r#"{"kind":"disk","center":[1,0],"radius":0.5}"#);
        assert_eq!(ms_body_from_json(j.as_ptr(), &mut d), MsStatus::Ok);
        assert_eq!(ms_support(d, 0.0, 2.0, &mut h), MsStatus::Ok);
        assert!((h - 1.0).abs() < 1e-12);
        ms_body_free(d);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut h = 0.0;
        assert_eq!(ms_support(ptr::null(), 1.0, 0.0, &mut h), MsStatus::NullPointer);
        assert!(last_error().contains("body"));
        let mut d = ptr::null_mut();
        assert_eq!(ms_body_disk(0.0, 0.0, -1.0, &mut d), MsStatus::ModuleError);
        assert!(d.is_null());
        assert!(!last_error().is_empty());
        let bad = c(r#"{"kind":"triangle"}"#);
        assert_eq!(ms_body_from_json(bad.as_ptr(), &mut d), MsStatus::SchemaError);
        assert_eq!(ms_body_disk(0.0, 0.0, 1.0, &mut d), MsStatus::Ok);
        assert!(last_error().is_empty());
        ms_body_free(d);
        ms_body_free(ptr::null_mut());
        ms_string_free(ptr::null_mut());
    }
}

#[test]
fn decide_through_the_abi() {
    unsafe {
        let t = c(LINES);
        let mut out = ptr::null_mut();
        let s = c(r#"{"kind":"disk","center":[0,0],"radius":0.49}"#);
        assert_eq!(ms_decide_json(s.as_ptr(), t.as_ptr(), &mut out), MsStatus::Ok);
        assert!(take(out).contains(r#""status":"SS""#));
        let s = c(r#"{"kind":"disk","center":[0,0],"radius":0.51}"#);
        assert_eq!(ms_decide_json(s.as_ptr(), t.as_ptr(), &mut out), MsStatus::Ok);
        assert!(take(out).contains(r#""status":"NotSS""#));
    }
}

#[test]
fn scenarios_through_the_abi() {
    unsafe {
        let mut out = ptr::null_mut();
        let missing = c(&format!(r#"{{"task":"decide","trajectory":{LINES}}}"#));
        assert_eq!(ms_run_scenario(missing.as_ptr(), ptr::null(), &mut out), MsStatus::SchemaError);
        assert!(last_error().contains("spectrum"));

        let dir = tempfile::tempdir().unwrap();
        let d = c(dir.path().to_str().unwrap());
        let emit = c(&format!(r#"{{"task":"emit","N":64,"trajectory":{LINES}}}"#));
        assert_eq!(ms_run_scenario(emit.as_ptr(), d.as_ptr(), &mut out), MsStatus::Ok);
        assert!(take(out).contains("trajectory.csv"));
        assert!(dir.path().join("trajectory.csv").exists());
    }
}

#[test]
fn counting_alpha_and_version() {
    unsafe {
        let mut set = ptr::null_mut();
        let j = c(r#"{"kind":"lattice","basis":[[1,0],[0,1]]}"#);
        assert_eq!(ms_set_from_json(j.as_ptr(), &mut set), MsStatus::Ok);
        let mut n = 0u64;
        assert_eq!(ms_counting(set, 2.5, &mut n), MsStatus::Ok);
        assert_eq!(n, 21);
        ms_set_free(set);

        let (mut a, mut se) = (0.0, 0.0);
        assert_eq!(ms_estimate_alpha(100_000, 5, &mut a, &mut se), MsStatus::Ok);
        assert!((a - 0.874019).abs() < 5.0 * se);
        assert_eq!(ms_estimate_alpha(10, 5, &mut a, &mut se), MsStatus::ModuleError);

        let v = CStr::from_ptr(ms_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/mobsamp.h")).unwrap();
    for name in [
        "typedef struct MsBody MsBody",
        "MS_STATUS_OK",
        "ms_support",
        "ms_decide_json",
        "ms_run_scenario",
        "ms_counting",
        "ms_estimate_alpha",
        "ms_string_free",
        "ms_last_error_message",
        "ms_version",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}
