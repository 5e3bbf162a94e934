use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use relshap::harness::{preset, Preset};
use relshap_ffi::*;

fn example_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    preset(Preset::Example1).write_to(dir.path()).unwrap();
    dir
}

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = rs_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

struct Handles {
    inst: *mut RsInstance,
    ctx: *mut RsContext,
}

impl Drop for Handles {
    fn drop(&mut self) {
        unsafe {
            rs_context_free(self.ctx);
            rs_instance_free(self.inst);
        }
    }
}

fn open(dir: &Path, evaluator: RsEvaluator) -> Handles {
    let schema = cstr(dir.join("schema.json").to_str().unwrap());
    let query = std::fs::read_to_string(dir.join("query.json")).unwrap();
    let query = cstr(&query);
    let mut h = Handles {
        inst: ptr::null_mut(),
        ctx: ptr::null_mut(),
    };
    unsafe {
        assert_eq!(rs_instance_load(schema.as_ptr(), &mut h.inst), RsStatus::Ok);
        assert_eq!(
            rs_context_new(h.inst, query.as_ptr(), evaluator, &mut h.ctx),
            RsStatus::Ok
        );
    }
    h
}

#[test]
fn exact_and_estimate_through_the_abi() {
    let dir = example_dir();
    let h = open(dir.path(), RsEvaluator::Compiled);
    unsafe {
        let mut n = 0usize;
        assert_eq!(rs_context_player_count(h.ctx, &mut n), RsStatus::Ok);
        assert_eq!(n, 6);
        let mut full = 0.0;
        assert_eq!(rs_context_full_value(h.ctx, &mut full), RsStatus::Ok);
        assert!((full - 2319.5).abs() < 1e-9);

        let mut t = 0u32;
        let r = cstr("orders#0");
        assert_eq!(rs_instance_resolve(h.inst, r.as_ptr(), &mut t), RsStatus::Ok);
        assert_eq!(t, 10);

        let mut v = 0.0;
        assert_eq!(rs_exact(h.ctx, t, RsExactMethod::Subset, &mut v), RsStatus::Ok);
        assert!((v - 2319.5 / 3.0).abs() < 1e-9);
        assert_eq!(rs_exact(h.ctx, t, RsExactMethod::Banzhaf, &mut v), RsStatus::Ok);
        assert!((v - 579.875).abs() < 1e-9);

        let cfg = cstr(r#"{"method":"rss","budget":400,"seed":3}"#);
        let mut report: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(rs_estimate(h.ctx, t, cfg.as_ptr(), &mut v, &mut report), RsStatus::Ok);
        assert!(!report.is_null());
        let json: serde_json::Value =
            serde_json::from_str(CStr::from_ptr(report).to_str().unwrap()).unwrap();
        assert_eq!(json["value"].as_f64().unwrap(), v);
        assert_eq!(json["samples_used"], 400);
        rs_string_free(report);
    }
}

#[test]
fn the_instance_may_be_freed_before_the_context() {
    let dir = example_dir();
    let mut h = open(dir.path(), RsEvaluator::Naive);
    unsafe {
        rs_instance_free(h.inst);
        h.inst = ptr::null_mut();
        let mut full = 0.0;
        assert_eq!(rs_context_full_value(h.ctx, &mut full), RsStatus::Ok);
        assert!((full - 2319.5).abs() < 1e-9);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let dir = example_dir();
    let h = open(dir.path(), RsEvaluator::Compiled);
    unsafe {
        let mut inst = ptr::null_mut();
        let missing = cstr("/nonexistent/schema.json");
        assert_eq!(rs_instance_load(missing.as_ptr(), &mut inst), RsStatus::Io);
        assert!(last_error().contains("nonexistent"));
        assert_eq!(rs_instance_load(ptr::null(), &mut inst), RsStatus::NullArgument);

        let mut ctx = ptr::null_mut();
        let bad = cstr("{ not json");
        assert_eq!(rs_context_new(h.inst, bad.as_ptr(), RsEvaluator::Naive, &mut ctx), RsStatus::Parse);

        let mut v = 0.0;
        let cfg = cstr(r#"{"method":"arss","budget":0}"#);
        assert_eq!(rs_estimate(h.ctx, 10, cfg.as_ptr(), &mut v, ptr::null_mut()), RsStatus::Invalid);
        assert!(last_error().contains("budget"));
        let cfg = cstr(r#"{"method":"nope","budget":10}"#);
        assert_eq!(rs_estimate(h.ctx, 10, cfg.as_ptr(), &mut v, ptr::null_mut()), RsStatus::Parse);
        assert_eq!(rs_exact(h.ctx, 999, RsExactMethod::Subset, &mut v), RsStatus::Invalid);

        // a successful call clears the message
        assert_eq!(rs_exact(h.ctx, 10, RsExactMethod::Subset, &mut v), RsStatus::Ok);
        assert!(rs_last_error().is_null());

        rs_instance_free(ptr::null_mut());
        rs_context_free(ptr::null_mut());
        rs_string_free(ptr::null_mut());
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/relshap.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["rs_instance_load", "rs_context_new", "rs_exact", "rs_estimate", "rs_last_error", "RS_STATUS_CAP_EXCEEDED"] {
        assert!(text.contains(sym), "header lacks {sym}");
    }
    // Syntax-check with the system C compiler when one is present.
    let Ok(out) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-std=c99"])
        .arg(&header)
        .output()
    else {
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
