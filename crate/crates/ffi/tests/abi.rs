use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use ableak_ffi::*;

fn channel(probs: &[f64], rows: usize, cols: usize) -> *mut AbleakChannel {
    let mut out = ptr::null_mut();
    let status = unsafe { ableak_channel_new(probs.as_ptr(), rows, cols, 1e-9, &mut out) };
    assert_eq!(status, AbleakStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let needed = unsafe { ableak_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0 as std::ffi::c_char; needed];
    unsafe { ableak_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn empty_report() -> AbleakReport {
    AbleakReport { value_nats: f64::NAN, maximizing_x_prime: usize::MAX, iterations: 0, certified_gap: 0.0, converged: false }
}

#[test]
fn handle_lifecycle_and_shape() {
    let ch = channel(&[0.5, 0.25, 0.25, 0.0, 0.5, 0.5], 2, 3);
    unsafe {
        assert_eq!(ableak_channel_rows(ch), 2);
        assert_eq!(ableak_channel_cols(ch), 3);
        ableak_channel_free(ch);
        ableak_channel_free(ptr::null_mut());
        assert_eq!(ableak_channel_rows(ptr::null()), 0);
    }
}

#[test]
fn closed_forms_match_the_library() {
    let ch = channel(&[0.8, 0.2, 0.2, 0.8], 2, 2);
    let mut v = 0.0;
    unsafe {
        assert_eq!(ableak_ldp(ch, &mut v), AbleakStatus::Ok);
        assert_eq!(v, 4f64.ln());
        assert_eq!(ableak_maximal_leakage(ch, &mut v), AbleakStatus::Ok);
        assert!((v - 1.6f64.ln()).abs() < 1e-15);
        assert_eq!(ableak_lrdp(ch, 2.0, &mut v), AbleakStatus::Ok);
        assert!((v - 3.25f64.ln()).abs() < 1e-14);
        assert_eq!(ableak_lrdp_variant(ch, 2.0, &mut v), AbleakStatus::Ok);
        assert!((v - 0.5 * 4f64.ln()).abs() < 1e-15);
        assert_eq!(ableak_shannon_capacity(ch, 0.0, &mut v), AbleakStatus::Ok);
        assert!(v > 0.19 && v < 0.2);
        ableak_channel_free(ch);
    }
}

#[test]
fn infinite_orders_are_ieee_infinity() {
    let ch = channel(&[0.8, 0.2, 0.2, 0.8], 2, 2);
    let mut report = empty_report();
    let mut p = [f64::NAN; 2];
    unsafe {
        let status = ableak_maximal_alpha_beta_leakage(ch, f64::INFINITY, f64::INFINITY, 0.0, &mut report, p.as_mut_ptr());
        assert_eq!(status, AbleakStatus::Ok);
        assert_eq!(report.value_nats, 4f64.ln());
        assert_eq!(p, [0.0, 1.0]);
        assert_eq!(ableak_maximal_alpha_leakage(ch, f64::INFINITY, 0.0, &mut report), AbleakStatus::Ok);
        assert!((report.value_nats - 1.6f64.ln()).abs() < 1e-15);
        assert_eq!(ableak_maximal_alpha_beta_leakage(ch, f64::NAN, 1.0, 0.0, &mut report, ptr::null_mut()), AbleakStatus::InvalidOrder);
        ableak_channel_free(ch);
    }
}

#[test]
fn optimizer_path_reports_diagnostics() {
    let ch = channel(&[0.5, 0.3, 0.2, 0.1, 0.2, 0.7, 0.3, 0.3, 0.4], 3, 3);
    let mut report = empty_report();
    unsafe {
        assert_eq!(ableak_maximal_alpha_beta_leakage(ch, 4.0, 2.0, 1e-10, &mut report, ptr::null_mut()), AbleakStatus::Ok);
        assert!(report.converged && report.certified_gap <= 1e-10 && report.value_nats > 0.0);
        let mut tau = empty_report();
        assert_eq!(ableak_alpha_tau_leakage(ch, 3.0, 1.0, 0.0, &mut tau), AbleakStatus::Ok);
        let mut mal = empty_report();
        assert_eq!(ableak_maximal_alpha_leakage(ch, 3.0, 0.0, &mut mal), AbleakStatus::Ok);
        assert_eq!(tau.value_nats, mal.value_nats);
        assert_eq!(ableak_alpha_tau_leakage(ch, 3.0, 1.5, 0.0, &mut tau), AbleakStatus::InvalidParameter);
        ableak_channel_free(ch);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut out = ptr::null_mut();
    unsafe {
        let bad = [0.5, 0.6, 0.5, 0.5];
        assert_eq!(ableak_channel_new(bad.as_ptr(), 2, 2, 1e-9, &mut out), AbleakStatus::NotStochastic);
        assert!(out.is_null());
        assert!(last_error().contains("row"));
        let neg = [1.5, -0.5];
        assert_eq!(ableak_channel_new(neg.as_ptr(), 1, 2, 1e-9, &mut out), AbleakStatus::InvalidEntry);
        assert_eq!(ableak_channel_new(ptr::null(), 1, 2, 1e-9, &mut out), AbleakStatus::NullPointer);
        let mut v = 0.0;
        assert_eq!(ableak_ldp(ptr::null(), &mut v), AbleakStatus::NullPointer);
        assert_eq!(last_error(), "channel is null");
        let path = CString::new("/nonexistent/channel.csv").unwrap();
        assert_eq!(ableak_channel_from_csv(path.as_ptr(), 1e-9, &mut out), AbleakStatus::IoError);
        // A successful call clears the message.
        let ch = channel(&[1.0], 1, 1);
        assert_eq!(ableak_ldp(ch, &mut v), AbleakStatus::Ok);
        assert_eq!(last_error(), "");
        ableak_channel_free(ch);
    }
}

#[test]
fn truncated_message_is_terminated() {
    let mut v = 0.0;
    unsafe { ableak_lrdp(ptr::null(), 2.0, &mut v) };
    let mut buf = [1 as std::ffi::c_char; 4];
    let needed = unsafe { ableak_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(needed, "channel is null".len() + 1);
    assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_bytes(), b"cha");
}

#[test]
fn non_convergence_still_reports_value() {
    let ch = channel(&[0.5, 0.3, 0.2, 0.1, 0.2, 0.7, 0.3, 0.3, 0.4], 3, 3);
    let mut report = empty_report();
    // A tolerance below rounding cannot be certified.
    let status = unsafe { ableak_maximal_alpha_beta_leakage(ch, 4.0, 2.0, 1e-300, &mut report, ptr::null_mut()) };
    assert_eq!(status, AbleakStatus::NotConverged);
    assert!(!report.converged && report.value_nats > 0.0);
    unsafe { ableak_channel_free(ch) };
}

#[test]
fn csv_loading() {
    let dir = std::env::temp_dir().join(format!("ableak-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("c.csv");
    std::fs::write(&file, "# a,b\n0.9,0.1\n0.1,0.9\n").unwrap();
    let path = CString::new(file.to_str().unwrap()).unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(ableak_channel_from_csv(path.as_ptr(), 1e-9, &mut out), AbleakStatus::Ok);
        assert_eq!(ableak_channel_cols(out), 2);
        ableak_channel_free(out);
    }
    std::fs::write(&file, "0.9,x\n").unwrap();
    assert_eq!(unsafe { ableak_channel_from_csv(path.as_ptr(), 1e-9, &mut out) }, AbleakStatus::ParseError);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn status_messages_are_static_strings() {
    for status in [AbleakStatus::Ok, AbleakStatus::NotConverged, AbleakStatus::Panic] {
        let text = unsafe { CStr::from_ptr(ableak_status_message(status)) };
        assert!(!text.to_bytes().is_empty());
    }
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn c_compiler() -> String {
    std::env::var("CC").unwrap_or_else(|_| "cc".to_string())
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let include = crate_dir().join("include");
    let source = crate_dir().join("tests/c/smoke.c");
    let status = Command::new(c_compiler())
        .args(["-std=c11", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&source)
        .status()
        .expect("a C compiler on PATH");
    assert!(status.success());
    let status = Command::new("c++")
        .args(["-x", "c++", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&source)
        .status()
        .expect("a C++ compiler on PATH");
    assert!(status.success());
}

/// Links the smoke program against the static library cargo places next to
/// the test binary's `deps` directory.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libableak_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let out_dir = std::env::temp_dir().join(format!("ableak-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&out_dir).unwrap();
    let binary = out_dir.join("smoke");
    let status = Command::new(c_compiler())
        .args(["-std=c11", "-I"])
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&binary)
        .status()
        .unwrap();
    assert!(status.success());
    let output = Command::new(&binary).output().unwrap();
    assert!(output.status.success(), "smoke exited with {:?}", output.status.code());
    assert_eq!(String::from_utf8(output.stdout).unwrap().trim(), "1.386294361120");
    std::fs::remove_dir_all(&out_dir).unwrap();
}
