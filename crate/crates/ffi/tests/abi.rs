use std::ffi::{CStr, CString};
use std::ptr;

use gross_tower_ffi::*;
use serde_json::Value;

fn json(s: *mut std::ffi::c_char) -> Value {
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { gt_string_free(s) };
    serde_json::from_str(&text).unwrap()
}

fn desk() -> *mut GtInstance {
    let mut h = ptr::null_mut();
    let st = unsafe { gt_instance_new(2, 1, 5, 1, -11, 1, 0, &mut h) };
    assert_eq!(st, GtStatus::GtOk);
    assert!(!h.is_null());
    h
}

#[test]
fn rejects_even_parity() {
    let mut h = ptr::null_mut();
    let st = unsafe { gt_instance_new(15, 1, 7, 0, 0, 1, 0, &mut h) };
    assert_eq!(st, GtStatus::GtInvalid);
    assert!(h.is_null());
    let msg = unsafe { CStr::from_ptr(gt_last_error()) }.to_str().unwrap();
    assert!(msg.contains("even parity"), "{msg}");
}

#[test]
fn classset_and_matrix() {
    let h = desk();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { gt_classset(h, &mut s) }, GtStatus::GtOk);
    let v = json(s);
    assert_eq!(v["ok"], true);
    assert_eq!(v["schema"], "gross-tower/1");

    let op = CString::new("T").unwrap();
    let mut dim = 0usize;
    assert_eq!(unsafe { gt_hecke_matrix(h, op.as_ptr(), 3, 1, ptr::null_mut(), 0, &mut dim) }, GtStatus::GtBufferTooSmall);
    assert!(dim > 0);
    let mut buf = vec![0i64; dim * dim];
    assert_eq!(unsafe { gt_hecke_matrix(h, op.as_ptr(), 3, 1, buf.as_mut_ptr(), buf.len(), &mut dim) }, GtStatus::GtOk);
    for j in 0..dim {
        let col: i64 = (0..dim).map(|i| buf[i * dim + j]).sum();
        assert_eq!(col, 4);
    }
    unsafe { gt_instance_free(h) };
}

#[test]
fn verify_and_errors() {
    let h = desk();
    let mut s = ptr::null_mut();
    let suites = CString::new("galois").unwrap();
    assert_eq!(unsafe { gt_verify(h, suites.as_ptr(), 0, &mut s) }, GtStatus::GtOk);
    assert_eq!(json(s)["ok"], true);

    let bad = CString::new("bogus").unwrap();
    assert_eq!(unsafe { gt_verify(h, bad.as_ptr(), 0, &mut s) }, GtStatus::GtInvalid);
    let v = json(s);
    assert_eq!(v["ok"], false);
    assert_eq!(v["error"]["exit_code"], 2);

    assert_eq!(unsafe { gt_classset(ptr::null(), &mut s) }, GtStatus::GtNullPointer);
    assert!(s.is_null());
    unsafe { gt_instance_free(h) };
}

#[test]
fn theta_with_eigensystem() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { gt_instance_new(11, 1, 5, 1, -3, 1, 8, &mut h) }, GtStatus::GtOk);
    let es = CString::new("2:-2,5:1").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { gt_theta(h, 1, es.as_ptr(), 0, &mut s) }, GtStatus::GtOk);
    let v = json(s);
    assert_eq!(v["results"]["theta"][0]["element"]["coeffs"][0], 273719);
    assert_eq!(v["results"]["compatibility"][0], true);
    // no such eigenvalue
    let es = CString::new("2:4").unwrap();
    assert_eq!(unsafe { gt_theta(h, 1, es.as_ptr(), 0, &mut s) }, GtStatus::GtNonexistent);
    unsafe { gt_string_free(s) };
    // family too shallow for θ_1
    let es = CString::new("2:-2,5:1").unwrap();
    assert_eq!(unsafe { gt_theta(h, 1, es.as_ptr(), 1, &mut s) }, GtStatus::GtInvalid);
    let msg = unsafe { CStr::from_ptr(gt_last_error()) }.to_str().unwrap().to_string();
    assert!(msg.contains("d(n) = 2"), "{msg}");
    unsafe { gt_string_free(s) };
    unsafe { gt_instance_free(h) };
}

#[test]
fn schema_tag() {
    let s = unsafe { CStr::from_ptr(gt_schema()) }.to_str().unwrap();
    assert_eq!(s, gross_tower::commands::SCHEMA);
}

#[test]
fn header_is_valid_c() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/gross_tower.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["gt_instance_new", "gt_instance_free", "gt_classset", "gt_hecke", "gt_hecke_matrix", "gt_heegner", "gt_verify", "gt_theta", "gt_string_free", "gt_last_error"] {
        assert!(text.contains(&format!("{f}(")), "{f} missing from header");
    }
    let src = std::env::temp_dir().join(format!("gt_header_{}.c", std::process::id()));
    std::fs::write(&src, "#include \"gross_tower.h\"\nint main(void) { GtInstance *h = 0; return gt_instance_new(2, 1, 5, 1, -11, 1, 0, &h) == GT_OK ? 0 : 1; }\n").unwrap();
    let out = std::process::Command::new("cc").arg("-fsyntax-only").arg("-Wall").arg("-I").arg(dir.join("include")).arg(&src).output();
    let _ = std::fs::remove_file(&src);
    match out {
        Ok(o) => assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr)),
        Err(_) => eprintln!("no C compiler; skipped syntax check"),
    }
}
