//! C ABI over `gross-tower`.
//!
//! Instances are opaque handles built with [`gt_instance_new`] and released with
//! [`gt_instance_free`]. Every call returns a [`GtStatus`]; reports come back as JSON strings
//! owned by the library and released with [`gt_string_free`]. After a non-OK status,
//! [`gt_last_error`] describes the failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gross_tower::commands::{self, InstanceConfig, JsonReport};
use gross_tower::error::Error;

/// Status codes. 2, 3 and 4 agree with the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GtStatus {
    GtOk = 0,
    /// The command ran but some certificate or identity failed (see the report).
    GtCheckFailed = 1,
    GtInvalid = 2,
    GtNonexistent = 3,
    GtInternal = 4,
    GtNullPointer = 5,
    GtBadString = 6,
    GtBufferTooSmall = 7,
    GtPanic = 8,
}

/// An instance (N⁻, N⁺, p, m, D_K, c, M).
pub struct GtInstance {
    cfg: InstanceConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GtStatus {
    match e {
        Error::Invalid(_) => GtStatus::GtInvalid,
        Error::Nonexistent(_) => GtStatus::GtNonexistent,
        Error::Internal(_) => GtStatus::GtInternal,
    }
}

fn guard(f: impl FnOnce() -> GtStatus) -> GtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("panic inside gross-tower");
            GtStatus::GtPanic
        }
    }
}

unsafe fn opt_str<'a>(s: *const c_char) -> Result<Option<&'a str>, GtStatus> {
    if s.is_null() {
        return Ok(None);
    }
    match CStr::from_ptr(s).to_str() {
        Ok(x) => Ok(Some(x)),
        Err(_) => {
            set_error("argument is not valid UTF-8");
            Err(GtStatus::GtBadString)
        }
    }
}

/// Runs a command and hands back its JSON. On a library error the error JSON is returned too.
unsafe fn run(inst: *const GtInstance, out: *mut *mut c_char, f: impl FnOnce(&InstanceConfig) -> Result<(&'static str, JsonReport), (&'static str, Error)>) -> GtStatus {
    if out.is_null() {
        set_error("null pointer argument");
        return GtStatus::GtNullPointer;
    }
    *out = ptr::null_mut();
    if inst.is_null() {
        set_error("null pointer argument");
        return GtStatus::GtNullPointer;
    }
    let cfg = &(*inst).cfg;
    let (text, status) = match f(cfg) {
        Ok((_, r)) => {
            let st = if r.ok { GtStatus::GtOk } else { GtStatus::GtCheckFailed };
            if !r.ok {
                set_error("a certificate failed; see the report");
            }
            (r.to_json(), st)
        }
        Err((name, e)) => {
            set_error(&e.to_string());
            (commands::error_json(name, &e), status_of(&e))
        }
    };
    match CString::new(text) {
        Ok(c) => *out = c.into_raw(),
        Err(_) => return GtStatus::GtInternal,
    }
    status
}

/// Creates an instance. `d_k = 0` means no imaginary quadratic field; `precision = 0` picks the default.
///
/// # Safety
/// `out` must be a valid pointer to a `GtInstance *`.
#[no_mangle]
pub unsafe extern "C" fn gt_instance_new(n_minus: u64, n_plus: u64, p: u64, m_max: u32, d_k: i64, c: u64, precision: u32, out: *mut *mut GtInstance) -> GtStatus {
    guard(|| {
        if out.is_null() {
            set_error("null pointer argument");
            return GtStatus::GtNullPointer;
        }
        *out = ptr::null_mut();
        let precision = if precision == 0 { commands::DEFAULT_PRECISION } else { precision };
        let cfg = InstanceConfig { n_minus, n_plus, p, m_max, d_k: (d_k != 0).then_some(d_k as i128), c: c as i128, precision };
        if let Err(e) = cfg.validate() {
            set_error(&e.to_string());
            return status_of(&e);
        }
        *out = Box::into_raw(Box::new(GtInstance { cfg }));
        GtStatus::GtOk
    })
}

/// # Safety
/// `inst` must come from `gt_instance_new` (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gt_instance_free(inst: *mut GtInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Class counts and masses for every level m ≤ m_max.
///
/// # Safety
/// `inst` is a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gt_classset(inst: *const GtInstance, out: *mut *mut c_char) -> GtStatus {
    guard(|| run(inst, out, |cfg| commands::cmd_classset(cfg).map(|r| ("classset", r)).map_err(|e| ("classset", e))))
}

/// Hecke operator report at level m_max. `op` is one of "T", "U", "diamond", "Tnn".
///
/// # Safety
/// `inst` is a live handle, `op` a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gt_hecke(inst: *const GtInstance, op: *const c_char, param: i64, out: *mut *mut c_char) -> GtStatus {
    guard(|| {
        let op = match opt_str(op) {
            Ok(Some(s)) => s.to_string(),
            Ok(None) => {
                set_error("null pointer argument");
                return GtStatus::GtNullPointer;
            }
            Err(s) => return s,
        };
        run(inst, out, |cfg| {
            let o = commands::parse_op(&op, Some(param as i128)).map_err(|e| ("hecke", e))?;
            commands::cmd_hecke(cfg, o).map(|r| ("hecke", r)).map_err(|e| ("hecke", e))
        })
    })
}

/// Writes the Hecke matrix at level `m` (row-major, `matrix[target][source]`) into `buf`.
/// `dim` receives the dimension even when `cap` is too small.
///
/// # Safety
/// `buf` must hold `cap` elements (may be null when `cap = 0`); `dim` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gt_hecke_matrix(inst: *const GtInstance, op: *const c_char, param: i64, m: u32, buf: *mut i64, cap: usize, dim: *mut usize) -> GtStatus {
    guard(|| {
        if inst.is_null() || dim.is_null() || (buf.is_null() && cap > 0) {
            set_error("null pointer argument");
            return GtStatus::GtNullPointer;
        }
        let op = match opt_str(op) {
            Ok(Some(s)) => s,
            Ok(None) => {
                set_error("null pointer argument");
                return GtStatus::GtNullPointer;
            }
            Err(s) => return s,
        };
        let cfg = &(*inst).cfg;
        if m > cfg.m_max {
            set_error(&format!("level {m} exceeds m_max = {}", cfg.m_max));
            return GtStatus::GtInvalid;
        }
        let t = commands::parse_op(op, Some(param as i128)).and_then(|o| cfg.tower(m, cfg.precision).and_then(|st| st.level(m).hecke(o)));
        let t = match t {
            Ok(t) => t,
            Err(e) => {
                set_error(&e.to_string());
                return status_of(&e);
            }
        };
        let n = t.dim();
        *dim = n;
        if cap < n * n {
            set_error(&format!("buffer holds {cap} entries, need {}", n * n));
            return GtStatus::GtBufferTooSmall;
        }
        for (i, row) in t.matrix.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                *buf.add(i * n + j) = *x;
            }
        }
        GtStatus::GtOk
    })
}

/// Heegner family summary up to r_max; `ell = 0` uses the default auxiliary prime.
///
/// # Safety
/// `inst` is a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gt_heegner(inst: *const GtInstance, r_max: u32, ell: u64, out: *mut *mut c_char) -> GtStatus {
    guard(|| {
        run(inst, out, |cfg| {
            let ells: Vec<u64> = if ell == 0 { Vec::new() } else { vec![ell] };
            commands::cmd_heegner(cfg, r_max, &ells).map(|r| ("heegner", r)).map_err(|e| ("heegner", e))
        })
    })
}

/// Identity suites ("tower", "euler", "galois", comma separated, or "all"; null means "all").
///
/// # Safety
/// `inst` is a live handle, `suites` null or NUL-terminated, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gt_verify(inst: *const GtInstance, suites: *const c_char, ell: u64, out: *mut *mut c_char) -> GtStatus {
    guard(|| {
        let s = match opt_str(suites) {
            Ok(s) => s.unwrap_or("all").to_string(),
            Err(st) => return st,
        };
        run(inst, out, |cfg| {
            let suites = commands::parse_suites(&s).map_err(|e| ("verify", e))?;
            commands::cmd_verify(cfg, &suites, (ell != 0).then_some(ell)).map(|r| ("verify", r)).map_err(|e| ("verify", e))
        })
    })
}

/// Theta elements θ_n, n ≤ n_max. `eigensystem` is e.g. "2:-2,5:1"; null or empty picks one.
/// `r_max = 0` builds the family depth the layers need.
///
/// # Safety
/// `inst` is a live handle, `eigensystem` null or NUL-terminated, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gt_theta(inst: *const GtInstance, n_max: u32, eigensystem: *const c_char, r_max: u32, out: *mut *mut c_char) -> GtStatus {
    guard(|| {
        let s = match opt_str(eigensystem) {
            Ok(s) => s.unwrap_or("").to_string(),
            Err(st) => return st,
        };
        run(inst, out, |cfg| {
            let t = commands::parse_eigensystem(&s).map_err(|e| ("theta", e))?;
            commands::cmd_theta(cfg, n_max, &t, (r_max != 0).then_some(r_max)).map(|r| ("theta", r)).map_err(|e| ("theta", e))
        })
    })
}

/// # Safety
/// `s` must come from this library (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last non-OK status on this thread; valid until the next call on the thread.
#[no_mangle]
pub extern "C" fn gt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Output schema tag, e.g. "gross-tower/1". Static storage.
#[no_mangle]
pub extern "C" fn gt_schema() -> *const c_char {
    static SCHEMA: &CStr = c"gross-tower/1";
    SCHEMA.as_ptr()
}
