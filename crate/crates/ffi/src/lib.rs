//! C interface to `curvecur`.
//!
//! Objects are opaque handles created by `curvecur_*_new`/`_parse` functions
//! and released with the matching `_free`. Every fallible call returns a
//! [`CurvecurStatus`]; on failure the message is available from
//! [`curvecur_last_error`] until the next failing call on the same thread.
//! Strings returned to the caller are freed with [`curvecur_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use curvecur::crossings::{intersection_number, self_intersection};
use curvecur::functionals::{CurveFunctional, HyperbolicLength, Value, WordLength};
use curvecur::hyperbolic::HolonomyRep;
use curvecur::stabilize::{stable_value, StableFunctional};
use curvecur::words::{fmt_rational, MultiCurve, SurfacePresentation};
use curvecur::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurvecurStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    UnknownSurface = 4,
    NotHyperbolic = 5,
    Unstable = 6,
    Budget = 7,
    MissingAxiom = 8,
    Unsupported = 9,
    Failed = 10,
    Panic = 11,
}

pub struct CurvecurMultiCurve(MultiCurve);

pub struct CurvecurRep(Arc<HolonomyRep>);

pub struct CurvecurFunctional(Arc<dyn CurveFunctional>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CurvecurStatus {
    match e {
        Error::Parse(_) | Error::UnknownGenerator(_) | Error::TrivialCurve | Error::WeightMismatch(..) => CurvecurStatus::Parse,
        Error::UnknownSurface(_) | Error::NoRepresentation(_) | Error::PresentationMismatch(..) => CurvecurStatus::UnknownSurface,
        Error::NotHyperbolic(_) => CurvecurStatus::NotHyperbolic,
        Error::Unstable { .. } => CurvecurStatus::Unstable,
        Error::BudgetExceeded { .. } => CurvecurStatus::Budget,
        Error::MissingAxiom(..) | Error::NotHomogeneous(_) => CurvecurStatus::MissingAxiom,
        Error::Unsupported(_) => CurvecurStatus::Unsupported,
        _ => CurvecurStatus::Failed,
    }
}

type Outcome = Result<(), CurvecurStatus>;

fn fail(e: Error) -> CurvecurStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn guard<F: FnOnce() -> Outcome>(f: F) -> CurvecurStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CurvecurStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            CurvecurStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, CurvecurStatus> {
    if p.is_null() {
        set_error("null string argument".into());
        return Err(CurvecurStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not UTF-8".into());
        CurvecurStatus::InvalidUtf8
    })
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, CurvecurStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null handle".into());
        CurvecurStatus::NullPointer
    })
}

unsafe fn put<T>(out: *mut T, v: T) -> Outcome {
    if out.is_null() {
        set_error("null output pointer".into());
        return Err(CurvecurStatus::NullPointer);
    }
    out.write(v);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Writes the value as a float and, when exact and `out_exact` is non-null,
/// as a `"p/q"` string (null otherwise).
unsafe fn put_value(v: &Value, out_value: *mut f64, out_exact: *mut *mut c_char) -> Outcome {
    put(out_value, v.to_f64())?;
    if !out_exact.is_null() {
        let s = v.exact().map_or(ptr::null_mut(), |r| owned_string(fmt_rational(r)));
        out_exact.write(s);
    }
    Ok(())
}

/// Message of the last failure on this thread, or null. Owned by the library.
#[no_mangle]
pub extern "C" fn curvecur_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn curvecur_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a multi-curve literal such as `"a; 1/2*aB"` on a built-in surface.
///
/// # Safety
/// `surface` and `literal` must be valid C strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn curvecur_multicurve_parse(
    surface: *const c_char,
    literal: *const c_char,
    out: *mut *mut CurvecurMultiCurve,
) -> CurvecurStatus {
    guard(|| {
        let pres = SurfacePresentation::builtin(text(surface)?).map_err(fail)?;
        let c = MultiCurve::parse(pres, text(literal)?).map_err(fail)?;
        put(out, Box::into_raw(Box::new(CurvecurMultiCurve(c))))
    })
}

/// # Safety
/// `c` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn curvecur_multicurve_free(c: *mut CurvecurMultiCurve) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Canonical text of a multi-curve; free with [`curvecur_string_free`].
///
/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn curvecur_multicurve_to_string(c: *const CurvecurMultiCurve) -> *mut c_char {
    match c.as_ref() {
        Some(c) => owned_string(c.0.to_string()),
        None => ptr::null_mut(),
    }
}

/// Built-in holonomy representation of a surface.
///
/// # Safety
/// `surface` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn curvecur_rep_builtin(surface: *const c_char, out: *mut *mut CurvecurRep) -> CurvecurStatus {
    guard(|| {
        let rep = HolonomyRep::builtin(text(surface)?).map_err(fail)?;
        put(out, Box::into_raw(Box::new(CurvecurRep(Arc::new(rep)))))
    })
}

/// Representation from its JSON description.
///
/// # Safety
/// `json` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn curvecur_rep_from_json(json: *const c_char, out: *mut *mut CurvecurRep) -> CurvecurStatus {
    guard(|| {
        let rep = HolonomyRep::from_json(text(json)?).map_err(fail)?;
        put(out, Box::into_raw(Box::new(CurvecurRep(Arc::new(rep)))))
    })
}

/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn curvecur_rep_free(r: *mut CurvecurRep) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Weighted hyperbolic length of a multi-curve.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn curvecur_hyperbolic_length(
    rep: *const CurvecurRep,
    curve: *const CurvecurMultiCurve,
    out: *mut f64,
) -> CurvecurStatus {
    guard(|| {
        let f = HyperbolicLength::new(handle(rep)?.0.clone());
        let v = f.evaluate(&handle(curve)?.0).map_err(fail)?;
        put(out, v.to_f64())
    })
}

/// Geometric intersection number of two closed curves given as words.
///
/// # Safety
/// `rep` must be live; `c`, `d` valid C strings; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curvecur_intersection_number(
    rep: *const CurvecurRep,
    c: *const c_char,
    d: *const c_char,
    radius: usize,
    out: *mut u64,
) -> CurvecurStatus {
    guard(|| {
        let rep = &handle(rep)?.0;
        let pres = rep.presentation();
        let class = |s: &str| pres.parse_word(s).and_then(|w| pres.canonical_form(&w));
        let cc = class(text(c)?).map_err(fail)?;
        let dd = class(text(d)?).map_err(fail)?;
        let n = intersection_number(&cc, &dd, rep, radius).map_err(fail)?;
        put(out, n as u64)
    })
}

/// Self-intersection number of a closed curve given as a word.
///
/// # Safety
/// `rep` must be live; `c` a valid C string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curvecur_self_intersection(
    rep: *const CurvecurRep,
    c: *const c_char,
    radius: usize,
    out: *mut u64,
) -> CurvecurStatus {
    guard(|| {
        let rep = &handle(rep)?.0;
        let pres = rep.presentation();
        let cc = pres.parse_word(text(c)?).and_then(|w| pres.canonical_form(&w)).map_err(fail)?;
        let n = self_intersection(&cc, rep, radius).map_err(fail)?;
        put(out, n as u64)
    })
}

/// Hyperbolic length as a functional handle.
///
/// # Safety
/// `rep` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curvecur_functional_hyperbolic_length(
    rep: *const CurvecurRep,
    out: *mut *mut CurvecurFunctional,
) -> CurvecurStatus {
    guard(|| {
        let f: Arc<dyn CurveFunctional> = Arc::new(HyperbolicLength::new(handle(rep)?.0.clone()));
        put(out, Box::into_raw(Box::new(CurvecurFunctional(f))))
    })
}

/// Word length for a comma-separated generating set such as `"a,aa,b"`.
///
/// # Safety
/// `surface` and `gens` must be valid C strings; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curvecur_functional_word_length(
    surface: *const c_char,
    gens: *const c_char,
    out: *mut *mut CurvecurFunctional,
) -> CurvecurStatus {
    guard(|| {
        let pres = SurfacePresentation::builtin(text(surface)?).map_err(fail)?;
        let f: Arc<dyn CurveFunctional> = Arc::new(WordLength::from_list(pres, text(gens)?).map_err(fail)?);
        put(out, Box::into_raw(Box::new(CurvecurFunctional(f))))
    })
}

/// Stabilization of `inner` using `n` powers. `inner` stays owned by the
/// caller.
///
/// # Safety
/// `inner` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn curvecur_functional_stabilize(
    inner: *const CurvecurFunctional,
    n: usize,
    out: *mut *mut CurvecurFunctional,
) -> CurvecurStatus {
    guard(|| {
        let s = StableFunctional::new(handle(inner)?.0.clone(), n).map_err(fail)?;
        put(out, Box::into_raw(Box::new(CurvecurFunctional(Arc::new(s)))))
    })
}

/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn curvecur_functional_free(f: *mut CurvecurFunctional) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Evaluates `f` on `curve`. `out_exact` may be null; otherwise it receives
/// the exact value as `"p/q"` or null for real-valued results.
///
/// # Safety
/// Handles must be live; `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn curvecur_functional_evaluate(
    f: *const CurvecurFunctional,
    curve: *const CurvecurMultiCurve,
    out_value: *mut f64,
    out_exact: *mut *mut c_char,
) -> CurvecurStatus {
    guard(|| {
        let v = handle(f)?.0.evaluate(&handle(curve)?.0).map_err(fail)?;
        put_value(&v, out_value, out_exact)
    })
}

/// Stable value `lim f(Cⁿ)/n` of a single closed curve from `n` powers;
/// `out_tail` receives 1 when the sequence became eventually linear.
///
/// # Safety
/// `f` must be live; `word` a valid C string; `out_value` and `out_tail`
/// writable; `out_exact` null or writable.
#[no_mangle]
pub unsafe extern "C" fn curvecur_stable_value(
    f: *const CurvecurFunctional,
    word: *const c_char,
    n: usize,
    out_value: *mut f64,
    out_exact: *mut *mut c_char,
    out_tail: *mut i32,
) -> CurvecurStatus {
    guard(|| {
        let f = &handle(f)?.0;
        let pres = f.surface();
        let c = pres.parse_word(text(word)?).and_then(|w| pres.canonical_form(&w)).map_err(fail)?;
        let e = stable_value(f.as_ref(), &c, n).map_err(fail)?;
        let v = match e.exact {
            Some(s) => Value::Exact(s),
            None => e.value,
        };
        put_value(&v, out_value, out_exact)?;
        put(out_tail, e.tail_detected as i32)
    })
}
