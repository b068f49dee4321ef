//! C ABI over strichlab.
//!
//! Every function returns an `SlStatus`; results go through out-pointers.
//! Handles are opaque and owned by the caller until passed to the matching `_free`.
//! The message of the last failure on the calling thread is available from
//! `sl_last_error`.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use strichlab::airy::{ai, airy_zeros, Branch};
use strichlab::cusp::{billiard_iterate, CuspConfig, CuspModel, PhaseSpacePoint};
use strichlab::normlab::lr_norm;
use strichlab::params::{loss_exponent, make_params, SemiclassicalParams};

/// Status codes; 0 is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numeric = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

/// Values of the `sign` argument of `sl_billiard`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlSign {
    Plus = 1,
    Minus = -1,
}

/// A point (y, t; eta, tau) of the boundary cotangent bundle.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlPoint {
    pub y: f64,
    pub t: f64,
    pub eta: f64,
    pub tau: f64,
}

/// Opaque: coupled scales (h, epsilon, c0) of one experiment.
pub struct SlParams(SemiclassicalParams);

/// Opaque: cusp field model built from an `SlParams`.
pub struct SlCuspModel(CuspModel);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: SlStatus, msg: impl Into<String>) -> SlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
    status
}

fn guard(f: impl FnOnce() -> SlStatus) -> SlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(SlStatus::Panic, "panic inside strichlab"),
    }
}

macro_rules! deref {
    ($p:expr) => {
        match unsafe { $p.as_ref() } {
            Some(v) => v,
            None => return fail(SlStatus::NullPointer, concat!(stringify!($p), " is null")),
        }
    };
}

macro_rules! deref_mut {
    ($p:expr) => {
        match unsafe { $p.as_mut() } {
            Some(v) => v,
            None => return fail(SlStatus::NullPointer, concat!(stringify!($p), " is null")),
        }
    };
}

/// Copies the last error message (NUL-terminated, truncated to `cap`) and
/// stores its full byte length in `len` when non-null.
///
/// # Safety
/// `buf` must point to `cap` writable bytes or be null with `cap == 0`.
#[no_mangle]
pub unsafe extern "C" fn sl_last_error(buf: *mut c_char, cap: usize, len: *mut usize) -> SlStatus {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if let Some(l) = unsafe { len.as_mut() } {
            *l = msg.len();
        }
        if cap == 0 {
            return SlStatus::Ok;
        }
        if buf.is_null() {
            return SlStatus::NullPointer;
        }
        let n = msg.len().min(cap - 1);
        unsafe {
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        if n < msg.len() {
            SlStatus::BufferTooSmall
        } else {
            SlStatus::Ok
        }
    })
}

/// Ai(z).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_airy_ai(z: f64, out: *mut f64) -> SlStatus {
    guard(|| {
        let out = deref_mut!(out);
        if !z.is_finite() {
            return fail(SlStatus::InvalidArgument, format!("z = {z} is not finite"));
        }
        *out = ai(z);
        SlStatus::Ok
    })
}

/// The first `count` positive zeros ω_k of Ai(-ω), increasing.
///
/// # Safety
/// `out` must point to `count` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sl_airy_zeros(count: usize, out: *mut f64) -> SlStatus {
    guard(|| {
        if out.is_null() {
            return fail(SlStatus::NullPointer, "out is null");
        }
        match airy_zeros(count) {
            Ok(z) => {
                unsafe { std::ptr::copy_nonoverlapping(z.values.as_ptr(), out, count) };
                SlStatus::Ok
            }
            Err(e) => fail(SlStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// β(r), the loss exponent at the sharp wave pair (r > 4).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_loss_exponent(r: f64, out: *mut f64) -> SlStatus {
    guard(|| {
        let out = deref_mut!(out);
        match loss_exponent(r) {
            Ok(l) => {
                *out = l.beta_loss;
                SlStatus::Ok
            }
            Err(e) => fail(SlStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Applies the billiard map `n` times; `sign` is `SL_SIGN_PLUS` or `SL_SIGN_MINUS`.
///
/// # Safety
/// `p` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sl_billiard(p: *const SlPoint, sign: i32, n: u32, out: *mut SlPoint) -> SlStatus {
    guard(|| {
        let p = deref!(p);
        let out = deref_mut!(out);
        let branch = match sign {
            s if s == SlSign::Plus as i32 => Branch::Plus,
            s if s == SlSign::Minus as i32 => Branch::Minus,
            s => return fail(SlStatus::InvalidArgument, format!("sign must be 1 or -1, got {s}")),
        };
        let q = PhaseSpacePoint { y: p.y, t: p.t, eta: p.eta, tau: p.tau };
        match billiard_iterate(&q, n, branch) {
            Ok(r) => {
                *out = SlPoint { y: r.y, t: r.t, eta: r.eta, tau: r.tau };
                SlStatus::Ok
            }
            Err(e) => fail(SlStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Builds parameters with δ = (1 - epsilon)/2.
///
/// # Safety
/// `out` must be a valid pointer; on success `*out` owns a handle.
#[no_mangle]
pub unsafe extern "C" fn sl_params_new(h: f64, epsilon: f64, c0: f64, out: *mut *mut SlParams) -> SlStatus {
    guard(|| {
        let out = deref_mut!(out);
        *out = std::ptr::null_mut();
        match make_params(h, epsilon, c0) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(SlParams(p)));
                SlStatus::Ok
            }
            Err(e) => fail(SlStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// λ, a and the reflection count N of a parameter set.
///
/// # Safety
/// `params` must come from `sl_params_new`; out-pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn sl_params_scales(
    params: *const SlParams,
    lambda: *mut f64,
    a: *mut f64,
    n_reflections: *mut u32,
) -> SlStatus {
    guard(|| {
        let p = &deref!(params).0;
        unsafe {
            if let Some(v) = lambda.as_mut() {
                *v = p.lambda;
            }
            if let Some(v) = a.as_mut() {
                *v = p.a;
            }
            if let Some(v) = n_reflections.as_mut() {
                *v = p.n_reflections;
            }
        }
        SlStatus::Ok
    })
}

/// # Safety
/// `params` must come from `sl_params_new` (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sl_params_free(params: *mut SlParams) {
    if !params.is_null() {
        drop(unsafe { Box::from_raw(params) });
    }
}

/// Cusp model with default numerical settings.
///
/// # Safety
/// `params` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_cusp_new(params: *const SlParams, out: *mut *mut SlCuspModel) -> SlStatus {
    guard(|| {
        let p = &deref!(params).0;
        let out = deref_mut!(out);
        *out = std::ptr::null_mut();
        match CuspModel::new(p, &CuspConfig::default()) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(SlCuspModel(m)));
                SlStatus::Ok
            }
            Err(e) => fail(SlStatus::Numeric, e.to_string()),
        }
    })
}

/// # Safety
/// `model` must come from `sl_cusp_new` (or be null) and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sl_cusp_free(model: *mut SlCuspModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// ‖u^n(t)‖_{L^r} over the model grid.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_cusp_norm(model: *const SlCuspModel, n: u32, t: f64, r: f64, out: *mut f64) -> SlStatus {
    guard(|| {
        let m = &deref!(model).0;
        let out = deref_mut!(out);
        let f = match m.field(n, t) {
            Ok(f) => f,
            Err(e) => return fail(SlStatus::Numeric, e.to_string()),
        };
        match lr_norm(&f, r) {
            Ok(v) => {
                *out = v;
                SlStatus::Ok
            }
            Err(e) => fail(SlStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// u^n(t) on the model grid, row-major in x, as separate real and imaginary
/// parts. With `cap` smaller than nx*ny (or null buffers) only the shape is
/// reported and the call returns `BufferTooSmall`.
///
/// # Safety
/// `re` and `im` must point to `cap` writable doubles; `nx`, `ny` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sl_cusp_field(
    model: *const SlCuspModel,
    n: u32,
    t: f64,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
    nx: *mut usize,
    ny: *mut usize,
) -> SlStatus {
    guard(|| {
        let m = &deref!(model).0;
        let nx = deref_mut!(nx);
        let ny = deref_mut!(ny);
        let f = match m.field(n, t) {
            Ok(f) => f,
            Err(e) => return fail(SlStatus::Numeric, e.to_string()),
        };
        *nx = f.grid.nx;
        *ny = f.grid.ny;
        let len = f.values.len();
        if re.is_null() || im.is_null() || cap < len {
            return fail(SlStatus::BufferTooSmall, format!("field needs {len} values, buffer holds {cap}"));
        }
        let (re, im) = unsafe { (std::slice::from_raw_parts_mut(re, len), std::slice::from_raw_parts_mut(im, len)) };
        for ((r, i), v) in re.iter_mut().zip(im.iter_mut()).zip(&f.values) {
            *r = v.re;
            *i = v.im;
        }
        SlStatus::Ok
    })
}
