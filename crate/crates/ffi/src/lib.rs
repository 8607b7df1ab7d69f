//! C ABI over `gelfree`.
//!
//! Every fallible function returns a [`GfStatus`] and writes results through
//! out-pointers. Objects are opaque handles created by `*_new` or
//! `gf_measure_*` constructors and released with the matching `*_free`.
//! After a non-OK status, `gf_last_error_message` describes the failure on
//! the calling thread.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gelfree::config::parse_measure;
use gelfree::massflow::{ParticleSystem, RunLimits};
use gelfree::selfsimilar::{lambert_w, SelfSimilarProfile};
use gelfree::{Characteristics, CoreError, LaplaceEvaluator, MeasureSpec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Measure = 3,
    PastSingularity = 4,
    Convergence = 5,
    OracleInconsistency = 6,
    Stalled = 7,
    ExplosionDetected = 8,
    Config = 9,
    Io = 10,
    Panic = 11,
}

/// Transform family values at one `s`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GfTransform {
    pub s: f64,
    pub l0: f64,
    pub l0_prime: f64,
    pub l1: f64,
    pub l1_prime: f64,
}

pub struct GfMeasure(MeasureSpec);

pub struct GfEvaluator(LaplaceEvaluator);

pub struct GfProfile(SelfSimilarProfile);

pub struct GfSimulation(ParticleSystem);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &CoreError) -> GfStatus {
    match err {
        CoreError::Domain(_) => GfStatus::Domain,
        CoreError::Measure(_) => GfStatus::Measure,
        CoreError::PastSingularity { .. } => GfStatus::PastSingularity,
        CoreError::Convergence(_) => GfStatus::Convergence,
        CoreError::OracleInconsistency { .. } => GfStatus::OracleInconsistency,
        CoreError::Stalled { .. } => GfStatus::Stalled,
        CoreError::ExplosionDetected { .. } => GfStatus::ExplosionDetected,
        CoreError::Config(_) => GfStatus::Config,
        CoreError::Io(_) => GfStatus::Io,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), CoreError>>(f: F) -> GfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            GfStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".to_string());
            GfStatus::Panic
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            set_error(format!("null pointer: {}", stringify!($p)));
            return GfStatus::NullPointer;
        })+
    };
}

fn boxed<T>(out: *mut *mut T, value: T) {
    // SAFETY: callers check `out` for null before calling.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes) and returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn gf_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a measure from a description such as `"exp:2"` or
/// `"atomic:1@0.5,2@0.5"`.
///
/// # Safety
/// `spec` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_measure_parse(spec: *const c_char, out: *mut *mut GfMeasure) -> GfStatus {
    non_null!(spec, out);
    guard(|| {
        let text = CStr::from_ptr(spec).to_str().map_err(|_| CoreError::Config("measure is not UTF-8".into()))?;
        boxed(out, GfMeasure(parse_measure(text)?));
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_measure_monodisperse(out: *mut *mut GfMeasure) -> GfStatus {
    non_null!(out);
    guard(|| {
        boxed(out, GfMeasure(MeasureSpec::monodisperse()));
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_measure_exponential(rate: f64, out: *mut *mut GfMeasure) -> GfStatus {
    non_null!(out);
    guard(|| {
        boxed(out, GfMeasure(MeasureSpec::exponential(rate)?));
        Ok(())
    })
}

/// Density `(n - 1) c^{n-1} x^{-n}` on `(c, ∞)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_measure_power_tail(exponent: u32, cut: f64, out: *mut *mut GfMeasure) -> GfStatus {
    non_null!(out);
    guard(|| {
        boxed(out, GfMeasure(MeasureSpec::power_tail(exponent, cut)?));
        Ok(())
    })
}

/// Atomic measure with weights summing to one.
///
/// # Safety
/// `masses` and `weights` must be valid for `n` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_measure_atomic(
    masses: *const f64,
    weights: *const f64,
    n: usize,
    out: *mut *mut GfMeasure,
) -> GfStatus {
    non_null!(masses, weights, out);
    guard(|| {
        let m = std::slice::from_raw_parts(masses, n);
        let w = std::slice::from_raw_parts(weights, n);
        let atoms: Vec<(f64, f64)> = m.iter().copied().zip(w.iter().copied()).collect();
        boxed(out, GfMeasure(MeasureSpec::atomic(&atoms)?));
        Ok(())
    })
}

/// # Safety
/// `measure` must come from a `gf_measure_*` constructor; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gf_measure_transform(measure: *const GfMeasure, s: f64, out: *mut GfTransform) -> GfStatus {
    non_null!(measure, out);
    guard(|| {
        let tv = (*measure).0.eval_transform(s)?;
        *out = GfTransform { s: tv.s, l0: tv.l0, l0_prime: tv.l0_prime, l1: tv.l1, l1_prime: tv.l1_prime };
        Ok(())
    })
}

/// # Safety
/// `measure` must be null or a live handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn gf_measure_free(measure: *mut GfMeasure) {
    if !measure.is_null() {
        drop(Box::from_raw(measure));
    }
}

/// Exact solution for the given initial measure (copied) and `k > 0`.
///
/// # Safety
/// `measure` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_evaluator_new(measure: *const GfMeasure, k: f64, out: *mut *mut GfEvaluator) -> GfStatus {
    non_null!(measure, out);
    guard(|| {
        boxed(out, GfEvaluator(LaplaceEvaluator::new((*measure).0.clone(), k)?));
        Ok(())
    })
}

/// `L(t, s)` for `t > 0`, `s >= 0`.
///
/// # Safety
/// `ev` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_evaluator_l(ev: *const GfEvaluator, t: f64, s: f64, out: *mut f64) -> GfStatus {
    non_null!(ev, out);
    guard(|| {
        *out = (*ev).0.l(t, s)?;
        Ok(())
    })
}

/// `∂_s L(t, 0)`, minus the first moment of `ν(t)`.
///
/// # Safety
/// `ev` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_evaluator_dl_ds_at_zero(ev: *const GfEvaluator, t: f64, out: *mut f64) -> GfStatus {
    non_null!(ev, out);
    guard(|| {
        *out = (*ev).0.dl_ds_at_zero(t)?;
        Ok(())
    })
}

/// Hitting time `T(s)` of the characteristic started at `s`.
///
/// # Safety
/// `ev` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_evaluator_time_to_axis(ev: *const GfEvaluator, s: f64, out: *mut f64) -> GfStatus {
    non_null!(ev, out);
    guard(|| {
        let chars: &Characteristics = (*ev).0.characteristics();
        *out = chars.time_to_axis(s)?;
        Ok(())
    })
}

/// # Safety
/// `ev` must be null or a live handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn gf_evaluator_free(ev: *mut GfEvaluator) {
    if !ev.is_null() {
        drop(Box::from_raw(ev));
    }
}

/// Self-similar profile for `k > 0`; `order` is the Gaver–Stehfest order
/// (even, 8 to 18) or 0 for the default.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_profile_new(k: f64, order: u32, out: *mut *mut GfProfile) -> GfStatus {
    non_null!(out);
    guard(|| {
        let p = if order == 0 { SelfSimilarProfile::new(k)? } else { SelfSimilarProfile::with_order(k, order as usize)? };
        boxed(out, GfProfile(p));
        Ok(())
    })
}

/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_profile_l_star(p: *const GfProfile, s: f64, out: *mut f64) -> GfStatus {
    non_null!(p, out);
    guard(|| {
        *out = (*p).0.l_star(s)?;
        Ok(())
    })
}

/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_profile_m_star(p: *const GfProfile, x: f64, out: *mut f64) -> GfStatus {
    non_null!(p, out);
    guard(|| {
        *out = (*p).0.m_star(x)?;
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a live handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn gf_profile_free(p: *mut GfProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Principal branch `W(z)` for `z >= 0`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_lambert_w(z: f64, out: *mut f64) -> GfStatus {
    non_null!(out);
    guard(|| {
        *out = lambert_w(z)?;
        Ok(())
    })
}

/// `n`-particle mass-flow system sampled from `measure`.
///
/// # Safety
/// `measure` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_simulation_new(
    measure: *const GfMeasure,
    n: usize,
    k: f64,
    seed: u64,
    out: *mut *mut GfSimulation,
) -> GfStatus {
    non_null!(measure, out);
    guard(|| {
        boxed(out, GfSimulation(ParticleSystem::init_from_measure(&(*measure).0, n, k, seed)?));
        Ok(())
    })
}

/// Advances to `t_end`. `event_cap == 0` keeps the default cap. Returns
/// `ExplosionDetected` when the mean mass exceeds 1000 times its initial
/// value or the cap is hit; the handle stays usable for inspection.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gf_simulation_run_until(sim: *mut GfSimulation, t_end: f64, event_cap: u64) -> GfStatus {
    non_null!(sim);
    guard(|| {
        let mut limits = RunLimits::default();
        if event_cap > 0 {
            limits.event_cap = Some(event_cap);
        }
        (*sim).0.run_until(t_end, &[], &[], &limits)?;
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_simulation_time(sim: *const GfSimulation, out: *mut f64) -> GfStatus {
    non_null!(sim, out);
    *out = (*sim).0.time();
    GfStatus::Ok
}

/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_simulation_event_count(sim: *const GfSimulation, out: *mut u64) -> GfStatus {
    non_null!(sim, out);
    *out = (*sim).0.event_count();
    GfStatus::Ok
}

/// Empirical first moment `(1/N) Σ x_i`.
///
/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gf_simulation_mean(sim: *const GfSimulation, out: *mut f64) -> GfStatus {
    non_null!(sim, out);
    *out = (*sim).0.mean_mass();
    GfStatus::Ok
}

/// Empirical transform `(1/N) Σ e^{-s x_i}` and, if `std_error` is not
/// null, its standard error.
///
/// # Safety
/// `sim` must be a live handle; `out` must be writable; `std_error` may be
/// null.
#[no_mangle]
pub unsafe extern "C" fn gf_simulation_empirical_laplace(
    sim: *const GfSimulation,
    s: f64,
    out: *mut f64,
    std_error: *mut f64,
) -> GfStatus {
    non_null!(sim, out);
    guard(|| {
        let (v, se) = (*sim).0.empirical_laplace_with_se(s)?;
        *out = v;
        if !std_error.is_null() {
            *std_error = se;
        }
        Ok(())
    })
}

/// # Safety
/// `sim` must be null or a live handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn gf_simulation_free(sim: *mut GfSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}
