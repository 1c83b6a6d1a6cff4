//! C ABI for `hammersley-lab`.
//!
//! Every fallible function returns an [`HlStatus`] and writes its result
//! through an out-pointer. On failure a message is available from
//! [`hl_last_error_message`] until the next failing call on the same thread.
//! Handles ([`HlPointStore`], [`HlPotential`]) are opaque and must be released
//! with their `_free` function. Panics never cross the boundary; they are
//! reported as `HL_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use hammersley_lab::burgers::{entropy_solution, hopf_lax};
use hammersley_lab::experiments::{error_exponent, translation};
use hammersley_lab::hammersley::{evolve_event_driven, evolve_variational, LabelWindow, ParticleConfig};
use hammersley_lab::increasing_seq::{gamma, lis_in, lis_length, rate_i, Width};
use hammersley_lab::piecewise::{PiecewiseLinearFn, Potential};
use hammersley_lab::poisson_plane::{PlanarPoint, PointStore, Rectangle};
use hammersley_lab::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    LabelOutOfRange = 4,
    WindowExhausted = 5,
    Panic = 6,
}

/// Lazily realized Poisson field for one seed.
pub struct HlPointStore(PointStore);

/// Potential `V0` (antiderivative of a piecewise-linear density, `V0(0) = 0`).
pub struct HlPotential(Potential);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HlStatus {
    match e {
        Error::InvalidArgument(_) | Error::Config(_) | Error::OracleCap { .. } => HlStatus::InvalidArgument,
        Error::Domain(_) => HlStatus::Domain,
        Error::LabelOutOfRange { .. } => HlStatus::LabelOutOfRange,
        Error::WindowExhausted { .. } => HlStatus::WindowExhausted,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> HlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => HlStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            HlStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            HlStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates the Poisson field for `seed`.
///
/// # Safety
/// `out_store` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hl_point_store_new(seed: u64, out_store: *mut *mut HlPointStore) -> HlStatus {
    guard(|| {
        let slot = out(out_store, "out_store")?;
        *slot = Box::into_raw(Box::new(HlPointStore(PointStore::new(seed))));
        Ok(())
    })
}

/// Releases a store; NULL is ignored.
///
/// # Safety
/// `store` must come from [`hl_point_store_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hl_point_store_free(store: *mut HlPointStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Longest strictly increasing sequence among `len` points `(xs[i], ts[i])`.
///
/// # Safety
/// `xs` and `ts` must hold `len` values; `out_length` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_lis_length(
    xs: *const f64,
    ts: *const f64,
    len: usize,
    out_length: *mut usize,
) -> HlStatus {
    guard(|| {
        let xs = input(xs, len, "xs")?;
        let ts = input(ts, len, "ts")?;
        let slot = out(out_length, "out_length")?;
        let pts: Vec<PlanarPoint> = xs.iter().zip(ts).map(|(&x, &t)| PlanarPoint::new(x, t)).collect();
        *slot = lis_length(&pts);
        Ok(())
    })
}

/// Longest increasing sequence of the store's points in `(x_lo, x_hi] x (t_lo, t_hi]`.
///
/// # Safety
/// `store` must be a live handle; `out_length` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_lis_in(
    store: *const HlPointStore,
    x_lo: f64,
    x_hi: f64,
    t_lo: f64,
    t_hi: f64,
    out_length: *mut usize,
) -> HlStatus {
    guard(|| {
        let store = store.as_ref().ok_or(Failure::Null("store"))?;
        let slot = out(out_length, "out_length")?;
        *slot = lis_in(&store.0, &Rectangle::new(x_lo, x_hi, t_lo, t_hi)?);
        Ok(())
    })
}

/// Inverse width from `(corner_x, corner_t)`; writes `INFINITY` when no
/// sequence of length `m` fits within `width_cap`.
///
/// # Safety
/// `store` must be a live handle; `out_width` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_gamma(
    store: *const HlPointStore,
    corner_x: f64,
    corner_t: f64,
    m: usize,
    tau: f64,
    width_cap: f64,
    out_width: *mut f64,
) -> HlStatus {
    guard(|| {
        let store = store.as_ref().ok_or(Failure::Null("store"))?;
        let slot = out(out_width, "out_width")?;
        *slot = match gamma(&store.0, PlanarPoint::new(corner_x, corner_t), m, tau, width_cap)? {
            Width::Finite(h) => h,
            Width::Infinite => f64::INFINITY,
        };
        Ok(())
    })
}

unsafe fn config(i_min: i64, positions: *const f64, len: usize, time: f64) -> Result<ParticleConfig, Failure> {
    let pos = input(positions, len, "positions")?;
    Ok(ParticleConfig::new(i_min, pos.to_vec(), time)?)
}

/// Evolves particles `i_min .. i_min + len - 1` from `time` to `t` by
/// replaying the store's points; writes `len` positions.
///
/// # Safety
/// `positions` and `out_positions` must hold `len` values; `store` must be live.
#[no_mangle]
pub unsafe extern "C" fn hl_evolve_event_driven(
    store: *const HlPointStore,
    i_min: i64,
    positions: *const f64,
    len: usize,
    time: f64,
    t: f64,
    out_positions: *mut f64,
) -> HlStatus {
    guard(|| {
        let store = store.as_ref().ok_or(Failure::Null("store"))?;
        let z0 = config(i_min, positions, len, time)?;
        let dst = output(out_positions, len, "out_positions")?;
        let z = evolve_event_driven(&z0, &store.0, t)?;
        dst.copy_from_slice(z.positions());
        Ok(())
    })
}

/// Variational positions at `t` of `labels`, with candidate corners
/// `[k - shift - half_width, k - shift + half_width]` clipped to the
/// configuration and to `k`. Pass `half_width = 0` for the full window.
///
/// # Safety
/// `positions` must hold `len` values, `labels` and `out_positions` must hold
/// `n_labels` values; `store` must be live.
#[no_mangle]
pub unsafe extern "C" fn hl_evolve_variational(
    store: *const HlPointStore,
    i_min: i64,
    positions: *const f64,
    len: usize,
    time: f64,
    t: f64,
    labels: *const i64,
    n_labels: usize,
    shift: i64,
    half_width: u64,
    max_widenings: u32,
    out_positions: *mut f64,
) -> HlStatus {
    guard(|| {
        let store = store.as_ref().ok_or(Failure::Null("store"))?;
        let z0 = config(i_min, positions, len, time)?;
        let labels = input(labels, n_labels, "labels")?;
        let dst = output(out_positions, n_labels, "out_positions")?;
        let window = if half_width == 0 {
            LabelWindow::full(&z0)
        } else {
            LabelWindow {
                shift,
                half_width,
                max_widenings,
            }
        };
        let res = evolve_variational(&z0, &store.0, t, labels, &window)?;
        for (d, r) in dst.iter_mut().zip(res) {
            *d = r.position;
        }
        Ok(())
    })
}

/// Builds `V0` with `V0(0) = 0` from a piecewise-linear density given by
/// knots and one-sided limits. Tails must be flat (`left_slope` and
/// `right_slope` zero).
///
/// # Safety
/// `knots`, `left_limits`, `right_limits` must hold `len` values;
/// `out_potential` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_potential_from_density(
    knots: *const f64,
    left_limits: *const f64,
    right_limits: *const f64,
    len: usize,
    left_slope: f64,
    right_slope: f64,
    out_potential: *mut *mut HlPotential,
) -> HlStatus {
    guard(|| {
        let slot = out(out_potential, "out_potential")?;
        let density = PiecewiseLinearFn::with_jumps(
            input(knots, len, "knots")?.to_vec(),
            input(left_limits, len, "left_limits")?.to_vec(),
            input(right_limits, len, "right_limits")?.to_vec(),
            left_slope,
            right_slope,
        )?;
        let v0 = Potential::antiderivative(&density, 0.0, 0.0)?;
        *slot = Box::into_raw(Box::new(HlPotential(v0)));
        Ok(())
    })
}

/// Releases a potential; NULL is ignored.
///
/// # Safety
/// `potential` must come from [`hl_potential_from_density`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hl_potential_free(potential: *mut HlPotential) {
    if !potential.is_null() {
        drop(Box::from_raw(potential));
    }
}

/// `V(x, t)` and its smallest minimizer.
///
/// # Safety
/// `potential` must be live; both out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_hopf_lax(
    potential: *const HlPotential,
    x: f64,
    t: f64,
    out_value: *mut f64,
    out_minimizer: *mut f64,
) -> HlStatus {
    guard(|| {
        let v0 = potential.as_ref().ok_or(Failure::Null("potential"))?;
        let value = out(out_value, "out_value")?;
        let minimizer = out(out_minimizer, "out_minimizer")?;
        let hl = hopf_lax(&v0.0, x, t)?;
        *value = hl.value;
        *minimizer = hl.minimizer;
        Ok(())
    })
}

/// Entropy solution `v(x, t)` (left-continuous at shocks).
///
/// # Safety
/// `potential` must be live; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_entropy_solution(
    potential: *const HlPotential,
    x: f64,
    t: f64,
    out_value: *mut f64,
) -> HlStatus {
    guard(|| {
        let v0 = potential.as_ref().ok_or(Failure::Null("potential"))?;
        let value = out(out_value, "out_value")?;
        *value = entropy_solution(&v0.0, x, t)?;
        Ok(())
    })
}

/// `I(x) = 2x acosh(x/2) - 2 sqrt(x^2 - 4)` for `x >= 2`, zero below.
#[no_mangle]
pub extern "C" fn hl_rate_i(x: f64) -> f64 {
    rate_i(x).value
}

/// `max(nu - 2 beta, nu / 3)`.
#[no_mangle]
pub extern "C" fn hl_error_exponent(nu: f64, beta: f64) -> f64 {
    error_exponent(nu, beta)
}

/// `floor(2 n^nu q t)`.
#[no_mangle]
pub extern "C" fn hl_translation(n: u64, nu: f64, q: f64, t: f64) -> i64 {
    translation(n, nu, q, t)
}
