use std::ffi::CStr;
use std::ptr;

use hammersley_lab_ffi::*;

fn last_error() -> String {
    let p = hl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_functions() {
    assert_eq!(hl_rate_i(2.0), 0.0);
    assert!((hl_rate_i(2.0 * 1f64.cosh()) - 4.0 / std::f64::consts::E).abs() < 1e-12);
    assert!((hl_error_exponent(1.0, 0.2) - 0.6).abs() < 1e-15);
    assert_eq!(hl_translation(10, 1.0, 1.0, 0.5), 10);
    assert_eq!(hl_translation(4, 1.5, 1.0, 1.0), 16);
}

#[test]
fn lis_from_arrays() {
    let xs = [0.1, 0.2, 0.3, 0.4];
    let ts = [0.4, 0.1, 0.2, 0.3];
    let mut len = 0usize;
    let st = unsafe { hl_lis_length(xs.as_ptr(), ts.as_ptr(), xs.len(), &mut len) };
    assert_eq!(st, HlStatus::Ok);
    assert_eq!(len, 3);
    let st = unsafe { hl_lis_length(ptr::null(), ts.as_ptr(), 4, &mut len) };
    assert_eq!(st, HlStatus::NullPointer);
    assert!(last_error().contains("xs"));
}

#[test]
fn store_lifecycle_and_queries() {
    let mut store = ptr::null_mut();
    assert_eq!(unsafe { hl_point_store_new(3, &mut store) }, HlStatus::Ok);
    assert!(!store.is_null());

    let mut l = 0usize;
    assert_eq!(unsafe { hl_lis_in(store, 0.0, 50.0, 0.0, 50.0, &mut l) }, HlStatus::Ok);
    assert!(l > 60 && l < 110, "L = {l}");

    let mut w = 0.0;
    assert_eq!(unsafe { hl_gamma(store, 0.0, 0.0, 10, 10.0, 100.0, &mut w) }, HlStatus::Ok);
    assert!(w.is_finite() && w > 0.0);
    assert_eq!(unsafe { hl_gamma(store, 0.0, 0.0, 10, -1.0, 100.0, &mut w) }, HlStatus::InvalidArgument);
    assert!(last_error().contains("tau"));

    let pos: Vec<f64> = (0..40).map(|i| i as f64).collect();
    let mut direct = vec![0.0; 40];
    let st = unsafe { hl_evolve_event_driven(store, 0, pos.as_ptr(), 40, 0.0, 3.0, direct.as_mut_ptr()) };
    assert_eq!(st, HlStatus::Ok);
    let labels: Vec<i64> = (0..40).collect();
    let mut var = vec![0.0; 40];
    let st = unsafe {
        hl_evolve_variational(store, 0, pos.as_ptr(), 40, 0.0, 3.0, labels.as_ptr(), 40, 0, 0, 0, var.as_mut_ptr())
    };
    assert_eq!(st, HlStatus::Ok);
    assert_eq!(direct, var);

    let bad = [1.0, 0.0];
    let st = unsafe { hl_evolve_event_driven(store, 0, bad.as_ptr(), 2, 0.0, 1.0, direct.as_mut_ptr()) };
    assert_eq!(st, HlStatus::InvalidArgument);

    let out_of_range = [99i64];
    let st = unsafe {
        hl_evolve_variational(store, 0, pos.as_ptr(), 40, 0.0, 3.0, out_of_range.as_ptr(), 1, 0, 0, 0, var.as_mut_ptr())
    };
    assert_eq!(st, HlStatus::LabelOutOfRange);

    unsafe { hl_point_store_free(store) };
    unsafe { hl_point_store_free(ptr::null_mut()) };
}

#[test]
fn window_exhaustion_is_reported() {
    let mut store = ptr::null_mut();
    assert_eq!(unsafe { hl_point_store_new(11, &mut store) }, HlStatus::Ok);
    // Dense particles, long time: minimizers sit far to the left of a
    // one-label window.
    let pos: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
    let label = [199i64];
    let mut v = [0.0];
    let st = unsafe {
        hl_evolve_variational(store, 0, pos.as_ptr(), 200, 0.0, 20.0, label.as_ptr(), 1, 0, 1, 0, v.as_mut_ptr())
    };
    assert_eq!(st, HlStatus::WindowExhausted);
    assert!(last_error().contains("199"));
    unsafe { hl_point_store_free(store) };
}

#[test]
fn burgers_through_handles() {
    // Riemann shock: v0 = 1 for y <= 0, 0 after.
    let knots = [0.0];
    let left = [1.0];
    let right = [0.0];
    let mut pot = ptr::null_mut();
    let st = unsafe {
        hl_potential_from_density(knots.as_ptr(), left.as_ptr(), right.as_ptr(), 1, 0.0, 0.0, &mut pot)
    };
    assert_eq!(st, HlStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { hl_entropy_solution(pot, 0.5, 1.0, &mut v) }, HlStatus::Ok);
    assert_eq!(v, 1.0);
    assert_eq!(unsafe { hl_entropy_solution(pot, 1.5, 1.0, &mut v) }, HlStatus::Ok);
    assert_eq!(v, 0.0);
    let (mut value, mut y) = (0.0, 0.0);
    assert_eq!(unsafe { hl_hopf_lax(pot, 2.0, 1.0, &mut value, &mut y) }, HlStatus::Ok);
    assert_eq!(value, 0.0);
    assert_eq!(unsafe { hl_hopf_lax(pot, 2.0, 0.0, &mut value, &mut y) }, HlStatus::InvalidArgument);
    assert_eq!(unsafe { hl_hopf_lax(ptr::null(), 2.0, 1.0, &mut value, &mut y) }, HlStatus::NullPointer);
    unsafe { hl_potential_free(pot) };

    let mut sloped = ptr::null_mut();
    let st = unsafe {
        hl_potential_from_density(knots.as_ptr(), left.as_ptr(), right.as_ptr(), 1, 1.0, 0.0, &mut sloped)
    };
    assert_eq!(st, HlStatus::InvalidArgument);
    assert!(sloped.is_null());
}

#[test]
fn header_declares_the_surface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/hammersley_lab.h"))
        .expect("header generated by the build script");
    for name in [
        "HL_STATUS_OK",
        "HL_STATUS_WINDOW_EXHAUSTED",
        "typedef struct HlPointStore HlPointStore",
        "hl_point_store_new",
        "hl_evolve_variational",
        "hl_hopf_lax",
        "hl_last_error_message",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
