mod common;

use hammersley_lab::burgers::entropy_solution;
use hammersley_lab::experiments::{
    benchmark_residual, error_exponent, fit_error_exponent, initial_configuration, run_sweep, summarize,
    thm1_residual, thm2_statistic, thm2_target, thm3_residual, thm4_residual, translation, write_results_csv,
    write_summary_csv, Experiment, HarnessOptions, Regime, ScalingParams, TestFunction, CSV_VERSION_LINE,
};
use hammersley_lab::hammersley::{evolve_variational, WindowPolicy};
use hammersley_lab::piecewise::PiecewiseLinearFn;
use hammersley_lab::poisson_plane::PointStore;
use hammersley_lab::stats::mean_se;
use hammersley_lab::sticks::PerturbationProfile;
use hammersley_lab::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(n: u64, nu: f64, beta: f64, t: f64) -> ScalingParams {
    ScalingParams { n, nu, beta, q: 1.0, t, x: 0.0, y: 1.0 }
}

fn tent(h: f64) -> PiecewiseLinearFn {
    PiecewiseLinearFn::tent(h, 0.0, 1.0).unwrap()
}

fn profile(p: &ScalingParams, v0: PiecewiseLinearFn) -> PerturbationProfile {
    PerturbationProfile::new(p.q, p.beta, p.n, v0).unwrap()
}

fn within_three_se(values: &[f64]) -> bool {
    let s = mean_se(values);
    s.mean.abs() <= 3.0 * s.se
}

#[test]
fn scalar_formulas() {
    assert_eq!(translation(10, 1.0, 1.0, 0.5), 10);
    assert_eq!(translation(37, 1.3, 2.0, 0.0), 0);
    assert_eq!(translation(4, 1.5, 1.0, 1.0), 16);
    assert!((error_exponent(1.0, 0.2) - 0.6).abs() < 1e-15);
    assert!((error_exponent(1.0, 0.5) - 1.0 / 3.0).abs() < 1e-15);
    let b = 0.4;
    assert!((error_exponent(3.0 * b, b) - b).abs() < 1e-15);
    assert!(params(10, 1.0, 0.2, 1.0).fast_branch());
    assert!(!params(10, 1.0, 0.5, 1.0).fast_branch());
}

#[test]
fn parameter_validation() {
    assert!(params(10, 0.5, 0.2, 1.0).validate().is_err());
    assert!(params(10, 1.0, 0.0, 1.0).validate().is_err());
    assert!(params(0, 1.0, 0.2, 1.0).validate().is_err());
    let p = params(10, 1.0, 0.2, 1.0);
    let other = PerturbationProfile::new(1.0, 0.2, 20, PiecewiseLinearFn::zero()).unwrap();
    assert!(thm3_residual(&p, &other, 0, &HarnessOptions::default()).is_err());
    let reversed = ScalingParams { x: 1.0, y: 0.0, ..p };
    assert!(thm1_residual(&reversed, &profile(&p, PiecewiseLinearFn::zero()), 0, &HarnessOptions::default()).is_err());
}

#[test]
fn zero_time_residuals_vanish() {
    let opts = HarnessOptions::default();
    let p = ScalingParams { x: -0.3, y: 0.6, ..params(40, 1.0, 0.3, 0.0) };
    let prof = profile(&p, tent(1.0));
    for seed in 0..5 {
        assert_eq!(thm1_residual(&p, &prof, seed, &opts).unwrap().residual, 0.0);
        assert_eq!(thm3_residual(&p, &prof, seed, &opts).unwrap().residual, 0.0);
    }
}

#[test]
fn slow_case_at_zero_time_is_a_centered_sum() {
    let opts = HarnessOptions::default();
    let p = ScalingParams { x: 0.5, ..params(60, 1.0, 0.3, 0.0) };
    let prof = profile(&p, tent(1.0));
    let res: Vec<f64> = (0..200)
        .map(|s| thm4_residual(&p, &prof, Regime::Slow, s, &opts).unwrap().residual)
        .collect();
    assert!(within_three_se(&res));
}

#[test]
fn equilibrium_nulls() {
    let opts = HarnessOptions::default();
    for &n in &[30u64, 60] {
        let p = ScalingParams { x: 0.2, y: 0.9, ..params(n, 1.0, 0.4, 1.0) };
        let prof = profile(&p, PiecewiseLinearFn::zero());
        let thm1: Vec<f64> = (0..50).map(|s| thm1_residual(&p, &prof, s, &opts).unwrap().residual).collect();
        let thm3: Vec<f64> = (0..50).map(|s| thm3_residual(&p, &prof, s, &opts).unwrap().residual).collect();
        assert!(within_three_se(&thm1), "thm1 at n = {n}: {:?}", mean_se(&thm1));
        assert!(within_three_se(&thm3), "thm3 at n = {n}: {:?}", mean_se(&thm3));

        let crit = ScalingParams { nu: 1.4, ..p };
        let prof = profile(&crit, PiecewiseLinearFn::zero());
        let thm4: Vec<f64> = (0..50)
            .map(|s| thm4_residual(&crit, &prof, Regime::Critical, s, &opts).unwrap().residual)
            .collect();
        assert!(within_three_se(&thm4), "thm4 at n = {n}: {:?}", mean_se(&thm4));
    }
}

#[test]
fn regime_mismatch_is_rejected() {
    let opts = HarnessOptions::default();
    let p = params(20, 1.0, 0.25, 0.5);
    let prof = profile(&p, PiecewiseLinearFn::zero());
    assert!(matches!(thm4_residual(&p, &prof, Regime::Fast, 0, &opts), Err(Error::Config(_))));
    assert!(matches!(thm4_residual(&p, &prof, Regime::Critical, 0, &opts), Err(Error::Config(_))));
    let slow_but_not_fast = params(20, 1.0, 0.5, 0.5);
    let prof = profile(&slow_but_not_fast, PiecewiseLinearFn::zero());
    assert!(thm4_residual(&slow_but_not_fast, &prof, Regime::Slow, 0, &opts).is_err());
    assert!(Regime::from_case(4).is_err());
}

#[test]
fn fast_case_target_uses_asymptotic_profile() {
    // Compactly supported v0: both asymptotic slopes vanish and so does the
    // perturbation term, leaving T q^2 + n x q.
    let opts = HarnessOptions::default();
    let p = ScalingParams { nu: 1.5, x: 0.25, ..params(30, 1.5, 0.3, 0.4) };
    let prof = profile(&p, tent(1.0));
    let m = thm4_residual(&p, &prof, Regime::Fast, 3, &opts).unwrap();
    let horizon = 30f64.powf(1.5) * 0.4;
    assert!((m.target - (horizon + 30.0 * 0.25)).abs() < 1e-9);
}

#[test]
fn thm2_trivial_cases() {
    let opts = HarnessOptions::default();
    let p = params(40, 1.25, 0.25, 0.5);
    let phi = TestFunction::new(tent(1.0)).unwrap();
    let flat = profile(&p, PiecewiseLinearFn::zero());
    assert_eq!(thm2_target(&flat, &phi, 0.5).unwrap(), 0.0);
    let zero_phi = TestFunction::new(PiecewiseLinearFn::zero()).unwrap();
    let m = thm2_statistic(&p, &profile(&p, tent(2.0)), &zero_phi, 1, &opts).unwrap();
    assert_eq!(m.statistic, 0.0);
    assert!(TestFunction::new(PiecewiseLinearFn::step(1.0, 0.0, 0.0)).is_err());
    assert!(TestFunction::new(PiecewiseLinearFn::constant(1.0)).is_err());
}

#[test]
fn thm2_target_matches_quadrature() {
    let p = params(100, 1.25, 0.25, 0.5);
    let prof = profile(&p, tent(2.0));
    let phi = tent(1.0);
    let v = |x: f64| phi.eval(x) * entropy_solution(prof.potential(), x, 0.5).unwrap();
    let oracle = common::integrate(&v, -1.0, 1.0, 1e-11);
    let got = thm2_target(&prof, &TestFunction::new(phi).unwrap(), 0.5).unwrap();
    assert!((got - oracle).abs() < 1e-8, "{got} vs {oracle}");
    assert!(got.abs() > 0.1);
}

#[test]
fn benchmark_with_standard_shift_recenters_thm1() {
    let opts = HarnessOptions::default();
    let p = ScalingParams { x: -0.4, y: 0.7, ..params(50, 1.0, 0.3, 0.8) };
    let prof = profile(&p, tent(1.0));
    for seed in 0..5 {
        let b = benchmark_residual(&p, &prof, None, seed, &opts).unwrap();
        let t1 = thm1_residual(&p, &prof, seed, &opts).unwrap();
        assert_eq!(b.statistic, t1.statistic);
        let expected = t1.residual + t1.target - 50.0 * (p.y - p.x);
        assert!((b.residual - expected).abs() < 1e-9);
        let explicit = benchmark_residual(&p, &prof, Some(p.translation()), seed, &opts).unwrap();
        assert_eq!(explicit, b);
    }
}

#[test]
fn benchmark_at_zero_time_is_centered() {
    let opts = HarnessOptions::default();
    let p = params(40, 1.0, 0.3, 0.0);
    let prof = profile(&p, PiecewiseLinearFn::zero());
    let res: Vec<f64> = (0..200).map(|s| benchmark_residual(&p, &prof, None, s, &opts).unwrap().residual).collect();
    assert!(within_three_se(&res));
}

#[test]
fn exponent_fit() {
    let exact: Vec<(f64, f64)> = [50.0, 100.0, 200.0, 400.0].iter().map(|&n: &f64| (n, n.sqrt())).collect();
    let (slope, se) = fit_error_exponent(&exact).unwrap();
    assert!((slope - 0.5).abs() < 1e-12 && se < 1e-12);
    let flat: Vec<(f64, f64)> = [10.0, 20.0, 40.0].iter().map(|&n| (n, 3.0)).collect();
    assert!(fit_error_exponent(&flat).unwrap().0.abs() < 1e-12);
    assert!(fit_error_exponent(&[(1.0, 1.0), (2.0, 2.0), (2.0, 3.0)]).is_err());

    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let noisy: Vec<(f64, f64)> = (0..40)
        .map(|j| {
            let n = 10.0 * 1.2f64.powi(j);
            (n, 2.0 * n.powf(0.7) * (0.3 * (rng.random::<f64>() - 0.5)).exp())
        })
        .collect();
    let (slope, se) = fit_error_exponent(&noisy).unwrap();
    assert!((slope - 0.7).abs() < 2.0 * se, "slope {slope} se {se}");
}

#[test]
fn window_suffices_on_tagged_instances() {
    let (n, nu, beta) = (100u64, 1.0, 0.4);
    let p = params(n, nu, beta, 1.0);
    let prof = profile(&p, tent(1.0));
    let policy = WindowPolicy::new(nu, beta, 0.05, HarnessOptions::default().window_multiplier, 0).unwrap();
    let shift = p.translation();
    let window = policy.window(n as f64, shift);
    let k = shift;
    let reach = window.half_width as i64;
    let mut interior = 0;
    let runs = 100;
    for seed in 0..runs {
        let z0 = initial_configuration(&prof, k - shift - 2 * reach, k, seed).unwrap();
        match evolve_variational(&z0, &PointStore::new(seed), p.horizon(), &[k], &window) {
            Ok(_) => interior += 1,
            Err(Error::WindowExhausted { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
    assert!(interior * 100 >= 99 * runs, "{interior} of {runs} interior");
}

#[test]
fn sweeps_are_deterministic_and_summaries_recomputable() {
    let base = ScalingParams { x: -0.5, y: 0.5, ..params(20, 1.0, 0.3, 0.5) };
    let opts = HarnessOptions::default();
    let seeds: Vec<u64> = (7..13).collect();
    let run = || run_sweep(&Experiment::Thm1, &base, &tent(1.0), &[20, 30, 40], &seeds, &opts).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 18);
    assert_eq!(summarize(&a.rows), a.summaries);
    assert!(a.fitted_exponent.is_some());
    assert_eq!(a.reference_exponent, Some(error_exponent(1.0, 0.3)));

    let bytes = |r: &hammersley_lab::experiments::ExperimentResult| {
        let (mut x, mut y) = (Vec::new(), Vec::new());
        write_results_csv(&mut x, r).unwrap();
        write_summary_csv(&mut y, r).unwrap();
        (x, y)
    };
    assert_eq!(bytes(&a), bytes(&b));
    let (results, summary) = bytes(&a);
    let text = String::from_utf8(results).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_VERSION_LINE));
    assert_eq!(
        lines.next(),
        Some("experiment,n,nu,beta,q,t,x,y,seed,statistic,target,residual,normalized_residual")
    );
    assert!(String::from_utf8(summary).unwrap().starts_with(CSV_VERSION_LINE));
}

#[test]
fn thm2_sweep_forces_critical_time_scale() {
    let base = params(30, 1.0, 0.25, 0.5);
    let phi = TestFunction::new(tent(1.0)).unwrap();
    let res = run_sweep(&Experiment::Thm2(phi), &base, &tent(2.0), &[30], &[1, 2], &HarnessOptions::default()).unwrap();
    assert_eq!(res.rows.len(), 2);
    assert!(res.rows.iter().all(|r| r.params.nu == 1.25));
}
