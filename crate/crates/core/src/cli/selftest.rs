//! Quick oracle checks bundled with the binary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::burgers::{entropy_solution, hopf_lax};
use crate::hammersley::{evolve_event_driven, evolve_variational, LabelWindow, ParticleConfig};
use crate::increasing_seq::{lis_length, lis_length_bruteforce, rate_i};
use crate::piecewise::{PiecewiseLinearFn, Potential};
use crate::poisson_plane::{PlanarPoint, PointStore};

fn check(failures: &mut Vec<String>, ok: bool, what: impl FnOnce() -> String) {
    if !ok {
        failures.push(what());
    }
}

/// Runs every check; `Ok` carries the summary line, `Err` lists failures.
pub fn selftest() -> Result<String, String> {
    let mut failures = Vec::new();
    let mut checks = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);

    for case in 0..300 {
        let size = rng.random_range(0..=10);
        let pts: Vec<PlanarPoint> = (0..size)
            .map(|_| PlanarPoint::new(rng.random(), rng.random()))
            .collect();
        let brute = lis_length_bruteforce(&pts).expect("under the cap");
        check(&mut failures, lis_length(&pts) == brute, || {
            format!("lis mismatch on random set {case}")
        });
        checks += 1;
    }

    check(&mut failures, rate_i(2.0).value == 0.0, || "I(2) != 0".into());
    let e = std::f64::consts::E;
    check(
        &mut failures,
        (rate_i(2.0 * 1f64.cosh()).value - 4.0 / e).abs() < 1e-12,
        || "I(2 cosh 1) != 4/e".into(),
    );
    checks += 2;

    for seed in 0..5u64 {
        let mut positions = Vec::with_capacity(60);
        let mut z = 0.0;
        for _ in 0..60 {
            positions.push(z);
            z += -(1.0 - rng.random::<f64>()).ln();
        }
        let z0 = ParticleConfig::new(0, positions, 0.0).expect("ordered");
        let store = PointStore::new(seed);
        let direct = evolve_event_driven(&z0, &store, 3.0).expect("valid time");
        let labels: Vec<i64> = (0..60).collect();
        let var = evolve_variational(&z0, &store, 3.0, &labels, &LabelWindow::full(&z0)).expect("full window");
        let same = var
            .iter()
            .zip(direct.positions())
            .all(|(v, &d)| v.position.to_bits() == d.to_bits());
        check(&mut failures, same, || format!("dual construction differs for seed {seed}"));
        checks += 1;
    }

    let abs = Potential::from_piecewise_linear(
        &PiecewiseLinearFn::continuous(vec![0.0], vec![0.0], -1.0, 1.0).expect("valid"),
    )
    .expect("continuous");
    for &(x, t, want) in &[(3.0, 1.0, 2.0), (1.0, 1.0, 0.25), (-0.5, 2.0, 0.03125)] {
        let got = hopf_lax(&abs, x, t).expect("t > 0").value;
        check(&mut failures, (got - want).abs() < 1e-12, || {
            format!("V0 = |y|: V({x}, {t}) = {got}, expected {want}")
        });
        checks += 1;
    }

    let shock = Potential::antiderivative(&PiecewiseLinearFn::step(1.0, 0.0, 0.0), 0.0, 0.0).expect("flat tails");
    for &(x, want) in &[(-1.0, 1.0), (0.9, 1.0), (1.1, 0.0), (3.0, 0.0)] {
        let got = entropy_solution(&shock, x, 1.0).expect("t > 0");
        check(&mut failures, (got - want).abs() < 1e-12, || {
            format!("Riemann shock: v({x}, 1) = {got}, expected {want}")
        });
        checks += 1;
    }

    if failures.is_empty() {
        Ok(format!("selftest: {checks} checks passed"))
    } else {
        Err(format!(
            "selftest: {} of {checks} checks failed\n{}",
            failures.len(),
            failures.join("\n")
        ))
    }
}
