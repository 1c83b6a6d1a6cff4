use hammersley_lab::hammersley::{
    evolve_event_driven, evolve_event_driven_traced, evolve_variational, scaling_covariance_check, tagged_position,
    trajectory, window_exponent, write_trajectory_csv, LabelWindow, ParticleConfig, WindowPolicy,
};
use hammersley_lab::increasing_seq::lis_in;
use hammersley_lab::poisson_plane::{PlanarPoint, PointSet, PointStore, Rectangle};
use hammersley_lab::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Unit-density exponential gaps starting at 0.
fn random_config(seed: u64, count: usize, i_min: i64) -> ParticleConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
    let mut z = 0.0;
    let positions = (0..count)
        .map(|_| {
            let here = z;
            z += -(1.0 - rng.random::<f64>()).ln();
            here
        })
        .collect();
    ParticleConfig::new(i_min, positions, 0.0).unwrap()
}

fn all_labels(z: &ParticleConfig) -> Vec<i64> {
    (z.i_min()..=z.i_max()).collect()
}

#[test]
fn config_validation() {
    assert!(ParticleConfig::new(0, vec![1.0, 0.5], 0.0).is_err());
    assert!(ParticleConfig::new(0, vec![], 0.0).is_err());
    assert!(ParticleConfig::new(0, vec![0.0, 0.0, 1.0], 0.0).is_ok());
}

#[test]
fn tagged_lookups() {
    let z = ParticleConfig::new(-2, vec![-1.5, 0.0, 0.25, 4.0], 0.0).unwrap();
    assert_eq!(tagged_position(&z, -2).unwrap(), -1.5);
    assert_eq!(tagged_position(&z, 0).unwrap(), 0.25);
    assert_eq!(tagged_position(&z, 1).unwrap(), 4.0);
    assert!(matches!(tagged_position(&z, 2), Err(Error::LabelOutOfRange { .. })));
    assert!(tagged_position(&z, -3).is_err());
}

#[test]
fn no_points_means_no_motion() {
    let z0 = random_config(1, 30, 0);
    let empty = PointSet::default();
    let direct = evolve_event_driven(&z0, &empty, 7.0).unwrap();
    assert_eq!(direct.positions(), z0.positions());
    let var = evolve_variational(&z0, &empty, 7.0, &all_labels(&z0), &LabelWindow::full(&z0)).unwrap();
    for (o, &p) in var.iter().zip(z0.positions()) {
        assert_eq!(o.position, p);
        assert_eq!(o.minimizer, o.label);
    }
}

#[test]
fn single_point_moves_one_particle() {
    let z0 = ParticleConfig::new(0, vec![0.0, 1.0, 2.0, 3.0], 0.0).unwrap();
    let field = PointSet::new(vec![PlanarPoint::new(1.4, 0.3)]);
    let direct = evolve_event_driven(&z0, &field, 1.0).unwrap();
    assert_eq!(direct.positions(), &[0.0, 1.0, 1.4, 3.0]);
    let var = evolve_variational(&z0, &field, 1.0, &[2], &LabelWindow::full(&z0)).unwrap();
    assert_eq!(var[0].position, 1.4);
    assert_eq!(var[0].minimizer, 1);
    // The point lies after the horizon: nothing happens.
    let early = evolve_event_driven(&z0, &field, 0.2).unwrap();
    assert_eq!(early.positions(), z0.positions());
}

#[test]
fn dual_construction_on_random_instances() {
    for seed in 0..100u64 {
        let z0 = random_config(seed, 200, -50);
        let store = PointStore::new(seed);
        let direct = evolve_event_driven(&z0, &store, 5.0).unwrap();
        let var = evolve_variational(&z0, &store, 5.0, &all_labels(&z0), &LabelWindow::full(&z0)).unwrap();
        for (o, &d) in var.iter().zip(direct.positions()) {
            assert_eq!(o.position.to_bits(), d.to_bits(), "seed {seed}, label {}", o.label);
        }
    }
}

#[test]
fn traced_origins_are_minimizers() {
    let z0 = random_config(4, 120, 0);
    let store = PointStore::new(4);
    let (z, origin) = evolve_event_driven_traced(&z0, &store, 6.0).unwrap();
    let var = evolve_variational(&z0, &store, 6.0, &all_labels(&z0), &LabelWindow::full(&z0)).unwrap();
    for (j, o) in var.iter().enumerate() {
        assert_eq!(o.position, z.positions()[j]);
        // The traced corner reaches the final position with an increasing
        // run of the right length, so it attains the minimum.
        let i = origin[j];
        assert!(i <= o.label);
        if i < o.label {
            let a = z0.positions()[(i - z0.i_min()) as usize];
            let rect = Rectangle::new(a, o.position, 0.0, 6.0).unwrap();
            assert!(lis_in(&store, &rect) >= (o.label - i) as usize);
        } else {
            assert_eq!(o.position, z0.positions()[j]);
        }
    }
}

#[test]
fn order_and_left_monotonicity() {
    for seed in 0..10u64 {
        let z0 = random_config(seed, 150, 0);
        let store = PointStore::new(seed + 500);
        let snaps = trajectory(&z0, &store, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        let mut prev = z0.clone();
        for s in &snaps {
            assert!(s.positions().windows(2).all(|w| w[0] <= w[1]));
            assert!(s.positions().iter().zip(prev.positions()).all(|(a, b)| a <= b));
            prev = s.clone();
        }
    }
}

#[test]
fn temporal_consistency() {
    for seed in 0..20u64 {
        let z0 = random_config(seed, 100, 0);
        let store = PointStore::new(seed);
        let direct = evolve_event_driven(&z0, &store, 5.0).unwrap();
        let half = evolve_event_driven(&z0, &store, 2.1).unwrap();
        let rest = evolve_event_driven(&half, &store, 5.0).unwrap();
        assert_eq!(direct, rest);
        assert!(evolve_event_driven(&half, &store, 1.0).is_err());
    }
}

#[test]
fn window_exponent_examples() {
    assert!((window_exponent(1.0, 1.0 / 3.0, 0.05) - (2.0 / 3.0 + 0.05)).abs() < 1e-15);
    assert_eq!(window_exponent(1.25, 0.25, 0.05), 1.0);
    for &(nu, beta) in &[(1.0, 0.1), (1.0, 0.5), (1.5, 0.2), (2.0, 1.9)] {
        let xi = window_exponent(nu, beta, 0.05);
        assert!(xi > 2.0 * nu / 3.0 && xi >= nu - beta);
    }
    let policy = WindowPolicy::new(1.0, 0.25, 0.05, 2.0, 3).unwrap();
    assert_eq!(policy.exponent(), 0.75);
    assert_eq!(policy.half_width(16.0), 16);
    assert_eq!(policy.max_half_width(16.0), 128);
    assert!(WindowPolicy::new(1.0, 0.25, 0.0, 2.0, 3).is_err());
}

#[test]
fn narrow_window_is_widened_not_truncated() {
    let z0 = random_config(2, 400, 0);
    let store = PointStore::new(2);
    let exact = evolve_variational(&z0, &store, 20.0, &[399], &LabelWindow::full(&z0)).unwrap()[0];
    let needed = (399 - exact.minimizer) as u64;
    assert!(needed > 4, "instance should need a wide window");

    let window = LabelWindow { shift: 0, half_width: 2, max_widenings: 8 };
    let widened = evolve_variational(&z0, &store, 20.0, &[399], &window).unwrap()[0];
    assert_eq!(widened.position, exact.position);
    assert!(widened.widenings > 0);

    let window = LabelWindow { shift: 0, half_width: 1, max_widenings: 0 };
    match evolve_variational(&z0, &store, 20.0, &[399], &window) {
        Err(Error::WindowExhausted { label, .. }) => assert_eq!(label, 399),
        other => panic!("expected window exhaustion, got {other:?}"),
    }
}

#[test]
fn scaling_covariance() {
    for seed in 0..10u64 {
        let z0 = random_config(seed, 80, 0);
        let store = PointStore::new(seed);
        assert!(scaling_covariance_check(&z0, &store, 4.0, 4.0, 0.5).unwrap());
        assert!(scaling_covariance_check(&z0, &store, 4.0, 7.0, 0.0).unwrap());
    }
    let z0 = ParticleConfig::new(0, vec![0.0, 1.0], 0.0).unwrap();
    let field = PointSet::new(vec![PlanarPoint::new(0.5, 0.5)]);
    assert!(scaling_covariance_check(&z0, &field, 1.0, 2.0, 1.0).unwrap());
}

#[test]
fn trajectory_csv_layout() {
    let z0 = ParticleConfig::new(3, vec![0.0, 1.5], 0.0).unwrap();
    let snaps = trajectory(&z0, &PointSet::default(), &[1.0, 2.0]).unwrap();
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, &snaps).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "label,time,position");
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[1], "3,1.0,0.0");
    assert_eq!(lines[4], "4,2.0,1.5");
}
