//! Independent numerical oracles shared by integration tests.
#![allow(dead_code)]

use hammersley_lab::piecewise::{PiecewiseLinearFn, Potential};
use rand::Rng;

/// Golden-section search for a minimum of `f` on `[a, b]`.
pub fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let mut best = (a, f(a));
    for y in [b, c, d] {
        let v = f(y);
        if v < best.1 {
            best = (y, v);
        }
    }
    best
}

/// Minimum of `f` over `[lo, hi]`: a uniform grid locates the basins, then
/// golden-section search refines the best few.
pub fn grid_minimize(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    let h = (hi - lo) / (points - 1) as f64;
    let ys: Vec<f64> = (0..points).map(|j| lo + j as f64 * h).collect();
    let vals: Vec<f64> = ys.iter().map(|&y| f(y)).collect();
    let mut basins: Vec<usize> = (0..points)
        .filter(|&j| {
            let left = j == 0 || vals[j] <= vals[j - 1];
            let right = j + 1 == points || vals[j] <= vals[j + 1];
            left && right
        })
        .collect();
    basins.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    basins.truncate(8);
    let mut best = (f64::NAN, f64::INFINITY);
    for j in basins {
        let a = ys[j.saturating_sub(1)];
        let b = ys[(j + 1).min(points - 1)];
        let cand = golden_section(f, a, b);
        if cand.1 < best.1 {
            best = cand;
        }
    }
    best
}

/// `inf_y V0(y) + (x-y)^2/(4t)` by brute numerical minimization.
pub fn hopf_lax_oracle(v0: &Potential, x: f64, t: f64) -> f64 {
    let radius = 2.0 * t * v0.lipschitz() + 1.0;
    let f = |y: f64| v0.eval(y) + (x - y) * (x - y) / (4.0 * t);
    grid_minimize(&f, x - radius, x + radius, 4001).1
}

/// Sorted random knots in `[-3, 3]` with a minimum spacing.
fn random_knots(rng: &mut impl Rng, count: usize) -> Vec<f64> {
    loop {
        let mut k: Vec<f64> = (0..count).map(|_| rng.random_range(-3.0..3.0)).collect();
        k.sort_by(f64::total_cmp);
        if k.windows(2).all(|w| w[1] - w[0] > 1e-3) {
            return k;
        }
    }
}

/// A random piecewise-linear continuous `V0` (half the time) or the
/// piecewise-quadratic antiderivative of a random step-and-ramp density.
pub fn random_potential(rng: &mut impl Rng) -> Potential {
    let count = rng.random_range(1..=6);
    let knots = random_knots(rng, count);
    if rng.random_bool(0.5) {
        let values = (0..count).map(|_| rng.random_range(-2.0..2.0)).collect();
        let f = PiecewiseLinearFn::continuous(
            knots,
            values,
            rng.random_range(-1.5..1.5),
            rng.random_range(-1.5..1.5),
        )
        .unwrap();
        Potential::from_piecewise_linear(&f).unwrap()
    } else {
        // Jumps allowed at every knot; zero tail slopes keep the density
        // constant outside the knots.
        let l: Vec<f64> = (0..count).map(|_| rng.random_range(-2.0..2.0)).collect();
        let right: Vec<f64> = (0..count).map(|_| rng.random_range(-2.0..2.0)).collect();
        let density = PiecewiseLinearFn::with_jumps(knots, l, right, 0.0, 0.0).unwrap();
        Potential::antiderivative(&density, 0.0, rng.random_range(-1.0..1.0)).unwrap()
    }
}

/// Adaptive Simpson quadrature that tolerates jumps by bisection.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (l, r) = (simpson(f, a, m), simpson(f, m, b));
        if depth == 0 || (l + r - whole).abs() <= 15.0 * tol {
            return l + r + (l + r - whole) / 15.0;
        }
        rec(f, a, m, l, 0.5 * tol, depth - 1) + rec(f, m, b, r, 0.5 * tol, depth - 1)
    }
    // Start from a uniform split so no feature hides between the first probes.
    let pieces = 64;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|j| {
            let (lo, hi) = (a + j as f64 * h, a + (j + 1) as f64 * h);
            rec(f, lo, hi, simpson(f, lo, hi), tol / pieces as f64, 60)
        })
        .sum()
}
