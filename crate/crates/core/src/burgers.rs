//! Deterministic limit objects: the Hopf-Lax solution of `V_t + (V_x)^2 = 0`,
//! the entropy solution `v = V_x` of `v_t + (v^2)_x = 0`, and the asymptotic
//! two-slope profile.
//!
//! For a piecewise-quadratic `V0` the minimization in
//! `V(x,t) = inf_y { V0(y) + (x-y)^2 / 4t }` is exact: a minimizer is either a
//! knot of `V0` or a stationary point inside a piece (or tail) on which the
//! objective is convex.

use std::io::{self, Write};

use crate::error::{Error, Result};
pub use crate::piecewise::{PiecewiseLinearFn, Potential};

/// Value of the Hopf-Lax formula together with its smallest minimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfLaxValue {
    pub value: f64,
    pub minimizer: f64,
}

/// Relative tolerance used to call two candidate values a tie.
const TIE_TOLERANCE: f64 = 1e-13;

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time must be > 0, got {t}")))
    }
}

/// Candidate minimizers of `y -> V0(y) + (x-y)^2/(4t)`.
fn candidates(v0: &Potential, x: f64, t: f64) -> Vec<f64> {
    let knots = v0.knots();
    let mut ys = knots.to_vec();
    let (ls, rs) = v0.tail_slopes();
    let y_left = x - 2.0 * ls * t;
    if y_left < knots[0] {
        ys.push(y_left);
    }
    let y_right = x - 2.0 * rs * t;
    if y_right > knots[knots.len() - 1] {
        ys.push(y_right);
    }
    let inv = 1.0 / (2.0 * t);
    for j in 0..v0.pieces() {
        let (k, _, c1, c2) = v0.piece(j);
        let curvature = 2.0 * c2 + inv;
        if curvature <= 0.0 {
            continue;
        }
        // V0'(y) = (x - y)/(2t) with V0'(y) = c1 + 2 c2 (y - k).
        let y = (x * inv - c1 + 2.0 * c2 * k) / curvature;
        if y > k && y < knots[j + 1] {
            ys.push(y);
        }
    }
    ys
}

/// `V(x, t) = inf_y { V0(y) + (x - y)^2 / (4t) }` for `t > 0`.
pub fn hopf_lax(v0: &Potential, x: f64, t: f64) -> Result<HopfLaxValue> {
    check_time(t)?;
    let objective = |y: f64| v0.eval(y) + (x - y) * (x - y) / (4.0 * t);
    let scored: Vec<(f64, f64)> = candidates(v0, x, t)
        .into_iter()
        .map(|y| (y, objective(y)))
        .collect();
    let value = scored
        .iter()
        .map(|&(_, f)| f)
        .fold(f64::INFINITY, f64::min);
    let tol = TIE_TOLERANCE * (1.0 + value.abs());
    let minimizer = scored
        .iter()
        .filter(|&&(_, f)| f <= value + tol)
        .map(|&(y, _)| y)
        .fold(f64::INFINITY, f64::min);
    Ok(HopfLaxValue { value, minimizer })
}

/// `V(x, t)` with `V(x, 0) = V0(x)`.
pub fn solution_value(v0: &Potential, x: f64, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(v0.eval(x));
    }
    Ok(hopf_lax(v0, x, t)?.value)
}

/// Entropy solution `v(x,t) = (x - y*)/(2t)` with `y*` the smallest
/// minimizer, so `v` is left-continuous across shocks. At `t = 0` returns the
/// left limit of `v0 = V0'`.
pub fn entropy_solution(v0: &Potential, x: f64, t: f64) -> Result<f64> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(v0.derivative(x));
    }
    let hl = hopf_lax(v0, x, t)?;
    Ok((x - hl.minimizer) / (2.0 * t))
}

/// Limits `lim V0(x)/x` at `-inf` and `+inf`.
pub fn slopes_at_infinity(v0: &Potential) -> (f64, f64) {
    v0.tail_slopes()
}

/// Hopf-Lax evolution of the two-slope profile `V(y,0) = v_minus y` for
/// `y < 0`, `v_plus y` for `y > 0`, in closed form.
pub fn asymptotic_profile_value(v_minus: f64, v_plus: f64, x: f64, t: f64) -> Result<f64> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(if x < 0.0 {
            v_minus * x
        } else if x > 0.0 {
            v_plus * x
        } else {
            0.0
        });
    }
    let mut best = x * x / (4.0 * t);
    if x - 2.0 * v_minus * t < 0.0 {
        best = best.min(v_minus * x - v_minus * v_minus * t);
    }
    if x - 2.0 * v_plus * t > 0.0 {
        best = best.min(v_plus * x - v_plus * v_plus * t);
    }
    Ok(best)
}

/// Adaptive Simpson quadrature; `V(., t)` is piecewise quadratic, so Simpson
/// is exact on every piece and the recursion only refines around kinks.
pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// `integral phi(x) v(x,t) dx` for a continuous, compactly supported,
/// piecewise-linear `phi`, computed as `-integral phi'(x) V(x,t) dx`.
pub fn integrate_against(phi: &PiecewiseLinearFn, v0: &Potential, t: f64) -> Result<f64> {
    if !phi.is_continuous() || !phi.has_compact_support() {
        return Err(Error::InvalidArgument(
            "test function must be continuous with compact support".into(),
        ));
    }
    let knots = phi.knots();
    let values = phi.left_limits();
    if values[0] != 0.0 || values[knots.len() - 1] != 0.0 {
        return Err(Error::InvalidArgument(
            "test function must vanish at its outer knots".into(),
        ));
    }
    if t < 0.0 || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be >= 0, got {t}")));
    }
    let big_v = |x: f64| solution_value(v0, x, t).expect("t checked");
    let mut total = 0.0;
    for j in 0..knots.len() - 1 {
        let (a, b) = (knots[j], knots[j + 1]);
        let slope = (values[j + 1] - values[j]) / (b - a);
        if slope != 0.0 {
            total -= slope * adaptive_simpson(&big_v, a, b, 1e-13);
        }
    }
    Ok(total)
}

/// Solution field CSV with header `x,t,V,v`, rows ordered by `t` then `x`.
pub fn write_solution_csv<W: Write>(
    mut w: W,
    v0: &Potential,
    xs: &[f64],
    ts: &[f64],
) -> io::Result<()> {
    writeln!(w, "x,t,V,v")?;
    for &t in ts {
        for &x in xs {
            let (big, small) = match (solution_value(v0, x, t), entropy_solution(v0, x, t)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => (f64::NAN, f64::NAN),
            };
            writeln!(
                w,
                "{},{},{},{}",
                crate::fmt_f64(x),
                crate::fmt_f64(t),
                crate::fmt_f64(big),
                crate::fmt_f64(small)
            )?;
        }
    }
    Ok(())
}
