//! Longest increasing sequences of space-time points.
//!
//! A sequence is increasing when it is strictly increasing in both `x` and `t`.
//! [`lis_length`] counts the longest one (the last-passage value `L`), and
//! [`gamma`] inverts it in the horizontal direction: the smallest width `h`
//! such that `(a, a+h] x (s, s+tau]` contains an increasing sequence of `m`
//! points. Both run a patience sweep in `x` order with piles keyed on `t`.

use crate::error::{Error, Result};
use crate::poisson_plane::{sort_by_x, PlanarPoint, PointField, Rectangle};

/// Result of an inverse-width query. `Infinite` is the infimum of an empty set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Width {
    Finite(f64),
    Infinite,
}

impl Width {
    pub fn is_finite(&self) -> bool {
        matches!(self, Width::Finite(_))
    }

    pub fn value(&self) -> f64 {
        match *self {
            Width::Finite(h) => h,
            Width::Infinite => f64::INFINITY,
        }
    }
}

/// Patience piles over `t`: `tops[j]` is the smallest end time of an
/// increasing run of length `j + 1` seen so far.
#[derive(Debug, Default, Clone)]
pub(crate) struct Piles {
    tops: Vec<f64>,
}

impl Piles {
    pub(crate) fn clear(&mut self) {
        self.tops.clear();
    }

    pub(crate) fn len(&self) -> usize {
        self.tops.len()
    }

    /// Inserts a point with time `t`; points must arrive in `x` order, with
    /// equal `x` in decreasing `t`. Returns the new pile count.
    #[inline]
    pub(crate) fn push(&mut self, t: f64) -> usize {
        let j = self.tops.partition_point(|&top| top < t);
        if j == self.tops.len() {
            self.tops.push(t);
        } else {
            self.tops[j] = t;
        }
        self.tops.len()
    }
}

/// Length of the longest strictly increasing sequence in `points`.
/// `O(P log P)`.
pub fn lis_length(points: &[PlanarPoint]) -> usize {
    let mut sorted = points.to_vec();
    sort_by_x(&mut sorted);
    let mut piles = Piles::default();
    for p in &sorted {
        piles.push(p.t);
    }
    piles.len()
}

/// Longest increasing sequence inside `rect`.
pub fn lis_in<F: PointField + ?Sized>(field: &F, rect: &Rectangle) -> usize {
    let mut piles = Piles::default();
    for p in field.points_in(rect) {
        piles.push(p.t);
    }
    piles.len()
}

pub const BRUTE_FORCE_CAP: usize = 20;

/// Exhaustive maximum over all subsets; oracle for [`lis_length`].
pub fn lis_length_bruteforce(points: &[PlanarPoint]) -> Result<usize> {
    if points.len() > BRUTE_FORCE_CAP {
        return Err(Error::OracleCap {
            cap: BRUTE_FORCE_CAP,
            got: points.len(),
        });
    }
    let n = points.len();
    let mut best = 0;
    for mask in 0u32..(1u32 << n) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let mut chosen: Vec<&PlanarPoint> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &points[i])
            .collect();
        chosen.sort_by(|a, b| a.x.total_cmp(&b.x));
        if chosen.windows(2).all(|w| w[0].precedes(w[1])) {
            best = size;
        }
    }
    Ok(best)
}

/// Sweeps `sorted` (by `x`, ties by decreasing `t`) and returns the abscissa at
/// which the pile count first reaches `m`, ignoring points beyond `x_limit`.
pub(crate) fn first_reach(
    sorted: &[PlanarPoint],
    m: usize,
    x_limit: f64,
    piles: &mut Piles,
) -> Option<f64> {
    if m == 0 {
        return None;
    }
    piles.clear();
    for p in sorted {
        if p.x > x_limit {
            return None;
        }
        if piles.push(p.t) >= m {
            return Some(p.x);
        }
    }
    None
}

/// Inverse width `inf{h : L((a,s), (a+h, s+tau)) >= m}` searched inside the
/// strip `(a, a + width_cap] x (s, s + tau]`.
pub fn gamma<F: PointField + ?Sized>(
    field: &F,
    corner: PlanarPoint,
    m: usize,
    tau: f64,
    width_cap: f64,
) -> Result<Width> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("tau must be > 0, got {tau}")));
    }
    if !(width_cap > 0.0) || !width_cap.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "width_cap must be > 0, got {width_cap}"
        )));
    }
    if m == 0 {
        return Ok(Width::Finite(0.0));
    }
    let rect = Rectangle::new(corner.x, corner.x + width_cap, corner.t, corner.t + tau)?;
    let pts = field.points_in(&rect);
    let mut piles = Piles::default();
    Ok(match first_reach(&pts, m, f64::INFINITY, &mut piles) {
        Some(x) => Width::Finite(x - corner.x),
        None => Width::Infinite,
    })
}

/// [`gamma`] with the cap doubled until the answer is finite or
/// `max_doublings` is spent.
pub fn gamma_feasible<F: PointField + ?Sized>(
    field: &F,
    corner: PlanarPoint,
    m: usize,
    tau: f64,
    initial_cap: f64,
    max_doublings: u32,
) -> Result<Width> {
    let mut cap = initial_cap;
    for _ in 0..=max_doublings {
        let w = gamma(field, corner, m, tau, cap)?;
        if w.is_finite() {
            return Ok(w);
        }
        cap *= 2.0;
    }
    Ok(Width::Infinite)
}

/// Law of large numbers for `L`: `2 sqrt(b t)`.
pub fn lln_l(b: f64, t: f64) -> Result<f64> {
    if !(b > 0.0 && t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lln_l needs positive arguments, got ({b}, {t})"
        )));
    }
    Ok(2.0 * (b * t).sqrt())
}

/// Law of large numbers for `Gamma`: `a^2 / (4t)`.
pub fn lln_gamma(a: f64, t: f64) -> Result<f64> {
    if !(a >= 0.0 && t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lln_gamma needs a >= 0 and t > 0, got ({a}, {t})"
        )));
    }
    Ok(a * a / (4.0 * t))
}

/// Upper deviation rate function of `L(s,s)/s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEval {
    pub x: f64,
    pub value: f64,
}

/// `I(x) = 2x acosh(x/2) - 2 sqrt(x^2 - 4)` for `x >= 2`, zero below.
pub fn rate_i(x: f64) -> RateEval {
    let value = if x <= 2.0 {
        0.0
    } else {
        2.0 * x * (x / 2.0).acosh() - 2.0 * ((x - 2.0) * (x + 2.0)).sqrt()
    };
    RateEval { x, value }
}

/// Largest `C` with `I(2 + x) >= C x^{3/2}` on `(0, x_max]`, by dense scan.
/// The ratio tends to 4/3 as `x -> 0` and decreases, so the infimum sits at
/// the right end for moderate `x_max`.
pub fn lower_tail_constant(x_max: f64) -> f64 {
    const STEPS: usize = 20_000;
    (1..=STEPS)
        .map(|k| {
            let x = x_max * k as f64 / STEPS as f64;
            rate_i(2.0 + x).value / x.powf(1.5)
        })
        .fold(4.0 / 3.0, f64::min)
}

/// Bound on `P{Gamma([a], s) <= a^2/(4s) - h}`, valid for `a <= hs < a^2/4`.
pub fn lower_tail_bound(a: f64, s: f64, h: f64) -> Result<f64> {
    if !(a > 0.0 && s > 0.0 && h > 0.0) {
        return Err(Error::Domain(format!(
            "lower tail needs positive a, s, h; got ({a}, {s}, {h})"
        )));
    }
    let hs = h * s;
    if !(a <= hs && hs < a * a / 4.0) {
        return Err(Error::Domain(format!(
            "lower tail needs a <= hs < a^2/4; got a = {a}, hs = {hs}"
        )));
    }
    let root = (a * a - 4.0 * hs).sqrt();
    Ok((-0.5 * root * rate_i(2.0 + hs / (a * a)).value).exp())
}

/// Constants of the upper tail bound. They are not determined explicitly;
/// the defaults are placeholders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperTailConstants {
    pub b0: f64,
    pub b1: f64,
    pub d0: f64,
    pub c0: f64,
    pub c1: f64,
}

impl Default for UpperTailConstants {
    fn default() -> Self {
        Self {
            b0: 1e2,
            b1: 1.0,
            d0: 0.1,
            c0: 1.0,
            c1: 1e-2,
        }
    }
}

/// Bound on `P{Gamma([a], s) > a^2/(4s) + h}`: `C0 exp(-C1 s^3 h^3 / a^4)`,
/// valid for `a >= B0` and `B1 a^{4/3} <= hs <= d0 a^2`.
pub fn upper_tail_bound(a: f64, s: f64, h: f64, k: &UpperTailConstants) -> Result<f64> {
    if !(s > 0.0 && h > 0.0) {
        return Err(Error::Domain(format!(
            "upper tail needs positive s, h; got ({s}, {h})"
        )));
    }
    let hs = h * s;
    if !(a >= k.b0 && k.b1 * a.powf(4.0 / 3.0) <= hs && hs <= k.d0 * a * a) {
        return Err(Error::Domain(format!(
            "upper tail needs a >= {} and {} a^(4/3) <= hs <= {} a^2; got a = {a}, hs = {hs}",
            k.b0, k.b1, k.d0
        )));
    }
    Ok(k.c0 * (-k.c1 * hs.powi(3) / a.powi(4)).exp())
}

/// Cramer rate function of Exp(1): `x - 1 - ln x`.
pub fn kappa(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("kappa needs x > 0, got {x}")));
    }
    Ok(x - 1.0 - x.ln())
}
