//! Piecewise-linear densities and their piecewise-quadratic antiderivatives.
//!
//! Perturbation profiles `v0`, test functions and asymptotic potentials are all
//! [`PiecewiseLinearFn`]s. The macroscopic potential `V0` (with `V0' = v0`) is a
//! continuous [`Potential`], quadratic between knots and linear in the tails.

use crate::error::{invalid, Result};

/// Piecewise-linear function on `R`, possibly with jumps at knots, linear in
/// each tail. Evaluation at a knot returns the left limit.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearFn {
    knots: Vec<f64>,
    left_limits: Vec<f64>,
    right_limits: Vec<f64>,
    left_slope: f64,
    right_slope: f64,
}

impl PiecewiseLinearFn {
    pub fn with_jumps(
        knots: Vec<f64>,
        left_limits: Vec<f64>,
        right_limits: Vec<f64>,
        left_slope: f64,
        right_slope: f64,
    ) -> Result<Self> {
        if knots.is_empty() {
            return Err(invalid("piecewise-linear function needs at least one knot"));
        }
        if left_limits.len() != knots.len() || right_limits.len() != knots.len() {
            return Err(invalid("knot and value tables differ in length"));
        }
        if !knots.windows(2).all(|w| w[0] < w[1]) {
            return Err(invalid("knots must be strictly increasing"));
        }
        let all_finite = knots
            .iter()
            .chain(&left_limits)
            .chain(&right_limits)
            .chain([&left_slope, &right_slope])
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(invalid("piecewise-linear data must be finite"));
        }
        Ok(Self {
            knots,
            left_limits,
            right_limits,
            left_slope,
            right_slope,
        })
    }

    pub fn continuous(
        knots: Vec<f64>,
        values: Vec<f64>,
        left_slope: f64,
        right_slope: f64,
    ) -> Result<Self> {
        Self::with_jumps(knots, values.clone(), values, left_slope, right_slope)
    }

    pub fn constant(c: f64) -> Self {
        Self::continuous(vec![0.0], vec![c], 0.0, 0.0).expect("constant is valid")
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `height * (1 - |y - center| / half_width)_+`.
    pub fn tent(height: f64, center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(invalid(format!("tent half-width must be > 0, got {half_width}")));
        }
        Self::continuous(
            vec![center - half_width, center, center + half_width],
            vec![0.0, height, 0.0],
            0.0,
            0.0,
        )
    }

    /// `left` for `y <= at`, `right` for `y > at`.
    pub fn step(left: f64, right: f64, at: f64) -> Self {
        Self::with_jumps(vec![at], vec![left], vec![right], 0.0, 0.0).expect("step is valid")
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn left_limits(&self) -> &[f64] {
        &self.left_limits
    }

    pub fn right_limits(&self) -> &[f64] {
        &self.right_limits
    }

    pub fn tail_slopes(&self) -> (f64, f64) {
        (self.left_slope, self.right_slope)
    }

    /// Values approached at `-inf` and `+inf` when both tails are flat.
    pub fn tail_values(&self) -> Option<(f64, f64)> {
        (self.left_slope == 0.0 && self.right_slope == 0.0)
            .then(|| (self.left_limits[0], *self.right_limits.last().unwrap()))
    }

    pub fn is_continuous(&self) -> bool {
        self.left_limits == self.right_limits
    }

    pub fn has_compact_support(&self) -> bool {
        self.tail_values() == Some((0.0, 0.0))
    }

    /// Support hull `[first knot, last knot]`.
    pub fn knot_span(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    /// Left limit at `y` (the value itself away from knots).
    pub fn eval(&self, y: f64) -> f64 {
        let k = &self.knots;
        let last = k.len() - 1;
        if y <= k[0] {
            return self.left_limits[0] + self.left_slope * (y - k[0]);
        }
        if y > k[last] {
            return self.right_limits[last] + self.right_slope * (y - k[last]);
        }
        // k[j] < y <= k[j+1]
        let j = k.partition_point(|&b| b < y) - 1;
        let (a, b) = (k[j], k[j + 1]);
        let (fa, fb) = (self.right_limits[j], self.left_limits[j + 1]);
        fa + (fb - fa) * (y - a) / (b - a)
    }

    /// Supremum of `|f|`; infinite when a tail is sloped.
    pub fn sup_abs(&self) -> f64 {
        if self.left_slope != 0.0 || self.right_slope != 0.0 {
            return f64::INFINITY;
        }
        self.left_limits
            .iter()
            .chain(&self.right_limits)
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Exact integral over `[a, b]` (signed, `b < a` allowed).
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        if b < a {
            return -self.integral(b, a);
        }
        let mut cuts = vec![a];
        cuts.extend(self.knots.iter().copied().filter(|&k| k > a && k < b));
        cuts.push(b);
        cuts.windows(2)
            .map(|w| {
                let (lo, hi) = (w[0], w[1]);
                // Linear on (lo, hi), so the trapezoid of the one-sided limits is exact.
                0.5 * (self.right_limit(lo) + self.eval(hi)) * (hi - lo)
            })
            .sum()
    }

    /// Right limit at `y`.
    fn right_limit(&self, y: f64) -> f64 {
        match self.knots.iter().position(|&k| k == y) {
            Some(j) => self.right_limits[j],
            None => self.eval(y),
        }
    }
}

/// Continuous function, quadratic between knots and linear outside them:
/// `V(y) = c0[j] + c1[j] (y - k[j]) + c2[j] (y - k[j])^2` on `[k[j], k[j+1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    knots: Vec<f64>,
    c0: Vec<f64>,
    c1: Vec<f64>,
    c2: Vec<f64>,
    left_slope: f64,
    right_slope: f64,
}

impl Potential {
    /// The antiderivative of `density` normalized by `V(anchor) = anchor_value`.
    /// The density must have flat tails.
    pub fn antiderivative(density: &PiecewiseLinearFn, anchor: f64, anchor_value: f64) -> Result<Self> {
        let (ls, rs) = density.tail_slopes();
        if ls != 0.0 || rs != 0.0 {
            return Err(invalid("density must be constant in both tails"));
        }
        let knots = density.knots().to_vec();
        let n = knots.len();
        let mut c0 = Vec::with_capacity(n);
        let mut c1 = Vec::with_capacity(n);
        let mut c2 = Vec::with_capacity(n);
        let mut v = anchor_value + density.integral(anchor, knots[0]);
        for j in 0..n {
            c0.push(v);
            let slope_start = density.right_limits()[j];
            c1.push(slope_start);
            if j + 1 < n {
                let dx = knots[j + 1] - knots[j];
                let slope_end = density.left_limits()[j + 1];
                c2.push((slope_end - slope_start) / (2.0 * dx));
                v += 0.5 * (slope_start + slope_end) * dx;
            } else {
                c2.push(0.0);
            }
        }
        Ok(Self {
            knots,
            c0,
            c1,
            c2,
            left_slope: density.left_limits()[0],
            right_slope: density.right_limits()[n - 1],
        })
    }

    /// A continuous piecewise-linear function viewed as a potential.
    pub fn from_piecewise_linear(f: &PiecewiseLinearFn) -> Result<Self> {
        if !f.is_continuous() {
            return Err(invalid("potential must be continuous"));
        }
        let knots = f.knots().to_vec();
        let n = knots.len();
        let values = f.left_limits().to_vec();
        let c1 = (0..n)
            .map(|j| {
                if j + 1 < n {
                    (values[j + 1] - values[j]) / (knots[j + 1] - knots[j])
                } else {
                    0.0
                }
            })
            .collect();
        let (left_slope, right_slope) = f.tail_slopes();
        Ok(Self {
            knots,
            c0: values,
            c1,
            c2: vec![0.0; n],
            left_slope,
            right_slope,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of quadratic pieces between knots.
    pub fn pieces(&self) -> usize {
        self.knots.len() - 1
    }

    /// Coefficients `(k, c0, c1, c2)` of piece `j`.
    pub fn piece(&self, j: usize) -> (f64, f64, f64, f64) {
        (self.knots[j], self.c0[j], self.c1[j], self.c2[j])
    }

    /// Slopes of the two linear tails.
    pub fn tail_slopes(&self) -> (f64, f64) {
        (self.left_slope, self.right_slope)
    }

    pub fn eval(&self, y: f64) -> f64 {
        let k = &self.knots;
        let last = k.len() - 1;
        if y <= k[0] {
            return self.c0[0] + self.left_slope * (y - k[0]);
        }
        if y >= k[last] {
            return self.c0[last] + self.right_slope * (y - k[last]);
        }
        let j = k.partition_point(|&b| b <= y) - 1;
        let d = y - k[j];
        self.c0[j] + d * (self.c1[j] + d * self.c2[j])
    }

    /// Left derivative at `y`.
    pub fn derivative(&self, y: f64) -> f64 {
        let k = &self.knots;
        let last = k.len() - 1;
        if y <= k[0] {
            return self.left_slope;
        }
        if y > k[last] {
            return self.right_slope;
        }
        let j = k.partition_point(|&b| b < y) - 1;
        self.c1[j] + 2.0 * self.c2[j] * (y - k[j])
    }

    /// Lipschitz constant: the largest `|V'|`.
    pub fn lipschitz(&self) -> f64 {
        let mut m = self.left_slope.abs().max(self.right_slope.abs());
        for j in 0..self.pieces() {
            let dx = self.knots[j + 1] - self.knots[j];
            m = m
                .max(self.c1[j].abs())
                .max((self.c1[j] + 2.0 * self.c2[j] * dx).abs());
        }
        m
    }
}
