//! Hammersley's process on a finite label window.
//!
//! Two constructions are provided and are meant to agree exactly:
//!
//! * [`evolve_event_driven`] replays the space-time points in time order; each
//!   point `(x, t)` pulls the leftmost particle in `[x, inf)` to `x`.
//! * [`evolve_variational`] evaluates
//!   `z(k,t) = min_{i <= k} { z(i,0) + Gamma((z(i,0), 0), k - i, t) }` over a
//!   window of candidate corners `i`.
//!
//! Semi-infinite convention: label `i_min` is the leftmost particle. Points to
//! the left of `z(i_min)` are ignored, so `z(i_min)` never moves, and the
//! variational minimum ranges over `i >= i_min`. Under this convention the two
//! constructions describe the same finite system. Points to the right of the
//! rightmost particle have nothing to pull, so the right edge is exact.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::increasing_seq::{first_reach, Piles};
use crate::poisson_plane::{scale_points, sort_by_t, PlanarPoint, PointField, PointSet, Rectangle};

/// Ordered particle positions `z(i)` for labels `i_min..=i_max` at time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleConfig {
    i_min: i64,
    positions: Vec<f64>,
    time: f64,
}

impl ParticleConfig {
    pub fn new(i_min: i64, positions: Vec<f64>, time: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(invalid("particle configuration needs at least one particle"));
        }
        if !positions.iter().all(|p| p.is_finite()) {
            return Err(invalid("particle positions must be finite"));
        }
        if let Some(w) = positions.windows(2).position(|w| w[0] > w[1]) {
            return Err(invalid(format!(
                "positions not ordered at labels {} and {}",
                i_min + w as i64,
                i_min + w as i64 + 1
            )));
        }
        if !(time >= 0.0 && time.is_finite()) {
            return Err(invalid(format!("time stamp must be >= 0, got {time}")));
        }
        Ok(Self {
            i_min,
            positions,
            time,
        })
    }

    pub fn i_min(&self) -> i64 {
        self.i_min
    }

    pub fn i_max(&self) -> i64 {
        self.i_min + self.positions.len() as i64 - 1
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn contains_label(&self, label: i64) -> bool {
        label >= self.i_min && label <= self.i_max()
    }

    pub fn position(&self, label: i64) -> Option<f64> {
        self.contains_label(label)
            .then(|| self.positions[(label - self.i_min) as usize])
    }

    fn index(&self, label: i64) -> usize {
        (label - self.i_min) as usize
    }
}

/// Position of the particle with the given label.
pub fn tagged_position(config: &ParticleConfig, label: i64) -> Result<f64> {
    config.position(label).ok_or(Error::LabelOutOfRange {
        label,
        lo: config.i_min(),
        hi: config.i_max(),
    })
}

fn slab(z: &ParticleConfig, t: f64) -> Option<Rectangle> {
    let lo = z.positions[0];
    let hi = *z.positions.last().unwrap();
    Rectangle::new(lo, hi, z.time, t).ok()
}

fn check_target_time(z: &ParticleConfig, t: f64) -> Result<()> {
    if !(t >= z.time && t.is_finite()) {
        return Err(invalid(format!(
            "target time {t} precedes configuration time {}",
            z.time
        )));
    }
    Ok(())
}

/// Replays the points in `(z(i_min), z(i_max)] x (z0.time, t]` in time order.
pub fn evolve_event_driven<F: PointField + ?Sized>(
    z0: &ParticleConfig,
    field: &F,
    t: f64,
) -> Result<ParticleConfig> {
    Ok(evolve_event_driven_traced(z0, field, t)?.0)
}

/// [`evolve_event_driven`] that also returns, for every label `k`, the corner
/// label `i` whose increasing path currently realizes `z(k, t)`. This is a
/// minimizer of the variational formula: a particle pulled by a point inherits
/// the origin of its left neighbour, whose path the point extends.
pub fn evolve_event_driven_traced<F: PointField + ?Sized>(
    z0: &ParticleConfig,
    field: &F,
    t: f64,
) -> Result<(ParticleConfig, Vec<i64>)> {
    check_target_time(z0, t)?;
    let mut pos = z0.positions.clone();
    let mut origin: Vec<i64> = (z0.i_min..=z0.i_max()).collect();
    if let Some(rect) = slab(z0, t) {
        let mut pts = Vec::new();
        field.collect_in(&rect, &mut pts);
        sort_by_t(&mut pts);
        for p in &pts {
            let k = pos.partition_point(|&z| z < p.x);
            // k >= 1 because z(i_min) < p.x for every point in the slab.
            if k < pos.len() && pos[k] != p.x {
                pos[k] = p.x;
                origin[k] = origin[k - 1];
            }
        }
    }
    Ok((
        ParticleConfig {
            i_min: z0.i_min,
            positions: pos,
            time: t,
        },
        origin,
    ))
}

/// Snapshots at increasing `times`, each evolved from the previous one.
pub fn trajectory<F: PointField + ?Sized>(
    z0: &ParticleConfig,
    field: &F,
    times: &[f64],
) -> Result<Vec<ParticleConfig>> {
    let mut out = Vec::with_capacity(times.len());
    let mut cur = z0.clone();
    for &t in times {
        cur = evolve_event_driven(&cur, field, t)?;
        out.push(cur.clone());
    }
    Ok(out)
}

/// Exponent of the candidate window: `max(nu - beta, 2 nu / 3 + slack)`.
pub fn window_exponent(nu: f64, beta: f64, slack: f64) -> f64 {
    (nu - beta).max(2.0 * nu / 3.0 + slack)
}

/// Sizing rule for the window of candidate corners, `W = ceil(b n^xi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowPolicy {
    pub nu: f64,
    pub beta: f64,
    pub slack: f64,
    pub width_multiplier: f64,
    pub max_widenings: u32,
}

impl WindowPolicy {
    pub fn new(nu: f64, beta: f64, slack: f64, width_multiplier: f64, max_widenings: u32) -> Result<Self> {
        if !(slack > 0.0) {
            return Err(invalid(format!("window slack must be > 0, got {slack}")));
        }
        if !(width_multiplier > 0.0) {
            return Err(invalid(format!(
                "window multiplier must be > 0, got {width_multiplier}"
            )));
        }
        Ok(Self {
            nu,
            beta,
            slack,
            width_multiplier,
            max_widenings,
        })
    }

    pub fn exponent(&self) -> f64 {
        window_exponent(self.nu, self.beta, self.slack)
    }

    pub fn half_width(&self, n: f64) -> u64 {
        (self.width_multiplier * n.powf(self.exponent())).ceil().max(1.0) as u64
    }

    /// Window for labels whose natural minimizer sits `shift` labels to the left.
    pub fn window(&self, n: f64, shift: i64) -> LabelWindow {
        LabelWindow {
            shift,
            half_width: self.half_width(n),
            max_widenings: self.max_widenings,
        }
    }

    /// Largest half-width reachable by widening.
    pub fn max_half_width(&self, n: f64) -> u64 {
        self.half_width(n) << self.max_widenings
    }
}

/// Candidate corners for label `k`: `[c - W, c + W]` clipped to
/// `[i_min, k]`, with `c = k - shift`, plus `k` itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelWindow {
    pub shift: i64,
    pub half_width: u64,
    pub max_widenings: u32,
}

impl LabelWindow {
    /// `[k - W, k]`.
    pub fn trailing(half_width: u64) -> Self {
        Self {
            shift: 0,
            half_width,
            max_widenings: 0,
        }
    }

    /// Every label of `z0`: the exact semi-infinite minimum.
    pub fn full(z0: &ParticleConfig) -> Self {
        Self::trailing(z0.len() as u64)
    }
}

/// Variational position of one label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalOutcome {
    pub label: i64,
    pub position: f64,
    /// Smallest minimizing corner label.
    pub minimizer: i64,
    pub widenings: u32,
}

/// Edge flags for a window evaluation.
struct WindowBounds {
    lo: i64,
    hi: i64,
    lo_is_edge: bool,
    hi_is_edge: bool,
}

fn bounds(z0: &ParticleConfig, k: i64, shift: i64, half: u64) -> WindowBounds {
    let half = half.min(i64::MAX as u64 / 4) as i64;
    let c = k - shift;
    let lo_raw = c.saturating_sub(half);
    let hi_raw = c.saturating_add(half);
    WindowBounds {
        lo: lo_raw.max(z0.i_min).min(k),
        hi: hi_raw.min(k).max(z0.i_min),
        lo_is_edge: lo_raw > z0.i_min,
        hi_is_edge: hi_raw < k,
    }
}

/// Minimum over corners in `[lo, hi] ∪ {k}`; returns `(position, minimizer)`.
fn window_minimum<F: PointField + ?Sized>(
    z0: &ParticleConfig,
    field: &F,
    t: f64,
    k: i64,
    lo: i64,
    hi: i64,
) -> (f64, i64) {
    let zk = z0.positions[z0.index(k)];
    let mut best = (zk, k);
    if t == z0.time || lo >= k {
        return best;
    }
    let z_lo = z0.positions[z0.index(lo)];
    let Ok(rect) = Rectangle::new(z_lo, zk, z0.time, t) else {
        return best;
    };
    let pts = field.points_in(&rect);
    let mut piles = Piles::default();
    let mut eval = |i: i64, best: &mut (f64, i64)| {
        let a = z0.positions[z0.index(i)];
        let start = pts.partition_point(|p| p.x <= a);
        let m = (k - i) as usize;
        if let Some(x) = first_reach(&pts[start..], m, best.0, &mut piles) {
            if x < best.0 || (x == best.0 && i < best.1) {
                *best = (x, i);
            }
        }
    };
    // Seed the bound with the middle corner, then scan in label order.
    let mid = lo + (hi.min(k - 1) - lo) / 2;
    eval(mid, &mut best);
    for i in lo..=hi.min(k - 1) {
        eval(i, &mut best);
    }
    best
}

fn variational_one<F: PointField + ?Sized>(
    z0: &ParticleConfig,
    field: &F,
    t: f64,
    k: i64,
    window: &LabelWindow,
) -> Result<VariationalOutcome> {
    if !z0.contains_label(k) {
        return Err(Error::LabelOutOfRange {
            label: k,
            lo: z0.i_min,
            hi: z0.i_max(),
        });
    }
    let mut half = window.half_width;
    let mut widenings = 0;
    loop {
        let b = bounds(z0, k, window.shift, half);
        let (position, minimizer) = window_minimum(z0, field, t, k, b.lo, b.hi);
        let on_edge = (b.lo_is_edge && minimizer == b.lo) || (b.hi_is_edge && minimizer >= b.hi);
        if !on_edge {
            return Ok(VariationalOutcome {
                label: k,
                position,
                minimizer,
                widenings,
            });
        }
        if widenings >= window.max_widenings {
            return Err(Error::WindowExhausted {
                label: k,
                widenings,
                half_width: half,
            });
        }
        widenings += 1;
        half = half.saturating_mul(2);
    }
}

/// Positions at time `t` of the queried labels via the variational formula.
/// Labels are evaluated independently (in parallel); output order follows
/// `labels`.
pub fn evolve_variational<F: PointField + ?Sized>(
    z0: &ParticleConfig,
    field: &F,
    t: f64,
    labels: &[i64],
    window: &LabelWindow,
) -> Result<Vec<VariationalOutcome>> {
    check_target_time(z0, t)?;
    labels
        .par_iter()
        .map(|&k| variational_one(z0, field, t, k, window))
        .collect()
}

/// Evolves `(z0, points)` and the image under `(x, t) -> (lambda x, t/lambda)`
/// with `lambda = n^beta`, and checks that the scaled evolution is exactly the
/// image of the original one.
pub fn scaling_covariance_check<F: PointField + ?Sized>(
    z0: &ParticleConfig,
    field: &F,
    t: f64,
    n: f64,
    beta: f64,
) -> Result<bool> {
    let lambda = n.powf(beta);
    check_target_time(z0, t)?;
    let original = evolve_event_driven(z0, field, t)?;

    let pts = match slab(z0, t) {
        Some(rect) => field.points_in(&rect),
        None => Vec::new(),
    };
    let scaled_pts = PointSet::new(scale_points(&pts, lambda)?);
    let scaled_z0 = ParticleConfig::new(
        z0.i_min,
        z0.positions.iter().map(|&p| lambda * p).collect(),
        z0.time / lambda,
    )?;
    let scaled = evolve_event_driven(&scaled_z0, &scaled_pts, t / lambda)?;
    Ok(original
        .positions
        .iter()
        .zip(&scaled.positions)
        .all(|(&a, &b)| (lambda * a).to_bits() == b.to_bits()))
}

/// Trajectory CSV with header `label,time,position`.
pub fn write_trajectory_csv<W: Write>(mut w: W, snapshots: &[ParticleConfig]) -> io::Result<()> {
    writeln!(w, "label,time,position")?;
    for snap in snapshots {
        for (j, &p) in snap.positions.iter().enumerate() {
            writeln!(
                w,
                "{},{},{}",
                snap.i_min + j as i64,
                crate::fmt_f64(snap.time),
                crate::fmt_f64(p)
            )?;
        }
    }
    Ok(())
}

/// Points used by a unit test or a caller that wants to inspect a slab.
pub fn slab_points<F: PointField + ?Sized>(z0: &ParticleConfig, field: &F, t: f64) -> Vec<PlanarPoint> {
    slab(z0, t).map(|r| field.points_in(&r)).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(i_min: i64, pos: &[f64]) -> ParticleConfig {
        ParticleConfig::new(i_min, pos.to_vec(), 0.0).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(ParticleConfig::new(0, vec![], 0.0).is_err());
        assert!(ParticleConfig::new(0, vec![1.0, 0.5], 0.0).is_err());
        assert!(ParticleConfig::new(0, vec![0.0, 0.0, 1.0], 0.0).is_ok());
        assert!(ParticleConfig::new(0, vec![0.0], -1.0).is_err());
    }

    #[test]
    fn tagged_lookup() {
        let z = cfg(-2, &[0.0, 1.5, 4.0]);
        assert_eq!(tagged_position(&z, -2).unwrap(), 0.0);
        assert_eq!(tagged_position(&z, -1).unwrap(), 1.5);
        assert_eq!(tagged_position(&z, 0).unwrap(), 4.0);
        assert!(matches!(
            tagged_position(&z, 1),
            Err(Error::LabelOutOfRange { label: 1, lo: -2, hi: 0 })
        ));
    }

    #[test]
    fn no_points_no_motion() {
        let z = cfg(0, &[0.0, 1.0, 2.0, 3.0]);
        let empty = PointSet::default();
        assert_eq!(evolve_event_driven(&z, &empty, 5.0).unwrap().positions(), z.positions());
        let out = evolve_variational(&z, &empty, 5.0, &[0, 1, 2, 3], &LabelWindow::full(&z)).unwrap();
        for (o, &p) in out.iter().zip(z.positions()) {
            assert_eq!(o.position, p);
            assert_eq!(o.minimizer, o.label);
        }
    }

    #[test]
    fn single_point_moves_one_particle() {
        let z = cfg(0, &[0.0, 1.0, 2.0, 3.0]);
        let pts = PointSet::new(vec![PlanarPoint::new(1.4, 0.7)]);
        let out = evolve_event_driven(&z, &pts, 1.0).unwrap();
        assert_eq!(out.positions(), &[0.0, 1.0, 1.4, 3.0]);
        assert_eq!(out.time(), 1.0);
        let v = evolve_variational(&z, &pts, 1.0, &[2], &LabelWindow::full(&z)).unwrap();
        assert_eq!(v[0].position, 1.4);
        assert_eq!(v[0].minimizer, 1);
        // Before the point's time nothing happens.
        assert_eq!(evolve_event_driven(&z, &pts, 0.5).unwrap().positions(), z.positions());
    }

    #[test]
    fn points_left_of_leftmost_are_ignored() {
        let z = cfg(0, &[0.0, 1.0]);
        let pts = PointSet::new(vec![PlanarPoint::new(-0.5, 0.2), PlanarPoint::new(0.0, 0.3)]);
        assert_eq!(evolve_event_driven(&z, &pts, 1.0).unwrap().positions(), z.positions());
    }

    #[test]
    fn traced_origins() {
        let z = cfg(0, &[0.0, 1.0, 2.0, 3.0]);
        // Two points forming an increasing pair from corner 1.
        let pts = PointSet::new(vec![PlanarPoint::new(1.5, 0.2), PlanarPoint::new(1.8, 0.4)]);
        let (out, origin) = evolve_event_driven_traced(&z, &pts, 1.0).unwrap();
        assert_eq!(out.positions(), &[0.0, 1.0, 1.5, 1.8]);
        assert_eq!(origin, vec![0, 1, 1, 1]);
        let v = evolve_variational(&z, &pts, 1.0, &[3], &LabelWindow::full(&z)).unwrap();
        assert_eq!(v[0].minimizer, 1);
        assert_eq!(v[0].position, 1.8);
    }

    #[test]
    fn window_exponent_cases() {
        assert!((window_exponent(1.0, 1.0 / 3.0, 0.05) - 0.716_666_666_666_666_7).abs() < 1e-12);
        assert!((window_exponent(1.25, 0.25, 0.05) - 1.0).abs() < 1e-15);
        for &(nu, beta) in &[(1.0, 0.1), (2.0, 1.5), (1.5, 0.2)] {
            let xi = window_exponent(nu, beta, 0.01);
            assert!(xi > 2.0 * nu / 3.0 && xi >= nu - beta);
        }
    }

    #[test]
    fn window_policy_sizes() {
        let p = WindowPolicy::new(1.0, 0.4, 0.05, 2.0, 3).unwrap();
        let w = p.half_width(400.0);
        assert_eq!(w, (2.0 * 400f64.powf(p.exponent())).ceil() as u64);
        assert_eq!(p.max_half_width(400.0), w * 8);
        assert!(WindowPolicy::new(1.0, 0.4, 0.0, 2.0, 3).is_err());
        assert!(WindowPolicy::new(1.0, 0.4, 0.05, 0.0, 3).is_err());
    }

    #[test]
    fn edge_hit_widens_or_exhausts() {
        // Every corner improves on its right neighbour; corner 0 is best.
        let z = cfg(0, &[0.0, 10.0, 20.0, 30.0]);
        let pts = PointSet::new(vec![
            PlanarPoint::new(0.5, 0.1),
            PlanarPoint::new(0.6, 0.2),
            PlanarPoint::new(0.7, 0.3),
            PlanarPoint::new(10.5, 0.4),
            PlanarPoint::new(10.6, 0.5),
            PlanarPoint::new(20.5, 0.6),
        ]);
        let narrow = LabelWindow {
            shift: 0,
            half_width: 1,
            max_widenings: 0,
        };
        // Window [2, 3]: the minimizer sits on the interior left edge 2.
        assert!(matches!(
            evolve_variational(&z, &pts, 1.0, &[3], &narrow),
            Err(Error::WindowExhausted { label: 3, .. })
        ));
        let widening = LabelWindow {
            max_widenings: 2,
            ..narrow
        };
        let out = evolve_variational(&z, &pts, 1.0, &[3], &widening).unwrap();
        assert_eq!(out[0].position, 0.7);
        assert_eq!(out[0].minimizer, 0);
        assert_eq!(out[0].widenings, 2);
    }

    #[test]
    fn out_of_range_label() {
        let z = cfg(0, &[0.0, 1.0]);
        assert!(matches!(
            evolve_variational(&z, &PointSet::default(), 1.0, &[5], &LabelWindow::full(&z)),
            Err(Error::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn scaling_identity_and_single_point() {
        let z = cfg(0, &[0.0, 1.0, 2.0, 3.0]);
        let pts = PointSet::new(vec![PlanarPoint::new(1.4, 0.7)]);
        assert!(scaling_covariance_check(&z, &pts, 1.0, 7.0, 0.0).unwrap());
        assert!(scaling_covariance_check(&z, &pts, 1.0, 2.0, 1.0).unwrap());
        assert!(scaling_covariance_check(&z, &pts, 1.0, 3.0, 0.5).unwrap());
    }

    #[test]
    fn trajectory_csv() {
        let z = cfg(0, &[0.0, 1.0]);
        let pts = PointSet::new(vec![PlanarPoint::new(0.5, 0.7)]);
        let snaps = trajectory(&z, &pts, &[0.5, 1.0]).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &snaps).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "label,time,position\n0,0.5,0.0\n1,0.5,1.0\n0,1.0,0.0\n1,1.0,0.5\n"
        );
    }
}
