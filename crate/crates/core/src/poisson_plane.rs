//! Rate-one Poisson points on the space-time half plane `R x (0, inf)`.
//!
//! A [`PointStore`] realizes the process lazily on a grid of cells of size
//! `strip_width x chunk_height`. Each cell is generated from its own ChaCha
//! stream keyed by `(global_seed, strip_index, chunk_index)`, so the content of
//! a cell never depends on which other cells were realized or in what order.
//! Widening a query window therefore only ever adds points.
//!
//! Mutation: the only mutable state is the cell cache. [`PointField::points_in`]
//! inserts newly realized cells into it under a lock; [`PointStore::clear_cache`]
//! drops it. Both take `&self`, and a store can be shared across threads.

use std::collections::{HashMap, HashSet};
use std::io::{self, Write};
use std::sync::{Arc, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{invalid, Result};

/// A space-time point `(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPoint {
    pub x: f64,
    pub t: f64,
}

impl PlanarPoint {
    pub const fn new(x: f64, t: f64) -> Self {
        Self { x, t }
    }

    /// Strictly below-left of `other` in both coordinates.
    #[inline]
    pub fn precedes(&self, other: &PlanarPoint) -> bool {
        self.x < other.x && self.t < other.t
    }
}

/// Half-open rectangle `(x_lo, x_hi] x (t_lo, t_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub x_lo: f64,
    pub x_hi: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Rectangle {
    pub fn new(x_lo: f64, x_hi: f64, t_lo: f64, t_hi: f64) -> Result<Self> {
        let finite = [x_lo, x_hi, t_lo, t_hi].iter().all(|v| v.is_finite());
        if !finite || !(x_lo < x_hi) || !(t_lo < t_hi) {
            return Err(invalid(format!(
                "rectangle ({x_lo}, {x_hi}] x ({t_lo}, {t_hi}] is empty or not finite"
            )));
        }
        Ok(Self {
            x_lo,
            x_hi,
            t_lo,
            t_hi,
        })
    }

    #[inline]
    pub fn contains(&self, p: &PlanarPoint) -> bool {
        p.x > self.x_lo && p.x <= self.x_hi && p.t > self.t_lo && p.t <= self.t_hi
    }

    pub fn area(&self) -> f64 {
        (self.x_hi - self.x_lo) * (self.t_hi - self.t_lo)
    }
}

/// Anything that can enumerate its points inside a rectangle.
pub trait PointField: Sync {
    /// Appends the points inside `rect` to `out`, in no particular order.
    fn collect_in(&self, rect: &Rectangle, out: &mut Vec<PlanarPoint>);

    /// Points inside `rect` sorted by `x` ascending.
    fn points_in(&self, rect: &Rectangle) -> Vec<PlanarPoint> {
        let mut out = Vec::new();
        self.collect_in(rect, &mut out);
        sort_by_x(&mut out);
        out
    }
}

pub(crate) fn sort_by_x(points: &mut [PlanarPoint]) {
    points.sort_unstable_by(|a, b| a.x.total_cmp(&b.x).then(b.t.total_cmp(&a.t)));
}

pub(crate) fn sort_by_t(points: &mut [PlanarPoint]) {
    points.sort_unstable_by(|a, b| a.t.total_cmp(&b.t).then(a.x.total_cmp(&b.x)));
}

type Cell = Arc<Vec<PlanarPoint>>;

/// Lazily realized, reproducible Poisson process of intensity one.
#[derive(Debug)]
pub struct PointStore {
    global_seed: u64,
    strip_width: f64,
    chunk_height: f64,
    cells: RwLock<HashMap<(i64, i64), Cell>>,
}

impl PointStore {
    pub const DEFAULT_STRIP_WIDTH: f64 = 1.0;
    pub const DEFAULT_CHUNK_HEIGHT: f64 = 16.0;

    pub fn new(global_seed: u64) -> Self {
        Self::with_geometry(
            global_seed,
            Self::DEFAULT_STRIP_WIDTH,
            Self::DEFAULT_CHUNK_HEIGHT,
        )
        .expect("default geometry is valid")
    }

    pub fn with_geometry(global_seed: u64, strip_width: f64, chunk_height: f64) -> Result<Self> {
        if !(strip_width > 0.0 && strip_width.is_finite()) {
            return Err(invalid(format!("strip_width must be > 0, got {strip_width}")));
        }
        if !(chunk_height > 0.0 && chunk_height.is_finite()) {
            return Err(invalid(format!(
                "chunk_height must be > 0, got {chunk_height}"
            )));
        }
        Ok(Self {
            global_seed,
            strip_width,
            chunk_height,
            cells: RwLock::new(HashMap::new()),
        })
    }

    pub fn global_seed(&self) -> u64 {
        self.global_seed
    }

    pub fn strip_width(&self) -> f64 {
        self.strip_width
    }

    /// Number of cells currently cached.
    pub fn realized_cells(&self) -> usize {
        self.cells.read().expect("cell cache poisoned").len()
    }

    pub fn clear_cache(&self) {
        self.cells.write().expect("cell cache poisoned").clear();
    }

    fn cell(&self, strip: i64, chunk: i64) -> Cell {
        if let Some(c) = self
            .cells
            .read()
            .expect("cell cache poisoned")
            .get(&(strip, chunk))
        {
            return Arc::clone(c);
        }
        let fresh = Arc::new(self.generate_cell(strip, chunk));
        let mut cache = self.cells.write().expect("cell cache poisoned");
        Arc::clone(cache.entry((strip, chunk)).or_insert(fresh))
    }

    fn generate_cell(&self, strip: i64, chunk: i64) -> Vec<PlanarPoint> {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.global_seed.to_le_bytes());
        key[8..16].copy_from_slice(&strip.to_le_bytes());
        key[16..24].copy_from_slice(&chunk.to_le_bytes());
        key[24..].copy_from_slice(b"poisson2");
        let mut rng = ChaCha8Rng::from_seed(key);

        let x0 = strip as f64 * self.strip_width;
        let x1 = (strip + 1) as f64 * self.strip_width;
        let t0 = chunk as f64 * self.chunk_height;
        let t1 = (chunk + 1) as f64 * self.chunk_height;
        let mean = (x1 - x0) * (t1 - t0);
        let count = Poisson::new(mean)
            .expect("cell area is positive")
            .sample(&mut rng) as usize;

        let mut points = Vec::with_capacity(count);
        let mut xs = HashSet::with_capacity(count);
        let mut ts = HashSet::with_capacity(count);
        while points.len() < count {
            // 1 - u lies in (0, 1], giving the half-open (lo, hi] convention.
            let x = x0 + (x1 - x0) * (1.0 - rng.random::<f64>());
            let t = t0 + (t1 - t0) * (1.0 - rng.random::<f64>());
            if !(x > x0 && x <= x1 && t > t0 && t <= t1 && t > 0.0) {
                continue;
            }
            // Exact coordinate collisions are a null event; redraw.
            if xs.contains(&x.to_bits()) || ts.contains(&t.to_bits()) {
                continue;
            }
            xs.insert(x.to_bits());
            ts.insert(t.to_bits());
            points.push(PlanarPoint { x, t });
        }
        sort_by_x(&mut points);
        points
    }
}

impl PointField for PointStore {
    fn collect_in(&self, rect: &Rectangle, out: &mut Vec<PlanarPoint>) {
        if rect.t_hi <= 0.0 {
            return;
        }
        let s_lo = (rect.x_lo / self.strip_width).floor() as i64 - 1;
        let s_hi = (rect.x_hi / self.strip_width).ceil() as i64 + 1;
        let c_lo = ((rect.t_lo / self.chunk_height).floor() as i64 - 1).max(0);
        let c_hi = (rect.t_hi / self.chunk_height).ceil() as i64 + 1;
        for strip in s_lo..=s_hi {
            for chunk in c_lo..=c_hi {
                let cell = self.cell(strip, chunk);
                out.extend(cell.iter().filter(|p| rect.contains(p)));
            }
        }
    }
}

/// An explicit finite point set, kept sorted by `x`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointSet {
    points: Vec<PlanarPoint>,
}

impl PointSet {
    pub fn new(mut points: Vec<PlanarPoint>) -> Self {
        sort_by_x(&mut points);
        Self { points }
    }

    pub fn as_slice(&self) -> &[PlanarPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl PointField for PointSet {
    fn collect_in(&self, rect: &Rectangle, out: &mut Vec<PlanarPoint>) {
        let start = self.points.partition_point(|p| p.x <= rect.x_lo);
        out.extend(
            self.points[start..]
                .iter()
                .take_while(|p| p.x <= rect.x_hi)
                .filter(|p| rect.contains(p)),
        );
    }
}

/// Maps `(x, t)` to `(lambda x, t / lambda)`; area and two-coordinate order are
/// preserved.
pub fn scale_points(points: &[PlanarPoint], lambda: f64) -> Result<Vec<PlanarPoint>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("scale factor must be > 0, got {lambda}")));
    }
    let mut out: Vec<PlanarPoint> = points
        .iter()
        .map(|p| PlanarPoint {
            x: lambda * p.x,
            t: p.t / lambda,
        })
        .collect();
    sort_by_x(&mut out);
    Ok(out)
}

/// Writes the point dump format: header `x,t`, one row per point sorted by `x`,
/// 17 significant digits.
pub fn write_points_csv<W: Write>(mut w: W, points: &[PlanarPoint]) -> io::Result<()> {
    let mut sorted = points.to_vec();
    sort_by_x(&mut sorted);
    writeln!(w, "x,t")?;
    for p in &sorted {
        writeln!(w, "{:.16e},{:.16e}", p.x, p.t)?;
    }
    Ok(())
}
