//! Stick heights `eta(i) = z(i) - z(i-1)` and their dynamics.
//!
//! Each stick `i` of height `eta(i)` fires at rate `eta(i)`; on firing, a
//! uniform fraction of it is kept and the rest moves to stick `i + 1`. The
//! [`evolve_sticks_direct`] simulator runs these dynamics on a finite label
//! window. The leftmost stick receives nothing (closed left edge), so only
//! sticks far enough from the left edge follow the infinite system; see
//! [`faithful_interior`].

use std::io::{self, Write};
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{invalid, Error, Result};
use crate::hammersley::ParticleConfig;
use crate::piecewise::{PiecewiseLinearFn, Potential};

/// Nonnegative stick heights for labels `i_min..=i_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct StickConfig {
    i_min: i64,
    heights: Vec<f64>,
    time: f64,
}

impl StickConfig {
    pub fn new(i_min: i64, heights: Vec<f64>, time: f64) -> Result<Self> {
        if heights.is_empty() {
            return Err(invalid("stick configuration needs at least one site"));
        }
        if let Some(j) = heights.iter().position(|h| !(h.is_finite() && *h >= 0.0)) {
            return Err(invalid(format!(
                "stick at label {} has height {}",
                i_min + j as i64,
                heights[j]
            )));
        }
        if !(time >= 0.0 && time.is_finite()) {
            return Err(invalid(format!("time stamp must be >= 0, got {time}")));
        }
        Ok(Self { i_min, heights, time })
    }

    pub fn i_min(&self) -> i64 {
        self.i_min
    }

    pub fn i_max(&self) -> i64 {
        self.i_min + self.heights.len() as i64 - 1
    }

    pub fn labels(&self) -> RangeInclusive<i64> {
        self.i_min..=self.i_max()
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn height(&self, label: i64) -> Option<f64> {
        self.labels()
            .contains(&label)
            .then(|| self.heights[(label - self.i_min) as usize])
    }

    pub fn total_mass(&self) -> f64 {
        self.heights.iter().sum()
    }
}

/// Macroscopic density `q + n^{-beta} v0(x)` seen at scale `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationProfile {
    q: f64,
    beta: f64,
    n: u64,
    v0: PiecewiseLinearFn,
    potential: Potential,
}

impl PerturbationProfile {
    pub fn new(q: f64, beta: f64, n: u64, v0: PiecewiseLinearFn) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::Config(format!("density q must be > 0, got {q}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Config(format!("beta must be > 0, got {beta}")));
        }
        if n == 0 {
            return Err(Error::Config("scale n must be >= 1".into()));
        }
        if v0.tail_values().is_none() {
            return Err(Error::Config("v0 must be constant in both tails".into()));
        }
        let sup = v0.sup_abs();
        if !(q > (n as f64).powf(-beta) * sup) {
            return Err(Error::Config(format!(
                "density would not stay positive: q = {q} <= n^-beta sup|v0| = {}",
                (n as f64).powf(-beta) * sup
            )));
        }
        let potential = Potential::antiderivative(&v0, 0.0, 0.0)?;
        Ok(Self {
            q,
            beta,
            n,
            v0,
            potential,
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn v0(&self) -> &PiecewiseLinearFn {
        &self.v0
    }

    /// `V0` with `V0(0) = 0`.
    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// `q + n^{1-beta} * integral of v0 over [(i-1)/n, i/n]`.
    pub fn mean(&self, label: i64) -> f64 {
        let n = self.n as f64;
        let a = (label - 1) as f64 / n;
        let b = label as f64 / n;
        self.q + n.powf(1.0 - self.beta) * self.v0.integral(a, b)
    }
}

const EQ_BLOCK: i64 = 256;

fn block_rng(seed: u64, block: i64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&block.to_le_bytes());
    key[16..].copy_from_slice(b"sticks-local-eq\0");
    ChaCha8Rng::from_seed(key)
}

/// Independent exponential sticks with the profile's per-site means.
///
/// The draw for a label depends only on `(seed, label)`, so overlapping
/// ranges sampled with the same seed agree on their common labels.
pub fn sample_local_equilibrium(
    profile: &PerturbationProfile,
    labels: RangeInclusive<i64>,
    seed: u64,
) -> Result<StickConfig> {
    let (lo, hi) = (*labels.start(), *labels.end());
    if lo > hi {
        return Err(invalid(format!("empty label range {lo}..={hi}")));
    }
    let mut heights = Vec::with_capacity((hi - lo + 1) as usize);
    let mut block = lo.div_euclid(EQ_BLOCK);
    let mut rng = block_rng(seed, block);
    // Skip to the offset of `lo` within its block.
    for _ in 0..lo.rem_euclid(EQ_BLOCK) {
        let _: f64 = Exp1.sample(&mut rng);
    }
    for label in lo..=hi {
        let b = label.div_euclid(EQ_BLOCK);
        if b != block {
            block = b;
            rng = block_rng(seed, block);
        }
        let mean = profile.mean(label);
        if !(mean > 0.0) {
            return Err(Error::Config(format!(
                "non-positive stick mean {mean} at label {label}"
            )));
        }
        let x: f64 = Exp1.sample(&mut rng);
        heights.push(mean * x);
    }
    StickConfig::new(lo, heights, 0.0)
}

/// `E z(i, 0) = q i + n^{1-beta} V0(i/n)` for the configuration anchored at
/// `z(0) = 0`.
pub fn expected_initial_position(profile: &PerturbationProfile, label: i64) -> f64 {
    let n = profile.n as f64;
    profile.q * label as f64 + n.powf(1.0 - profile.beta) * profile.potential.eval(label as f64 / n)
}

/// Particles for labels `i_min - 1 ..= i_max` with `z(i) - z(i-1) = eta(i)`
/// and `z(anchor_label) = anchor_position`.
pub fn sticks_to_particles(
    eta: &StickConfig,
    anchor_label: i64,
    anchor_position: f64,
) -> Result<ParticleConfig> {
    let first = eta.i_min - 1;
    if anchor_label < first || anchor_label > eta.i_max() {
        return Err(Error::LabelOutOfRange {
            label: anchor_label,
            lo: first,
            hi: eta.i_max(),
        });
    }
    // Accumulate outward from the anchor so its position is exact.
    let a = (anchor_label - first) as usize;
    let mut pos = vec![0.0; eta.len() + 1];
    pos[a] = anchor_position;
    for j in (0..a).rev() {
        pos[j] = pos[j + 1] - eta.heights[j];
    }
    for j in a + 1..pos.len() {
        pos[j] = pos[j - 1] + eta.heights[j - 1];
    }
    ParticleConfig::new(first, pos, eta.time)
}

/// `eta(i) = z(i) - z(i-1)` for labels `i_min + 1 ..= i_max`.
pub fn particles_to_sticks(z: &ParticleConfig) -> Result<StickConfig> {
    if z.len() < 2 {
        return Err(invalid("need at least two particles to form a stick"));
    }
    let heights = z.positions().windows(2).map(|w| w[1] - w[0]).collect();
    StickConfig::new(z.i_min() + 1, heights, z.time())
}

/// What happens to mass leaving the rightmost stick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RightBoundary {
    /// Mass leaving `i_max` exits the window. Matches particle evolution of
    /// the corresponding finite particle system.
    OpenRight,
    /// The rightmost stick never fires; total mass is conserved.
    ClosedRight,
}

/// Gillespie simulation of the stick dynamics from `eta0.time()` to `t`.
pub fn evolve_sticks_direct(
    eta0: &StickConfig,
    t: f64,
    seed: u64,
    boundary: RightBoundary,
) -> Result<StickConfig> {
    if !(t >= eta0.time && t.is_finite()) {
        return Err(invalid(format!(
            "target time {t} precedes configuration time {}",
            eta0.time
        )));
    }
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&eta0.i_min.to_le_bytes());
    key[16..].copy_from_slice(b"sticks-gillespie");
    let mut rng = ChaCha8Rng::from_seed(key);

    let mut eta = eta0.heights.clone();
    let active = match boundary {
        RightBoundary::OpenRight => eta.len(),
        RightBoundary::ClosedRight => eta.len() - 1,
    };
    let mut now = eta0.time;
    loop {
        // Fresh sum every event: no accumulated drift in the total rate.
        let total: f64 = eta[..active].iter().sum();
        if total <= 0.0 {
            break;
        }
        let wait: f64 = Exp1.sample(&mut rng);
        now += wait / total;
        if now > t {
            break;
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut site = active - 1;
        for (j, &h) in eta[..active].iter().enumerate() {
            acc += h;
            if target < acc {
                site = j;
                break;
            }
        }
        if eta[site] == 0.0 {
            continue;
        }
        let kept = eta[site] * rng.random::<f64>();
        let moved = eta[site] - kept;
        eta[site] = kept;
        if site + 1 < eta.len() {
            eta[site + 1] += moved;
        }
    }
    StickConfig::new(eta0.i_min, eta, t)
}

/// Labels of `eta` that are at least `4 q t` sites from the closed left edge,
/// or `None` when the window is too short. The open right edge is exact
/// because mass only flows rightward.
pub fn faithful_interior(eta: &StickConfig, q: f64, t: f64) -> Option<RangeInclusive<i64>> {
    let margin = (4.0 * q * t).ceil().max(0.0) as i64;
    let lo = eta.i_min + margin;
    (lo <= eta.i_max()).then_some(lo..=eta.i_max())
}

/// Stick snapshot CSV with header `label,height`.
pub fn write_sticks_csv<W: Write>(mut w: W, eta: &StickConfig) -> io::Result<()> {
    writeln!(w, "label,height")?;
    for (j, &h) in eta.heights.iter().enumerate() {
        writeln!(w, "{},{}", eta.i_min + j as i64, crate::fmt_f64(h))?;
    }
    Ok(())
}
