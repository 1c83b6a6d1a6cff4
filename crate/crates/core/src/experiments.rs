//! Monte-Carlo harnesses for the translation and perturbation limits.
//!
//! Every harness draws, per seed, an initial configuration of independent
//! exponential sticks (anchored at `z(0) = 0`) and an independent Poisson
//! field, evolves the particle system to `T = n^nu t`, and compares a
//! statistic with its predicted value. The limits hold almost surely
//! as `n -> inf`; the harness can only report the residual at
//! finite `n` over a sweep, in mean and per seed.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::burgers::{asymptotic_profile_value, integrate_against, slopes_at_infinity, solution_value};
use crate::error::{invalid, Error, Result};
use crate::fmt_f64 as f;
use crate::hammersley::{evolve_event_driven_traced, evolve_variational, window_exponent, LabelWindow, ParticleConfig};
use crate::piecewise::PiecewiseLinearFn;
use crate::poisson_plane::PointStore;
use crate::stats::{mean_se, ols, MeanSe};
use crate::sticks::{sample_local_equilibrium, sticks_to_particles, PerturbationProfile};

/// Default slack `delta` added to every error exponent.
pub const DEFAULT_DELTA: f64 = 0.05;

/// Statement printed with every summary.
pub const SURROGATE_NOTE: &str =
    "almost-sure limits are checked through residual means and per-seed values over an n sweep";

/// `floor(2 n^nu q t)`.
pub fn translation(n: u64, nu: f64, q: f64, t: f64) -> i64 {
    (2.0 * (n as f64).powf(nu) * q * t).floor() as i64
}

/// `max(nu - 2 beta, nu / 3)`.
pub fn error_exponent(nu: f64, beta: f64) -> f64 {
    (nu - 2.0 * beta).max(nu / 3.0)
}

/// Scaling parameters of one cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingParams {
    pub n: u64,
    pub nu: f64,
    pub beta: f64,
    pub q: f64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl ScalingParams {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.n == 0 {
            errs.push("n must be >= 1".to_string());
        }
        if !(self.nu >= 1.0 && self.nu.is_finite()) {
            errs.push(format!("nu must be >= 1, got {}", self.nu));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            errs.push(format!("beta must be > 0, got {}", self.beta));
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            errs.push(format!("q must be > 0, got {}", self.q));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            errs.push(format!("t must be >= 0, got {}", self.t));
        }
        if !(self.x.is_finite() && self.y.is_finite()) {
            errs.push("x and y must be finite".to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs.join("; ")))
        }
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// Macroscopic time `n^nu t`.
    pub fn horizon(&self) -> f64 {
        self.nf().powf(self.nu) * self.t
    }

    pub fn translation(&self) -> i64 {
        translation(self.n, self.nu, self.q, self.t)
    }

    pub fn error_exponent(&self) -> f64 {
        error_exponent(self.nu, self.beta)
    }

    /// `nu > 3 beta`.
    pub fn fast_branch(&self) -> bool {
        self.nu > 3.0 * self.beta
    }

    fn floor_nx(&self) -> i64 {
        (self.nf() * self.x).floor() as i64
    }

    fn floor_ny(&self) -> i64 {
        (self.nf() * self.y).floor() as i64
    }

    fn require_interval(&self) -> Result<()> {
        if self.x < self.y {
            Ok(())
        } else {
            Err(Error::Config(format!("need x < y, got x = {}, y = {}", self.x, self.y)))
        }
    }
}

/// Continuous, compactly supported piecewise-linear test function.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction(PiecewiseLinearFn);

impl TestFunction {
    pub fn new(phi: PiecewiseLinearFn) -> Result<Self> {
        if !phi.is_continuous() || !phi.has_compact_support() {
            return Err(Error::Config(
                "test function must be continuous with compact support".into(),
            ));
        }
        Ok(Self(phi))
    }

    pub fn function(&self) -> &PiecewiseLinearFn {
        &self.0
    }
}

/// Tuning shared by all harnesses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnessOptions {
    /// Slack added to error exponents and to the window exponent.
    pub delta: f64,
    /// Multiplier `b` of the window half-width `b n^xi`.
    pub window_multiplier: f64,
    pub max_widenings: u32,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            window_multiplier: 4.0,
            max_widenings: 4,
        }
    }
}

impl HarnessOptions {
    fn half_width(&self, p: &ScalingParams) -> u64 {
        let xi = window_exponent(p.nu, p.beta, self.delta);
        (self.window_multiplier * p.nf().powf(xi)).ceil().max(1.0) as u64
    }
}

/// One seed's outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub statistic: f64,
    pub target: f64,
    pub residual: f64,
    pub normalized_residual: f64,
}

impl Measurement {
    fn new(statistic: f64, target: f64, scale: f64) -> Self {
        let residual = statistic - target;
        Self {
            statistic,
            target,
            residual,
            normalized_residual: residual / scale,
        }
    }
}

/// Particle configuration on labels `lo..=hi` (extended to contain 0, the
/// anchor) built from the profile's local-equilibrium sticks.
pub fn initial_configuration(profile: &PerturbationProfile, lo: i64, hi: i64, seed: u64) -> Result<ParticleConfig> {
    let first = lo.min(0);
    let last = hi.max(0).max(first + 1);
    let eta = sample_local_equilibrium(profile, first + 1..=last, seed)?;
    sticks_to_particles(&eta, 0, 0.0)
}

fn check_profile(p: &ScalingParams, profile: &PerturbationProfile) -> Result<()> {
    p.validate()?;
    if profile.n() != p.n || profile.q() != p.q || profile.beta() != p.beta {
        return Err(Error::Config(
            "perturbation profile disagrees with the scaling parameters".into(),
        ));
    }
    Ok(())
}

/// Positions at `T = n^nu t` of `labels`, by the windowed variational formula
/// with the minimizer window centred `translation` labels to the left.
fn tagged_positions(
    p: &ScalingParams,
    profile: &PerturbationProfile,
    labels: &[i64],
    seed: u64,
    opts: &HarnessOptions,
) -> Result<(ParticleConfig, Vec<f64>)> {
    let shift = p.translation();
    let half = opts.half_width(p);
    let reach = (half << opts.max_widenings) as i64;
    let lo = labels.iter().map(|k| k - shift).min().unwrap() - reach - 1;
    let hi = *labels.iter().max().unwrap();
    let z0 = initial_configuration(profile, lo, hi, seed)?;
    let store = PointStore::new(seed);
    let window = LabelWindow {
        shift,
        half_width: half,
        max_widenings: opts.max_widenings,
    };
    let out = evolve_variational(&z0, &store, p.horizon(), labels, &window)?;
    Ok((z0, out.into_iter().map(|o| o.position).collect()))
}

fn position(z: &ParticleConfig, label: i64) -> f64 {
    z.position(label).expect("label inside the sampled configuration")
}

/// Translated stick sum minus initial stick sum over `([nx], [ny]]`.
pub fn thm1_residual(p: &ScalingParams, profile: &PerturbationProfile, seed: u64, opts: &HarnessOptions) -> Result<Measurement> {
    check_profile(p, profile)?;
    p.require_interval()?;
    let (a, b) = (p.floor_nx(), p.floor_ny());
    let k = p.translation();
    let (z0, z) = tagged_positions(p, profile, &[k + a, k + b], seed, opts)?;
    let statistic = z[1] - z[0];
    let target = position(&z0, b) - position(&z0, a);
    let scale = p.nf().powf(p.error_exponent() + opts.delta);
    Ok(Measurement::new(statistic, target, scale))
}

/// Tagged particle `[nx] + [2 n^nu q t]` at `T` against `T q^2 + z([nx], 0)`.
pub fn thm3_residual(p: &ScalingParams, profile: &PerturbationProfile, seed: u64, opts: &HarnessOptions) -> Result<Measurement> {
    check_profile(p, profile)?;
    let a = p.floor_nx();
    let (z0, z) = tagged_positions(p, profile, &[a + p.translation()], seed, opts)?;
    let target = p.horizon() * p.q * p.q + position(&z0, a);
    let scale = p.nf().powf(p.error_exponent() + opts.delta);
    Ok(Measurement::new(z[0], target, scale))
}

/// Time-scale regime of the tagged-particle perturbation limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `nu > 1 + beta`: only the asymptotic slopes of `V0` are seen.
    Fast,
    /// `nu = 1 + beta`: the Hopf-Lax solution `V(x, t)`.
    Critical,
    /// `1 <= nu < 1 + beta`: the initial potential `V0(x)`.
    Slow,
}

impl Regime {
    pub fn from_case(case: u8) -> Result<Self> {
        match case {
            1 => Ok(Regime::Fast),
            2 => Ok(Regime::Critical),
            3 => Ok(Regime::Slow),
            _ => Err(Error::Config(format!("case must be 1, 2 or 3, got {case}"))),
        }
    }

    pub fn case(&self) -> u8 {
        match self {
            Regime::Fast => 1,
            Regime::Critical => 2,
            Regime::Slow => 3,
        }
    }

    fn check(&self, p: &ScalingParams) -> Result<()> {
        if !p.fast_branch() {
            return Err(Error::Config(format!(
                "need nu > 3 beta, got nu = {}, beta = {}",
                p.nu, p.beta
            )));
        }
        let crit = 1.0 + p.beta;
        let ok = match self {
            Regime::Fast => p.nu > crit + 1e-12,
            Regime::Critical => (p.nu - crit).abs() <= 1e-12,
            Regime::Slow => p.nu < crit - 1e-12,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "case {} does not match nu = {} and beta = {}",
                self.case(),
                p.nu,
                p.beta
            )))
        }
    }
}

/// Tagged particle against `T q^2 + n x q + P_n` with the regime's
/// perturbation term `P_n`.
pub fn thm4_residual(
    p: &ScalingParams,
    profile: &PerturbationProfile,
    regime: Regime,
    seed: u64,
    opts: &HarnessOptions,
) -> Result<Measurement> {
    check_profile(p, profile)?;
    regime.check(p)?;
    let n = p.nf();
    let v0 = profile.potential();
    let (perturbation, scale) = match regime {
        Regime::Fast => {
            let (vm, vp) = slopes_at_infinity(v0);
            let s = n.powf(p.nu - 2.0 * p.beta);
            (s * asymptotic_profile_value(vm, vp, 0.0, p.t)?, s)
        }
        Regime::Critical => {
            let s = n.powf(1.0 - p.beta);
            (s * solution_value(v0, p.x, p.t)?, s)
        }
        Regime::Slow => {
            let s = n.powf(1.0 - p.beta);
            let err = n.powf(0.5f64.max(p.nu - 2.0 * p.beta) + opts.delta);
            (s * v0.eval(p.x), err)
        }
    };
    let k = p.floor_nx() + p.translation();
    let (_, z) = tagged_positions(p, profile, &[k], seed, opts)?;
    let target = p.horizon() * p.q * p.q + n * p.x * p.q + perturbation;
    Ok(Measurement::new(z[0], target, scale))
}

/// Translated window sum `sum_{i in ([nx], [ny]]} eta(K + i, T)` against
/// `n q (y - x)`. `shift` defaults to `[2 n^nu q t]`.
pub fn benchmark_residual(
    p: &ScalingParams,
    profile: &PerturbationProfile,
    shift: Option<i64>,
    seed: u64,
    opts: &HarnessOptions,
) -> Result<Measurement> {
    check_profile(p, profile)?;
    p.require_interval()?;
    let k = shift.unwrap_or_else(|| p.translation());
    let (a, b) = (p.floor_nx(), p.floor_ny());
    let (_, z) = tagged_positions(p, profile, &[k + a, k + b], seed, opts)?;
    let n = p.nf();
    let scale = n.powf(0.5f64.max(1.0 - p.beta) + opts.delta);
    Ok(Measurement::new(z[1] - z[0], n * p.q * (p.y - p.x), scale))
}

/// `int phi(x) v(x, t) dx` for the profile's `v0`.
pub fn thm2_target(profile: &PerturbationProfile, phi: &TestFunction, t: f64) -> Result<f64> {
    integrate_against(phi.function(), profile.potential(), t)
}

/// `n^{beta-1} sum_i (eta([2 n^{1+beta} q t] + i, n^{1+beta} t) - q) phi(i/n)`
/// against its hydrodynamic limit. `nu` is taken to be `1 + beta`
/// whatever `p.nu` says.
///
/// All labels in the support of `phi` are needed, so the whole window is
/// evolved event by event; each particle's origin corner is checked against
/// the candidate window and the window is widened when an origin reaches it.
pub fn thm2_statistic(
    p: &ScalingParams,
    profile: &PerturbationProfile,
    phi: &TestFunction,
    seed: u64,
    opts: &HarnessOptions,
) -> Result<Measurement> {
    let p = ScalingParams {
        nu: 1.0 + p.beta,
        ..*p
    };
    check_profile(&p, profile)?;
    let target = thm2_target(profile, phi, p.t)?;
    let n = p.nf();
    let f = phi.function();
    let (a, b) = f.knot_span();
    let (i_lo, i_hi) = ((a * n).floor() as i64, (b * n).ceil() as i64);
    let shift = p.translation();
    let horizon = p.horizon();
    let store = PointStore::new(seed);

    let mut half = opts.half_width(&p) as i64;
    let mut widenings = 0;
    let z = loop {
        // Observed particles run from K + i_lo - 1 to K + i_hi.
        let first_obs = shift + i_lo - 1;
        let last_obs = shift + i_hi;
        let z0 = initial_configuration(profile, first_obs - shift - half - 1, last_obs, seed)?;
        let (z, origin) = evolve_event_driven_traced(&z0, &store, horizon)?;
        let edge = (first_obs..=last_obs).find(|&k| {
            let c = k - shift;
            let o = origin[(k - z.i_min()) as usize];
            o <= c - half || (c + half < k && o >= c + half)
        });
        match edge {
            None => break z,
            Some(label) if widenings >= opts.max_widenings => {
                return Err(Error::WindowExhausted {
                    label,
                    widenings,
                    half_width: half as u64,
                })
            }
            Some(_) => {
                widenings += 1;
                half *= 2;
            }
        }
    };

    let mut sum = 0.0;
    for i in i_lo..=i_hi {
        let w = f.eval(i as f64 / n);
        if w != 0.0 {
            let k = shift + i;
            sum += (position(&z, k) - position(&z, k - 1) - p.q) * w;
        }
    }
    let statistic = n.powf(p.beta - 1.0) * sum;
    Ok(Measurement::new(statistic, target, 1.0))
}

/// Least-squares slope of `log |value|` against `log n`, with its standard
/// error. Needs at least three distinct `n`.
pub fn fit_error_exponent(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    let mut ns: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    ns.sort_by(f64::total_cmp);
    ns.dedup();
    if ns.len() < 3 {
        return Err(invalid("exponent fit needs at least three distinct n"));
    }
    if pairs.iter().any(|&(n, v)| !(n > 0.0) || v == 0.0 || !v.is_finite()) {
        return Err(invalid("exponent fit needs positive n and nonzero finite values"));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.abs().ln()).collect();
    let (slope, se, _) = ols(&xs, &ys);
    Ok((slope, se))
}

/// Which harness a sweep runs.
#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Thm1,
    Thm2(TestFunction),
    Thm3,
    Thm4(Regime),
    Benchmark { shift: Option<i64> },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Thm1 => "thm1",
            Experiment::Thm2(_) => "thm2",
            Experiment::Thm3 => "thm3",
            Experiment::Thm4(_) => "thm4",
            Experiment::Benchmark { .. } => "benchmark",
        }
    }

    pub fn measure(
        &self,
        p: &ScalingParams,
        profile: &PerturbationProfile,
        seed: u64,
        opts: &HarnessOptions,
    ) -> Result<Measurement> {
        match self {
            Experiment::Thm1 => thm1_residual(p, profile, seed, opts),
            Experiment::Thm2(phi) => thm2_statistic(p, profile, phi, seed, opts),
            Experiment::Thm3 => thm3_residual(p, profile, seed, opts),
            Experiment::Thm4(r) => thm4_residual(p, profile, *r, seed, opts),
            Experiment::Benchmark { shift } => benchmark_residual(p, profile, *shift, seed, opts),
        }
    }

    /// Parameters actually used for a cell (thm2 forces `nu = 1 + beta`).
    fn effective(&self, p: &ScalingParams) -> ScalingParams {
        match self {
            Experiment::Thm2(_) => ScalingParams {
                nu: 1.0 + p.beta,
                ..*p
            },
            _ => *p,
        }
    }
}

/// Per-seed row of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedRow {
    pub params: ScalingParams,
    pub seed: u64,
    pub measurement: Measurement,
}

/// Per-`n` aggregates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub n: u64,
    pub residual: MeanSe,
    pub abs_residual: MeanSe,
    pub normalized: MeanSe,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub experiment: String,
    pub rows: Vec<SeedRow>,
    pub summaries: Vec<CellSummary>,
    /// Slope and standard error of `log mean|residual|` against `log n`.
    pub fitted_exponent: Option<(f64, f64)>,
    /// Predicted exponent the fit is compared with, when there is one.
    pub reference_exponent: Option<f64>,
    pub notes: Vec<String>,
}

/// Summaries recomputed from per-seed rows, in order of first appearance of `n`.
pub fn summarize(rows: &[SeedRow]) -> Vec<CellSummary> {
    let mut ns: Vec<u64> = Vec::new();
    for r in rows {
        if !ns.contains(&r.params.n) {
            ns.push(r.params.n);
        }
    }
    ns.into_iter()
        .map(|n| {
            let cell: Vec<&SeedRow> = rows.iter().filter(|r| r.params.n == n).collect();
            let get = |f: &dyn Fn(&Measurement) -> f64| -> Vec<f64> {
                cell.iter().map(|r| f(&r.measurement)).collect()
            };
            CellSummary {
                n,
                residual: mean_se(&get(&|m| m.residual)),
                abs_residual: mean_se(&get(&|m| m.residual.abs())),
                normalized: mean_se(&get(&|m| m.normalized_residual)),
                target: cell[0].measurement.target,
            }
        })
        .collect()
}

/// Runs `experiment` for every `n` in `ns` and every seed; `base.n` is
/// replaced by each `n` and `v0` is rescaled into a profile per `n`.
pub fn run_sweep(
    experiment: &Experiment,
    base: &ScalingParams,
    v0: &PiecewiseLinearFn,
    ns: &[u64],
    seeds: &[u64],
    opts: &HarnessOptions,
) -> Result<ExperimentResult> {
    if ns.is_empty() || seeds.is_empty() {
        return Err(Error::Config("sweep needs at least one n and one seed".into()));
    }
    let mut rows = Vec::with_capacity(ns.len() * seeds.len());
    let mut notes = vec![format!("surrogate: {SURROGATE_NOTE}")];
    for &n in ns {
        let p = experiment.effective(&ScalingParams { n, ..*base });
        p.validate()?;
        let profile = PerturbationProfile::new(p.q, p.beta, n, v0.clone())?;
        let cell: Vec<Measurement> = seeds
            .par_iter()
            .map(|&s| experiment.measure(&p, &profile, s, opts))
            .collect::<Result<_>>()?;
        rows.extend(seeds.iter().zip(cell).map(|(&seed, measurement)| SeedRow {
            params: p,
            seed,
            measurement,
        }));
    }
    if let Experiment::Thm2(_) = experiment {
        if !(base.beta > 0.0 && base.beta < 0.5) {
            notes.push(format!("beta = {} outside (0, 1/2)", base.beta));
        }
    }
    let summaries = summarize(&rows);
    let pairs: Vec<(f64, f64)> = summaries
        .iter()
        .map(|s| (s.n as f64, s.abs_residual.mean))
        .collect();
    let fitted_exponent = fit_error_exponent(&pairs).ok();
    let reference_exponent = match experiment {
        Experiment::Thm1 | Experiment::Thm3 => Some(error_exponent(base.nu, base.beta)),
        _ => None,
    };
    Ok(ExperimentResult {
        experiment: experiment.name().to_string(),
        rows,
        summaries,
        fitted_exponent,
        reference_exponent,
        notes,
    })
}

/// Version line heading every CSV.
pub const CSV_VERSION_LINE: &str = "# hammersley-lab v1";

/// Per-seed CSV.
pub fn write_results_csv<W: Write>(mut w: W, result: &ExperimentResult) -> io::Result<()> {
    writeln!(w, "{CSV_VERSION_LINE}")?;
    writeln!(
        w,
        "experiment,n,nu,beta,q,t,x,y,seed,statistic,target,residual,normalized_residual"
    )?;
    for r in &result.rows {
        let p = &r.params;
        let m = &r.measurement;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            result.experiment,
            p.n,
            f(p.nu),
            f(p.beta),
            f(p.q),
            f(p.t),
            f(p.x),
            f(p.y),
            r.seed,
            f(m.statistic),
            f(m.target),
            f(m.residual),
            f(m.normalized_residual)
        )?;
    }
    Ok(())
}

/// Per-`n` summary CSV with metadata comment lines.
pub fn write_summary_csv<W: Write>(mut w: W, result: &ExperimentResult) -> io::Result<()> {
    writeln!(w, "{CSV_VERSION_LINE}")?;
    writeln!(w, "# experiment: {}", result.experiment)?;
    for note in &result.notes {
        writeln!(w, "# {note}")?;
    }
    if let Some((slope, se)) = result.fitted_exponent {
        writeln!(w, "# fitted_exponent: {} (se {})", f(slope), f(se))?;
    }
    if let Some(e) = result.reference_exponent {
        writeln!(w, "# error_exponent: {}", f(e))?;
    }
    writeln!(
        w,
        "n,seeds,target,mean_residual,se_residual,mean_abs_residual,se_abs_residual,mean_normalized,se_normalized"
    )?;
    for s in &result.summaries {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            s.n,
            s.residual.count,
            f(s.target),
            f(s.residual.mean),
            f(s.residual.se),
            f(s.abs_residual.mean),
            f(s.abs_residual.se),
            f(s.normalized.mean),
            f(s.normalized.se)
        )?;
    }
    Ok(())
}
