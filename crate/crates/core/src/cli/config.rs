//! Run configuration in a line-based `section.key = value` format.
//!
//! ```text
//! # comments start with '#'
//! run.seed = 7
//! run.replicas = 50
//! params.n = 50, 100, 200, 400
//! params.beta = 0.25
//! profile.v0 = tent(2, 0, 1)
//! ```
//!
//! Every key is optional and falls back to the default shown by
//! [`RunConfig::default`]. Floats are rendered in the shortest form that
//! parses back to the same value, so `parse_config(&render(&c)) == c`.
//!
//! Function shapes: `zero`, `const(c)`, `tent(height, center, half_width)`,
//! `step(left, right, at)` and `table(x1:v1, x2:v2, ...)` (continuous,
//! constant beyond the first and last breakpoints).

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use crate::experiments::TestFunction;
use crate::fmt_f64;
use crate::piecewise::PiecewiseLinearFn;
use crate::sticks::RightBoundary;

/// A piecewise-linear function as written in a config file.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Zero,
    Const(f64),
    Tent { height: f64, center: f64, half_width: f64 },
    Step { left: f64, right: f64, at: f64 },
    Table(Vec<(f64, f64)>),
}

impl Shape {
    pub fn to_function(&self) -> Result<PiecewiseLinearFn, String> {
        match self {
            Shape::Zero => Ok(PiecewiseLinearFn::zero()),
            Shape::Const(c) => Ok(PiecewiseLinearFn::constant(*c)),
            Shape::Tent {
                height,
                center,
                half_width,
            } => PiecewiseLinearFn::tent(*height, *center, *half_width).map_err(|e| e.to_string()),
            Shape::Step { left, right, at } => Ok(PiecewiseLinearFn::step(*left, *right, *at)),
            Shape::Table(rows) => PiecewiseLinearFn::continuous(
                rows.iter().map(|r| r.0).collect(),
                rows.iter().map(|r| r.1).collect(),
                0.0,
                0.0,
            )
            .map_err(|e| e.to_string()),
        }
    }

    fn parse(text: &str) -> Result<Self, String> {
        let text = text.trim();
        if text == "zero" {
            return Ok(Shape::Zero);
        }
        let open = text
            .find('(')
            .filter(|_| text.ends_with(')'))
            .ok_or_else(|| format!("expected a shape like tent(h, c, w), got '{text}'"))?;
        let name = text[..open].trim();
        let inner = &text[open + 1..text.len() - 1];
        if name == "table" {
            let rows = inner
                .split(',')
                .map(|pair| {
                    let (k, v) = pair
                        .split_once(':')
                        .ok_or_else(|| format!("table entry '{}' is not x:value", pair.trim()))?;
                    Ok((parse_f64(k)?, parse_f64(v)?))
                })
                .collect::<Result<Vec<_>, String>>()?;
            return Ok(Shape::Table(rows));
        }
        let args = inner
            .split(',')
            .map(parse_f64)
            .collect::<Result<Vec<_>, _>>()?;
        match (name, args.as_slice()) {
            ("const", &[c]) => Ok(Shape::Const(c)),
            ("tent", &[height, center, half_width]) => Ok(Shape::Tent {
                height,
                center,
                half_width,
            }),
            ("step", &[left, right, at]) => Ok(Shape::Step { left, right, at }),
            ("const" | "tent" | "step", _) => {
                Err(format!("wrong number of arguments to {name}: {}", args.len()))
            }
            _ => Err(format!("unknown shape '{name}'")),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Zero => write!(f, "zero"),
            Shape::Const(c) => write!(f, "const({})", fmt_f64(*c)),
            Shape::Tent {
                height,
                center,
                half_width,
            } => write!(
                f,
                "tent({}, {}, {})",
                fmt_f64(*height),
                fmt_f64(*center),
                fmt_f64(*half_width)
            ),
            Shape::Step { left, right, at } => write!(
                f,
                "step({}, {}, {})",
                fmt_f64(*left),
                fmt_f64(*right),
                fmt_f64(*at)
            ),
            Shape::Table(rows) => {
                let body: Vec<String> = rows
                    .iter()
                    .map(|(k, v)| format!("{}:{}", fmt_f64(*k), fmt_f64(*v)))
                    .collect();
                write!(f, "table({})", body.join(", "))
            }
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let s = s.trim();
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("expected a finite number, got '{s}'")),
    }
}

fn parse_u64(s: &str) -> Result<u64, String> {
    let s = s.trim();
    s.parse::<u64>()
        .map_err(|_| format!("expected a nonnegative integer, got '{s}'"))
}

fn parse_i64(s: &str) -> Result<i64, String> {
    let s = s.trim();
    s.parse::<i64>().map_err(|_| format!("expected an integer, got '{s}'"))
}

fn parse_list<T>(s: &str, item: fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let out = s.split(',').map(item).collect::<Result<Vec<_>, _>>()?;
    if out.is_empty() {
        return Err("expected at least one value".into());
    }
    Ok(out)
}

fn join<T>(xs: &[T], f: impl Fn(&T) -> String) -> String {
    xs.iter().map(f).collect::<Vec<_>>().join(", ")
}

/// Seeds, replica count and output location.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    /// First seed; replicas use `seed, seed + 1, ...`.
    pub seed: u64,
    pub replicas: u64,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamsSection {
    /// Sweep of scale parameters; single-scale commands use the first entry.
    pub n: Vec<u64>,
    pub nu: f64,
    pub beta: f64,
    pub q: f64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSection {
    pub multiplier: f64,
    pub max_widenings: u32,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSection {
    pub phi: Shape,
    pub case: u8,
    pub shift: Option<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BurgersSection {
    pub x_min: f64,
    pub x_max: f64,
    pub points: u64,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LisSection {
    pub side: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaSection {
    pub m: u64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveSection {
    pub particles: u64,
    pub t: f64,
    pub snapshots: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SticksSection {
    pub sites: u64,
    pub t: f64,
    pub boundary: RightBoundary,
}

/// Validated configuration for every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub run: RunSection,
    pub params: ParamsSection,
    pub profile_v0: Shape,
    pub window: WindowSection,
    pub experiment: ExperimentSection,
    pub burgers: BurgersSection,
    pub lis: LisSection,
    pub gamma: GammaSection,
    pub evolve: EvolveSection,
    pub sticks: SticksSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            run: RunSection {
                seed: 0,
                replicas: 50,
                out: None,
            },
            params: ParamsSection {
                n: vec![50, 100, 200, 400],
                nu: 1.0,
                beta: 0.25,
                q: 1.0,
                t: 0.5,
                x: 0.0,
                y: 1.0,
            },
            profile_v0: Shape::Zero,
            window: WindowSection {
                multiplier: 4.0,
                max_widenings: 4,
                delta: 0.05,
            },
            experiment: ExperimentSection {
                phi: Shape::Tent {
                    height: 1.0,
                    center: 0.0,
                    half_width: 1.0,
                },
                case: 2,
                shift: None,
            },
            burgers: BurgersSection {
                x_min: -2.0,
                x_max: 2.0,
                points: 41,
                times: vec![0.5, 1.0],
            },
            lis: LisSection { side: 100.0 },
            gamma: GammaSection { m: 50, tau: 50.0 },
            evolve: EvolveSection {
                particles: 200,
                t: 5.0,
                snapshots: 5,
            },
            sticks: SticksSection {
                sites: 100,
                t: 5.0,
                boundary: RightBoundary::OpenRight,
            },
        }
    }
}

impl RunConfig {
    /// Seeds `seed .. seed + replicas`.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.run.replicas).map(|i| self.run.seed + i).collect()
    }

    pub fn v0(&self) -> PiecewiseLinearFn {
        self.profile_v0.to_function().expect("validated at parse time")
    }

    pub fn phi(&self) -> TestFunction {
        TestFunction::new(self.experiment.phi.to_function().expect("validated at parse time"))
            .expect("validated at parse time")
    }

    /// Cross-field checks; every violated constraint is reported.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let p = &self.params;
        if p.n.contains(&0) {
            errs.push("params.n: every n must be >= 1".into());
        }
        if !(p.nu >= 1.0) {
            errs.push(format!("params.nu: need nu >= 1, got {}", p.nu));
        }
        if !(p.beta > 0.0) {
            errs.push(format!("params.beta: need beta > 0, got {}", p.beta));
        }
        if !(p.q > 0.0) {
            errs.push(format!("params.q: need q > 0, got {}", p.q));
        }
        if !(p.t >= 0.0) {
            errs.push(format!("params.t: need t >= 0, got {}", p.t));
        }
        if self.run.replicas == 0 {
            errs.push("run.replicas: need at least one replica".into());
        }
        match self.profile_v0.to_function() {
            Err(e) => errs.push(format!("profile.v0: {e}")),
            Ok(v0) => {
                if v0.tail_values().is_none() {
                    errs.push("profile.v0: must be constant in both tails".into());
                } else if p.beta > 0.0 && p.q > 0.0 {
                    let sup = v0.sup_abs();
                    for &n in p.n.iter().filter(|&&n| n > 0) {
                        let bound = (n as f64).powf(-p.beta) * sup;
                        if !(p.q > bound) {
                            errs.push(format!(
                                "profile.v0: positivity needs q > n^-beta sup|v0|; at n = {n} that is {} >= q = {}",
                                bound, p.q
                            ));
                        }
                    }
                }
            }
        }
        match self.experiment.phi.to_function() {
            Err(e) => errs.push(format!("experiment.phi: {e}")),
            Ok(phi) => {
                if TestFunction::new(phi).is_err() {
                    errs.push("experiment.phi: must be continuous with compact support".into());
                }
            }
        }
        if !(1..=3).contains(&self.experiment.case) {
            errs.push(format!(
                "experiment.case: must be 1, 2 or 3, got {}",
                self.experiment.case
            ));
        }
        let w = &self.window;
        if !(w.multiplier > 0.0) {
            errs.push(format!("window.multiplier: need > 0, got {}", w.multiplier));
        }
        if !(w.delta > 0.0) {
            errs.push(format!("window.delta: need > 0, got {}", w.delta));
        }
        let b = &self.burgers;
        if !(b.x_min < b.x_max) {
            errs.push("burgers.x_min must be below burgers.x_max".into());
        }
        if b.points < 2 {
            errs.push("burgers.points: need at least 2 grid points".into());
        }
        if b.times.iter().any(|&t| t < 0.0) {
            errs.push("burgers.times: times must be >= 0".into());
        }
        if !(self.lis.side > 0.0) {
            errs.push(format!("lis.side: need > 0, got {}", self.lis.side));
        }
        if !(self.gamma.tau > 0.0) {
            errs.push(format!("gamma.tau: need > 0, got {}", self.gamma.tau));
        }
        if self.evolve.particles < 2 {
            errs.push("evolve.particles: need at least 2 particles".into());
        }
        if !(self.evolve.t >= 0.0) {
            errs.push("evolve.t: need t >= 0".into());
        }
        if self.evolve.snapshots == 0 {
            errs.push("evolve.snapshots: need at least one snapshot".into());
        }
        if self.sticks.sites == 0 {
            errs.push("sticks.sites: need at least one site".into());
        }
        if !(self.sticks.t >= 0.0) {
            errs.push("sticks.t: need t >= 0".into());
        }
        errs
    }
}

/// One problem found while reading a config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line, when the problem belongs to one line.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

type Setter = fn(&mut RunConfig, &str) -> Result<(), String>;

fn assign<T, E: Into<String>>(slot: &mut T, value: Result<T, E>) -> Result<(), String> {
    *slot = value.map_err(Into::into)?;
    Ok(())
}

fn setters() -> Vec<(&'static str, Setter)> {
    vec![
        ("run.seed", |c, v| assign(&mut c.run.seed, parse_u64(v))),
        ("run.replicas", |c, v| assign(&mut c.run.replicas, parse_u64(v))),
        ("run.out", |c, v| {
            let v = v.trim();
            if v.is_empty() {
                return Err("empty path".into());
            }
            c.run.out = Some(PathBuf::from(v));
            Ok(())
        }),
        ("params.n", |c, v| assign(&mut c.params.n, parse_list(v, parse_u64))),
        ("params.nu", |c, v| assign(&mut c.params.nu, parse_f64(v))),
        ("params.beta", |c, v| assign(&mut c.params.beta, parse_f64(v))),
        ("params.q", |c, v| assign(&mut c.params.q, parse_f64(v))),
        ("params.t", |c, v| assign(&mut c.params.t, parse_f64(v))),
        ("params.x", |c, v| assign(&mut c.params.x, parse_f64(v))),
        ("params.y", |c, v| assign(&mut c.params.y, parse_f64(v))),
        ("profile.v0", |c, v| assign(&mut c.profile_v0, Shape::parse(v))),
        ("window.multiplier", |c, v| assign(&mut c.window.multiplier, parse_f64(v))),
        ("window.max_widenings", |c, v| {
            let w = parse_u64(v)?;
            c.window.max_widenings = u32::try_from(w)
                .ok()
                .filter(|&w| w <= 32)
                .ok_or_else(|| format!("at most 32 widenings, got {w}"))?;
            Ok(())
        }),
        ("window.delta", |c, v| assign(&mut c.window.delta, parse_f64(v))),
        ("experiment.phi", |c, v| assign(&mut c.experiment.phi, Shape::parse(v))),
        ("experiment.case", |c, v| {
            let k = parse_u64(v)?;
            c.experiment.case = u8::try_from(k).map_err(|_| format!("case out of range: {k}"))?;
            Ok(())
        }),
        ("experiment.shift", |c, v| {
            c.experiment.shift = match v.trim() {
                "auto" => None,
                s => Some(parse_i64(s)?),
            };
            Ok(())
        }),
        ("burgers.x_min", |c, v| assign(&mut c.burgers.x_min, parse_f64(v))),
        ("burgers.x_max", |c, v| assign(&mut c.burgers.x_max, parse_f64(v))),
        ("burgers.points", |c, v| assign(&mut c.burgers.points, parse_u64(v))),
        ("burgers.times", |c, v| assign(&mut c.burgers.times, parse_list(v, parse_f64))),
        ("lis.side", |c, v| assign(&mut c.lis.side, parse_f64(v))),
        ("gamma.m", |c, v| assign(&mut c.gamma.m, parse_u64(v))),
        ("gamma.tau", |c, v| assign(&mut c.gamma.tau, parse_f64(v))),
        ("evolve.particles", |c, v| assign(&mut c.evolve.particles, parse_u64(v))),
        ("evolve.t", |c, v| assign(&mut c.evolve.t, parse_f64(v))),
        ("evolve.snapshots", |c, v| assign(&mut c.evolve.snapshots, parse_u64(v))),
        ("sticks.sites", |c, v| assign(&mut c.sticks.sites, parse_u64(v))),
        ("sticks.t", |c, v| assign(&mut c.sticks.t, parse_f64(v))),
        ("sticks.boundary", |c, v| {
            c.sticks.boundary = match v.trim() {
                "open" => RightBoundary::OpenRight,
                "closed" => RightBoundary::ClosedRight,
                other => return Err(format!("boundary must be open or closed, got '{other}'")),
            };
            Ok(())
        }),
    ]
}

/// Parses and validates a config, reporting every problem found.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<ConfigError>> {
    let table: HashMap<&str, Setter> = setters().into_iter().collect();
    let mut cfg = RunConfig::default();
    let mut errors = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(ConfigError {
                line: Some(line),
                message: format!("expected 'section.key = value', got '{content}'"),
            });
            continue;
        };
        let key = key.trim();
        if let Some(&first) = seen.get(key) {
            errors.push(ConfigError {
                line: Some(line),
                message: format!("duplicate key '{key}' (lines {first} and {line})"),
            });
            continue;
        }
        seen.insert(key.to_string(), line);
        match table.get(key) {
            None => errors.push(ConfigError {
                line: Some(line),
                message: format!("unknown key '{key}'"),
            }),
            Some(set) => {
                if let Err(e) = set(&mut cfg, value) {
                    errors.push(ConfigError {
                        line: Some(line),
                        message: format!("{key}: {e}"),
                    });
                }
            }
        }
    }
    if errors.is_empty() {
        errors.extend(cfg.validate().into_iter().map(|message| ConfigError {
            line: None,
            message,
        }));
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(errors)
    }
}

/// Writes every key of `cfg`.
pub fn render(cfg: &RunConfig) -> String {
    let f = |v: &f64| fmt_f64(*v);
    let mut lines = vec![
        format!("run.seed = {}", cfg.run.seed),
        format!("run.replicas = {}", cfg.run.replicas),
    ];
    if let Some(out) = &cfg.run.out {
        lines.push(format!("run.out = {}", out.display()));
    }
    let p = &cfg.params;
    lines.extend([
        format!("params.n = {}", join(&p.n, |n| n.to_string())),
        format!("params.nu = {}", f(&p.nu)),
        format!("params.beta = {}", f(&p.beta)),
        format!("params.q = {}", f(&p.q)),
        format!("params.t = {}", f(&p.t)),
        format!("params.x = {}", f(&p.x)),
        format!("params.y = {}", f(&p.y)),
        format!("profile.v0 = {}", cfg.profile_v0),
        format!("window.multiplier = {}", f(&cfg.window.multiplier)),
        format!("window.max_widenings = {}", cfg.window.max_widenings),
        format!("window.delta = {}", f(&cfg.window.delta)),
        format!("experiment.phi = {}", cfg.experiment.phi),
        format!("experiment.case = {}", cfg.experiment.case),
        format!(
            "experiment.shift = {}",
            cfg.experiment
                .shift
                .map_or("auto".to_string(), |s| s.to_string())
        ),
        format!("burgers.x_min = {}", f(&cfg.burgers.x_min)),
        format!("burgers.x_max = {}", f(&cfg.burgers.x_max)),
        format!("burgers.points = {}", cfg.burgers.points),
        format!("burgers.times = {}", join(&cfg.burgers.times, f)),
        format!("lis.side = {}", f(&cfg.lis.side)),
        format!("gamma.m = {}", cfg.gamma.m),
        format!("gamma.tau = {}", f(&cfg.gamma.tau)),
        format!("evolve.particles = {}", cfg.evolve.particles),
        format!("evolve.t = {}", f(&cfg.evolve.t)),
        format!("evolve.snapshots = {}", cfg.evolve.snapshots),
        format!("sticks.sites = {}", cfg.sticks.sites),
        format!("sticks.t = {}", f(&cfg.sticks.t)),
        format!(
            "sticks.boundary = {}",
            match cfg.sticks.boundary {
                RightBoundary::OpenRight => "open",
                RightBoundary::ClosedRight => "closed",
            }
        ),
    ]);
    let mut text = lines.join("\n");
    text.push('\n');
    text
}
