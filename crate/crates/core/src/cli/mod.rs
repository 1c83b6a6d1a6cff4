//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration or argument error,
//! 3 a candidate window was exhausted, 4 an internal check failed.

pub mod config;
mod selftest;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::burgers::write_solution_csv;
use crate::error::Error;
use crate::experiments::{
    run_sweep, write_results_csv, write_summary_csv, Experiment, HarnessOptions, Regime, ScalingParams,
};
use crate::fmt_f64;
use crate::hammersley::{trajectory, write_trajectory_csv};
use crate::increasing_seq::{gamma_feasible, lis_in, lln_gamma, Width};
use crate::piecewise::Potential;
use crate::poisson_plane::{PlanarPoint, PointStore, Rectangle};
use crate::sticks::{evolve_sticks_direct, sample_local_equilibrium, sticks_to_particles, write_sticks_csv, PerturbationProfile};

pub use config::{parse_config, render, ConfigError, RunConfig};
pub use selftest::selftest;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HAMMERSLEY_LAB_OUT";

#[derive(Debug, Parser)]
#[command(name = "hammersley-lab", version, about = "Hammersley's process, stick dynamics and Burgers limits")]
pub struct Cli {
    /// First seed (replicas use consecutive seeds); overrides run.seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; overrides run.out and $HAMMERSLEY_LAB_OUT.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Configuration file in `section.key = value` format.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Longest increasing sequence in [0, side]^2, one row per replica.
    Lis,
    /// Inverse width from the corner (0, 0), one row per replica.
    Gamma,
    /// Particle trajectory from local-equilibrium initial sticks.
    Evolve,
    /// Direct stick simulation from local-equilibrium initial sticks.
    Sticks,
    /// Hopf-Lax and entropy solution on a grid.
    Burgers,
    /// Monte-Carlo sweep over params.n and the replica seeds.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
    },
    /// Runs the built-in oracle checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    Thm1,
    Thm2,
    Thm3,
    Thm4,
    Benchmark,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Lis => "lis",
            Command::Gamma => "gamma",
            Command::Evolve => "evolve",
            Command::Sticks => "sticks",
            Command::Burgers => "burgers",
            Command::Experiment { kind } => match kind {
                ExperimentKind::Thm1 => "thm1",
                ExperimentKind::Thm2 => "thm2",
                ExperimentKind::Thm3 => "thm3",
                ExperimentKind::Thm4 => "thm4",
                ExperimentKind::Benchmark => "benchmark",
            },
            Command::Selftest => "selftest",
        }
    }
}

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(String),
    WindowExhausted(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::WindowExhausted(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Config(m) | CliError::WindowExhausted(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::WindowExhausted { .. } => CliError::WindowExhausted(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Reads the config file (if any) and applies command-line overrides.
pub fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        None => RunConfig::default(),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            parse_config(&text).map_err(|errs| {
                let lines: Vec<String> = errs.iter().map(|e| format!("{}: {e}", path.display())).collect();
                CliError::Config(lines.join("\n"))
            })?
        }
    };
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    Ok(cfg)
}

/// `--out`, then `run.out`, then `$HAMMERSLEY_LAB_OUT`, then `.`.
pub fn output_dir(cli: &Cli, cfg: &RunConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.run.out.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn first_profile(cfg: &RunConfig) -> Result<PerturbationProfile, CliError> {
    let p = &cfg.params;
    Ok(PerturbationProfile::new(p.q, p.beta, p.n[0], cfg.v0())?)
}

/// Runs `command`, writing its CSV files into `out`, and returns the
/// one-line summary.
pub fn run(command: &Command, cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    if *command == Command::Selftest {
        return selftest().map_err(CliError::Internal);
    }
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let name = command.name();
    let results = format!("{name}_results.csv");
    match command {
        Command::Lis => {
            let side = cfg.lis.side;
            let mut w = create(out, &results)?;
            writeln!(w, "seed,side,lis")?;
            let mut total = 0.0;
            let seeds = cfg.seeds();
            for &seed in &seeds {
                let store = PointStore::new(seed);
                let l = lis_in(&store, &Rectangle::new(0.0, side, 0.0, side)?);
                total += l as f64;
                writeln!(w, "{seed},{},{l}", fmt_f64(side))?;
            }
            w.flush()?;
            Ok(format!(
                "lis: mean L/side = {:.6} over {} replicas",
                total / side / seeds.len() as f64,
                seeds.len()
            ))
        }
        Command::Gamma => {
            let g = &cfg.gamma;
            let cap = 2.0 * lln_gamma(g.m as f64, g.tau)? + 1.0;
            let mut w = create(out, &results)?;
            writeln!(w, "seed,m,tau,width")?;
            let mut widths = Vec::new();
            for seed in cfg.seeds() {
                let store = PointStore::new(seed);
                let width = gamma_feasible(&store, PlanarPoint::new(0.0, 0.0), g.m as usize, g.tau, cap, 16)?;
                let text = match width {
                    Width::Finite(h) => {
                        widths.push(h);
                        fmt_f64(h)
                    }
                    Width::Infinite => "inf".to_string(),
                };
                writeln!(w, "{seed},{},{},{text}", g.m, fmt_f64(g.tau))?;
            }
            w.flush()?;
            let mean = widths.iter().sum::<f64>() / widths.len().max(1) as f64;
            Ok(format!(
                "gamma: mean width {:.6} (law of large numbers {:.6})",
                mean,
                lln_gamma(g.m as f64, g.tau)?
            ))
        }
        Command::Evolve => {
            let e = &cfg.evolve;
            let profile = first_profile(cfg)?;
            let eta = sample_local_equilibrium(&profile, 1..=(e.particles as i64 - 1), cfg.run.seed)?;
            let z0 = sticks_to_particles(&eta, 0, 0.0)?;
            let times: Vec<f64> = (1..=e.snapshots).map(|j| e.t * j as f64 / e.snapshots as f64).collect();
            let store = PointStore::new(cfg.run.seed);
            let mut snaps = vec![z0.clone()];
            snaps.extend(trajectory(&z0, &store, &times)?);
            let mut w = create(out, &results)?;
            write_trajectory_csv(&mut w, &snaps)?;
            w.flush()?;
            let last = snaps.last().unwrap();
            let moved = z0
                .positions()
                .iter()
                .zip(last.positions())
                .filter(|(a, b)| a != b)
                .count();
            Ok(format!(
                "evolve: {moved} of {} particles moved by t = {}",
                z0.len(),
                fmt_f64(e.t)
            ))
        }
        Command::Sticks => {
            let s = &cfg.sticks;
            let profile = first_profile(cfg)?;
            let eta0 = sample_local_equilibrium(&profile, 1..=s.sites as i64, cfg.run.seed)?;
            let eta = evolve_sticks_direct(&eta0, s.t, cfg.run.seed, s.boundary)?;
            let mut w = create(out, &results)?;
            write_sticks_csv(&mut w, &eta)?;
            w.flush()?;
            Ok(format!(
                "sticks: total mass {:.6} -> {:.6} at t = {}",
                eta0.total_mass(),
                eta.total_mass(),
                fmt_f64(s.t)
            ))
        }
        Command::Burgers => {
            let b = &cfg.burgers;
            let v0 = Potential::antiderivative(&cfg.v0(), 0.0, 0.0)?;
            let xs: Vec<f64> = (0..b.points)
                .map(|j| b.x_min + (b.x_max - b.x_min) * j as f64 / (b.points - 1) as f64)
                .collect();
            let mut w = create(out, &results)?;
            write_solution_csv(&mut w, &v0, &xs, &b.times)?;
            w.flush()?;
            Ok(format!(
                "burgers: {} grid points at {} times",
                xs.len(),
                b.times.len()
            ))
        }
        Command::Experiment { kind } => run_experiment(*kind, cfg, out),
        Command::Selftest => unreachable!(),
    }
}

fn run_experiment(kind: ExperimentKind, cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let p = &cfg.params;
    let base = ScalingParams {
        n: p.n[0],
        nu: p.nu,
        beta: p.beta,
        q: p.q,
        t: p.t,
        x: p.x,
        y: p.y,
    };
    let experiment = match kind {
        ExperimentKind::Thm1 => Experiment::Thm1,
        ExperimentKind::Thm2 => Experiment::Thm2(cfg.phi()),
        ExperimentKind::Thm3 => Experiment::Thm3,
        ExperimentKind::Thm4 => Experiment::Thm4(Regime::from_case(cfg.experiment.case)?),
        ExperimentKind::Benchmark => Experiment::Benchmark {
            shift: cfg.experiment.shift,
        },
    };
    let opts = HarnessOptions {
        delta: cfg.window.delta,
        window_multiplier: cfg.window.multiplier,
        max_widenings: cfg.window.max_widenings,
    };
    let result = run_sweep(&experiment, &base, &cfg.v0(), &p.n, &cfg.seeds(), &opts)?;
    let name = experiment.name();
    let mut w = create(out, &format!("{name}_results.csv"))?;
    write_results_csv(&mut w, &result)?;
    w.flush()?;
    let mut w = create(out, &format!("{name}_summary.csv"))?;
    write_summary_csv(&mut w, &result)?;
    w.flush()?;

    let last = result.summaries.last().expect("non-empty sweep");
    let mut line = format!(
        "{name}: n = {} mean residual {:.6} (se {:.6}), mean |residual| {:.6}, target {:.6}",
        last.n, last.residual.mean, last.residual.se, last.abs_residual.mean, last.target
    );
    if let Some((slope, se)) = result.fitted_exponent {
        line.push_str(&format!(", fitted exponent {slope:.4} (se {se:.4})"));
    }
    Ok(line)
}

/// Entry point used by the binary.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    let outcome = load_config(&cli).and_then(|cfg| {
        let out = output_dir(&cli, &cfg);
        run(&cli.command, &cfg, &out)
    });
    match outcome {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
