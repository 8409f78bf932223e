//! `cavity`: sweeps and single-point runs of the driven cavity with gain and
//! two-photon loss.
//!
//! Units: all rates (delta, kappa, gain, eta) and the drive share one
//! frequency unit; times are in its inverse. `eps_scaled` is `|ε|·√η`.

mod config;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use cavity_core::classical;
use cavity_core::husimi::GridSpec;
use cavity_core::io as csv;
use cavity_core::{build_superoperator, spectra, C64};
use clap::{Args, Parser, Subcommand};

use config::{Config, RawConfig};
use run::RunOptions;

#[derive(Parser)]
#[command(name = "cavity", version, about = "Liouvillian spectra, dynamics and mean-field analysis of a driven nonlinear cavity")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Flags mirroring the config keys. Sweep keys accept `a,b,c` lists and
/// inclusive `start:stop:step` ranges.
#[derive(Args, Debug, Default)]
struct Keys {
    /// Read keys from a `key=value` or JSON file; flags override it.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Detuning Δ [rate units].
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Single-photon loss κ [rate units, >= 0].
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<String>,
    /// Linear gain g [rate units, >= 0].
    #[arg(long, allow_hyphen_values = true)]
    gain: Option<String>,
    /// Two-photon loss η [rate units, >= 0]; list or range.
    #[arg(long)]
    eta: Option<String>,
    /// Raw real drive ε [rate units]; list or range. Excludes --eps-scaled.
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    /// Rescaled drive ε√η [rate units]; list or range.
    #[arg(long)]
    eps_scaled: Option<String>,
    /// Fock truncation; `auto` uses ceil(3·n̄ + 20).
    #[arg(long)]
    dim: Option<String>,
    /// Final time [1/rate units].
    #[arg(long)]
    t_end: Option<String>,
    /// Relative integrator tolerance.
    #[arg(long)]
    rtol: Option<String>,
    /// Absolute integrator tolerance.
    #[arg(long)]
    atol: Option<String>,
    /// Seed of the Monte Carlo streams.
    #[arg(long)]
    seed: Option<String>,
    /// Monte Carlo trajectories.
    #[arg(long)]
    n_traj: Option<String>,
    /// Points per phase-space axis.
    #[arg(long)]
    grid_n: Option<String>,
    /// Phase-space half-width [√photons]; `auto` scales with ⟨n⟩.
    #[arg(long)]
    grid_radius: Option<String>,
    /// Worker threads over parameter points; 0 = all cores.
    #[arg(long)]
    workers: Option<String>,
    /// Comma list of gaps, steady, evolve, classical.
    #[arg(long)]
    tasks: Option<String>,
}

impl Keys {
    fn resolve(&self, forced_tasks: Option<&str>) -> anyhow::Result<(Config, bool)> {
        let mut raw = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                if text.trim_start().starts_with('{') {
                    RawConfig::parse_json(&text)?
                } else {
                    RawConfig::parse_kv(&text)?
                }
            }
            None => RawConfig::default(),
        };
        let flags = [
            ("delta", &self.delta),
            ("kappa", &self.kappa),
            ("gain", &self.gain),
            ("eta", &self.eta),
            ("eps", &self.eps),
            ("eps_scaled", &self.eps_scaled),
            ("dim", &self.dim),
            ("t_end", &self.t_end),
            ("rtol", &self.rtol),
            ("atol", &self.atol),
            ("seed", &self.seed),
            ("n_traj", &self.n_traj),
            ("grid_n", &self.grid_n),
            ("grid_radius", &self.grid_radius),
            ("workers", &self.workers),
            ("tasks", &self.tasks),
        ];
        let grid_n_given = self.grid_n.is_some() || raw.contains("grid_n");
        for (k, v) in flags {
            if let Some(v) = v {
                raw.overlay(k, v.as_str())?;
            }
        }
        if let Some(t) = forced_tasks {
            raw.overlay("tasks", t)?;
        }
        Ok((raw.resolve()?, grid_n_given))
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a config file: every task at every (eta, drive) point.
    Run {
        /// `key=value` or JSON config.
        path: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Liouvillian spectrum and gaps of one point.
    Spectrum {
        #[command(flatten)]
        keys: Keys,
        /// Rightmost eigenvalues to compute; 0 picks the dense solver when the
        /// truncation allows.
        #[arg(long, default_value_t = 0)]
        k: usize,
    },
    /// Dissipative gaps over an (eta, eps_scaled) grid.
    GapsSweep {
        #[command(flatten)]
        keys: Keys,
    },
    /// Master-equation evolution from the vacuum.
    Evolve {
        #[command(flatten)]
        keys: Keys,
        /// Times at which to write the Q function; comma list.
        #[arg(long, value_delimiter = ',')]
        snapshots: Vec<f64>,
    },
    /// Steady-state observables over an (eta, eps_scaled) grid.
    SteadySweep {
        #[command(flatten)]
        keys: Keys,
        /// Also write every steady-state Q grid.
        #[arg(long)]
        husimi: bool,
    },
    /// Mean-field limit cycle (or stable fixed point) of one point.
    ClassicalCycle {
        #[command(flatten)]
        keys: Keys,
    },
    /// Monte Carlo mean-field ensemble from vacuum noise, sampled at t_end.
    Mc {
        #[command(flatten)]
        keys: Keys,
        /// Sample the initial noise with the Wigner width 1/2 instead of the
        /// Husimi width 1/√2.
        #[arg(long)]
        wigner: bool,
    },
    /// Phase at t_end versus initial condition, on a grid centred on the
    /// fixed point.
    PhaseMap {
        #[command(flatten)]
        keys: Keys,
    },
    /// Mean-field Hopf threshold in eps_scaled.
    Hopf {
        #[command(flatten)]
        keys: Keys,
    },
}

/// Default phase-map resolution; the config default of 201 would mean 40k
/// trajectories.
const PHASE_MAP_GRID_N: usize = 41;

fn write(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn single(keys: &Keys) -> anyhow::Result<(Config, cavity_core::SystemParams, bool)> {
    let (cfg, grid_given) = keys.resolve(None)?;
    let p = run::point_params(&cfg, &run::single_point(&cfg)?)?;
    println!("{}", run::describe(&p));
    Ok((cfg, p, grid_given))
}

fn sweep(cfg: &Config, opts: &RunOptions, out: &Path) -> anyhow::Result<ExitCode> {
    for pt in cfg.points() {
        match run::point_params(cfg, &pt) {
            Ok(p) => println!("{}", run::describe(&p)),
            Err(e) => println!("point eta={} eps_scaled={}: {e:#}", pt.eta, pt.eps_scaled),
        }
    }
    let s = run::run_sweep(cfg, opts, out)?;
    println!("{} points, {} failed tasks, {} files in {}", s.points, s.failed_tasks, s.files.len(), out.display());
    Ok(if s.failed_tasks == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main_inner(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.cmd {
        Cmd::Run { path, out } => {
            let cfg = Config::load(&path)?;
            sweep(&cfg, &RunOptions::default(), &out)
        }
        Cmd::GapsSweep { keys } => {
            let (cfg, _) = keys.resolve(Some("gaps"))?;
            sweep(&cfg, &RunOptions::default(), &keys.out)
        }
        Cmd::SteadySweep { keys, husimi } => {
            let (cfg, _) = keys.resolve(Some("steady"))?;
            sweep(&cfg, &RunOptions { steady_husimi: husimi, ..Default::default() }, &keys.out)
        }
        Cmd::Evolve { keys, snapshots } => {
            let (cfg, _) = keys.resolve(Some("evolve"))?;
            run::single_point(&cfg)?;
            sweep(&cfg, &RunOptions { snapshots, ..Default::default() }, &keys.out)
        }
        Cmd::Spectrum { keys, k } => {
            let (_, p, _) = single(&keys)?;
            let l = build_superoperator(&p)?;
            let spec = if k == 0 { spectra::spectrum_auto(&l, run::SWEEP_EIGS)? } else { spectra::rightmost_eigenvalues(&l, k)? };
            let mut buf = Vec::new();
            csv::write_spectrum(&mut buf, &spec)?;
            write(&keys.out.join("spectrum.csv"), &buf)?;
            let mut buf = format!("{}\n", csv::GAPS_HEADER).into_bytes();
            csv::write_gaps_row(&mut buf, p.eta, p.eps_scaled().unwrap_or(0.0), &spec)?;
            print!("{}", String::from_utf8_lossy(&buf));
            write(&keys.out.join("gaps.csv"), &buf)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::ClassicalCycle { keys } => {
            let (cfg, p, _) = single(&keys)?;
            let fixed = classical::fixed_point(&p)?;
            if fixed.stable {
                println!("stable fixed point alpha={}{:+}i, |alpha|^2={}", fixed.alpha.re, fixed.alpha.im, fixed.alpha.norm_sqr());
            } else {
                let cycle = classical::limit_cycle(&p)?;
                println!("limit cycle: period={} freq={} floquet_multiplier={}", cycle.period, cycle.freq, cycle.floquet_multiplier);
                let mut buf = Vec::new();
                csv::write_cycle(&mut buf, &cycle)?;
                write(&keys.out.join("cycle.csv"), &buf)?;
            }
            let steps = (cfg.t_end / run::EVOLVE_DT).round().max(1.0) as usize;
            let traj = classical::integrate(C64::new(0.0, 0.0), &p, &cavity_core::dynamics::uniform_grid(cfg.t_end, steps))?;
            let mut buf = Vec::new();
            csv::write_trajectory(&mut buf, &traj)?;
            write(&keys.out.join("trajectory.csv"), &buf)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Mc { keys, wigner } => {
            let (cfg, p, _) = single(&keys)?;
            let sampling = if wigner { classical::VacuumSampling::Wigner } else { classical::VacuumSampling::Husimi };
            let opts = classical::McOptions { sampling, ode: cavity_core::ode::OdeOptions { rtol: cfg.rtol, atol: cfg.atol, ..Default::default() }, parallel: true };
            let ens = classical::mc_ensemble_with(&p, cfg.n_traj, cfg.seed, cfg.t_end, opts)?;
            let mut buf = Vec::new();
            csv::write_ensemble(&mut buf, &ens)?;
            write(&keys.out.join("ensemble.csv"), &buf)?;
            let grid = classical::classical_husimi(&ens, &GridSpec { n: cfg.grid_n, radius: cfg.grid_radius, center: C64::new(0.0, 0.0) });
            let mut buf = Vec::new();
            csv::write_husimi(&mut buf, &grid)?;
            write(&keys.out.join("husimi_mc.csv"), &buf)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::PhaseMap { keys } => {
            let (cfg, p, grid_given) = single(&keys)?;
            let n = if grid_given { cfg.grid_n } else { PHASE_MAP_GRID_N };
            let center = classical::fixed_point(&p)?.alpha;
            let half = match cfg.grid_radius {
                Some(r) => r,
                None => 1.25 * classical::limit_cycle(&p)?.radius,
            };
            let axis = |c: f64| (0..n).map(|i| c - half + 2.0 * half * i as f64 / (n - 1) as f64).collect::<Vec<_>>();
            let map = classical::phase_map(&p, &axis(center.re), &axis(center.im), cfg.t_end)?;
            let mut buf = Vec::new();
            csv::write_phase_map(&mut buf, &map)?;
            write(&keys.out.join("phase_map.csv"), &buf)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Hopf { keys } => {
            let (cfg, _) = keys.resolve(None)?;
            let pt = run::single_point(&cfg).unwrap_or(cfg.points()[0]);
            let mut p = cavity_core::SystemParams::new(cfg.delta, cfg.kappa, cfg.gain, pt.eta, C64::new(pt.eps, 0.0), cfg.dim.unwrap_or(2))?;
            if cfg.dim.is_none() {
                p.dim = cavity_core::fock::default_dim(&p).unwrap_or(2);
            }
            println!("{}", run::describe(&p));
            let th = classical::hopf_threshold(&p)?;
            println!("hopf threshold eps_scaled = {th:.4}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

