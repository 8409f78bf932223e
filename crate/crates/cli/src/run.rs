//! Per-point task execution and the deterministic sweep driver.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use cavity_core::classical::{self, ClassicalError};
use cavity_core::dynamics::{self, EvolveOptions};
use cavity_core::husimi::{self, GridSpec};
use cavity_core::io as csv;
use cavity_core::spectra;
use cavity_core::{build_superoperator, fock, SystemParams, C64};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Config, Point, Task};

/// Bumped whenever a CSV header or the manifest layout changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const CLASSICAL_HEADER: &str = "eta,eps_scaled,regime,n_mean,period,freq,floquet_multiplier,fixed_re,fixed_im";

/// Rightmost eigenvalues requested when the dense path is too large.
pub const SWEEP_EIGS: usize = 12;
/// Output spacing of the evolve task.
pub const EVOLVE_DT: f64 = 0.02;
/// Grid used to track the Q maximum along a trajectory (refined per point).
pub const EVOLVE_Q_GRID_N: usize = 41;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Write the full steady-state Q grid of every point.
    pub steady_husimi: bool,
    /// Times at which the evolve task writes a Q grid.
    pub snapshots: Vec<f64>,
}

/// Resolved physical parameters of one point.
pub fn point_params(cfg: &Config, pt: &Point) -> anyhow::Result<SystemParams> {
    let mut p = SystemParams::new(cfg.delta, cfg.kappa, cfg.gain, pt.eta, C64::new(pt.eps, 0.0), 2)?;
    p.dim = match cfg.dim {
        Some(d) => d,
        None => fock::default_dim(&p).context("no finite occupation scale (eta = 0 with net gain); set `dim`")?,
    };
    Ok(p)
}

pub fn describe(p: &SystemParams) -> String {
    let scaled = p.eps_scaled().map_or("n/a".to_string(), |s| format!("{s}"));
    format!(
        "resolved SystemParams: delta={} kappa={} gain={} eta={} eps={}{:+}i (eps_scaled={}) dim={}",
        p.delta, p.kappa, p.gain, p.eta, p.eps.re, p.eps.im, scaled, p.dim
    )
}

fn grid_spec(cfg: &Config, n: usize) -> GridSpec {
    GridSpec { n, radius: cfg.grid_radius, center: C64::new(0.0, 0.0) }
}

/// Everything one point contributes to the output directory.
#[derive(Debug, Default)]
struct PointArtifacts {
    rows: BTreeMap<&'static str, String>,
    files: Vec<(PathBuf, Vec<u8>)>,
}

#[derive(Debug, Serialize)]
struct TaskStatus {
    task: Task,
    ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    wall_time_s: f64,
}

#[derive(Debug, Serialize)]
struct PointRecord {
    index: usize,
    eta: f64,
    eps: f64,
    eps_scaled: f64,
    dim: Option<usize>,
    tasks: Vec<TaskStatus>,
}

fn tag(index: usize, pt: &Point) -> String {
    format!("p{index:04}_eta{}_es{}", pt.eta, pt.eps_scaled)
}

fn task_gaps(p: &SystemParams, pt: &Point, name: &str, art: &mut PointArtifacts) -> anyhow::Result<()> {
    let l = build_superoperator(p)?;
    let spec = spectra::spectrum_auto(&l, SWEEP_EIGS)?;
    let mut row = Vec::new();
    csv::write_gaps_row(&mut row, pt.eta, pt.eps_scaled, &spec)?;
    art.rows.insert("gaps.csv", String::from_utf8(row)?);
    let mut buf = Vec::new();
    csv::write_spectrum(&mut buf, &spec)?;
    art.files.push((PathBuf::from("spectra").join(format!("{name}.csv")), buf));
    Ok(())
}

fn task_steady(cfg: &Config, opts: &RunOptions, p: &SystemParams, pt: &Point, name: &str, art: &mut PointArtifacts) -> anyhow::Result<()> {
    let ss = match cfg.dim {
        // auto truncation may grow until the tail is below tolerance
        None => spectra::steady_state_adaptive(p, 4 * p.dim)?,
        Some(_) => spectra::steady_state(&build_superoperator(p)?)?,
    };
    let spec = grid_spec(cfg, cfg.grid_n);
    let qm = husimi::q_max(&ss.rho, &spec);
    let row = csv::SteadyRow { eta: pt.eta, eps_scaled: pt.eps_scaled, dim: ss.rho.dim(), q_max: qm.value, q_argmax: qm.alpha };
    let mut buf = Vec::new();
    csv::write_steady_row(&mut buf, &row, &ss)?;
    art.rows.insert("steady.csv", String::from_utf8(buf)?);
    let mut buf = Vec::new();
    csv::write_distribution_rows(&mut buf, pt.eta, pt.eps_scaled, &ss.observables.distribution)?;
    art.rows.insert("distribution.csv", String::from_utf8(buf)?);
    if opts.steady_husimi {
        let mut buf = Vec::new();
        csv::write_husimi(&mut buf, &husimi::husimi(&ss.rho, &spec))?;
        art.files.push((PathBuf::from("husimi").join(format!("steady_{name}.csv")), buf));
    }
    Ok(())
}

fn task_evolve(cfg: &Config, opts: &RunOptions, p: &SystemParams, name: &str, art: &mut PointArtifacts) -> anyhow::Result<()> {
    let steps = (cfg.t_end / EVOLVE_DT).round().max(1.0) as usize;
    let grid = dynamics::uniform_grid(cfg.t_end, steps);
    // snap requested times onto the output grid
    let dt = cfg.t_end / steps as f64;
    let snaps: Vec<f64> = opts.snapshots.iter().filter(|&&t| t >= 0.0 && t <= cfg.t_end).map(|&t| grid[(t / dt).round() as usize]).collect();
    let eo = EvolveOptions { rtol: cfg.rtol, atol: cfg.atol, q_grid: Some(grid_spec(cfg, EVOLVE_Q_GRID_N)), snapshot_times: snaps, ..Default::default() };
    let rec = dynamics::evolve(p, &fock::vacuum(p.dim)?, &grid, &eo)?;
    let mut buf = Vec::new();
    csv::write_evolution(&mut buf, &rec)?;
    art.files.push((PathBuf::from("evolve").join(format!("{name}.csv")), buf));
    for (t, rho) in &rec.snapshots {
        let mut buf = Vec::new();
        csv::write_husimi(&mut buf, &husimi::husimi(rho, &grid_spec(cfg, cfg.grid_n)))?;
        art.files.push((PathBuf::from("husimi").join(format!("{name}_t{t}.csv")), buf));
    }
    Ok(())
}

fn task_classical(cfg: &Config, p: &SystemParams, pt: &Point, name: &str, art: &mut PointArtifacts) -> anyhow::Result<()> {
    let nan = f64::NAN;
    let fixed = classical::fixed_point(p)?;
    let row = if fixed.stable {
        format!("{},{},fixed,{},{nan},{nan},{nan},{},{}\n", pt.eta, pt.eps_scaled, fixed.alpha.norm_sqr(), fixed.alpha.re, fixed.alpha.im)
    } else {
        match classical::limit_cycle(p) {
            Ok(cycle) => {
                let n_mean = cycle.points.iter().map(|s| s.alpha.norm_sqr()).sum::<f64>() / cycle.points.len() as f64;
                let mut buf = Vec::new();
                csv::write_cycle(&mut buf, &cycle)?;
                art.files.push((PathBuf::from("cycle").join(format!("{name}.csv")), buf));
                format!(
                    "{},{},cycle,{n_mean},{},{},{},{},{}\n",
                    pt.eta, pt.eps_scaled, cycle.period, cycle.freq, cycle.floquet_multiplier, fixed.alpha.re, fixed.alpha.im
                )
            }
            Err(ClassicalError::NotInLimitCycle(_)) => {
                format!("{},{},unresolved,{nan},{nan},{nan},{nan},{},{}\n", pt.eta, pt.eps_scaled, fixed.alpha.re, fixed.alpha.im)
            }
            Err(e) => return Err(e.into()),
        }
    };
    art.rows.insert("classical.csv", row);

    let steps = (cfg.t_end / EVOLVE_DT).round().max(1.0) as usize;
    let traj = classical::integrate(C64::new(0.0, 0.0), p, &dynamics::uniform_grid(cfg.t_end, steps))?;
    let mut buf = Vec::new();
    csv::write_trajectory(&mut buf, &traj)?;
    art.files.push((PathBuf::from("trajectory").join(format!("{name}.csv")), buf));

    let ens = classical::mc_ensemble(p, cfg.n_traj, cfg.seed, cfg.t_end)?;
    let mut buf = Vec::new();
    csv::write_ensemble(&mut buf, &ens)?;
    art.files.push((PathBuf::from("ensemble").join(format!("{name}.csv")), buf));
    Ok(())
}

fn run_point(cfg: &Config, opts: &RunOptions, index: usize, pt: &Point) -> (PointRecord, PointArtifacts) {
    let name = tag(index, pt);
    let mut art = PointArtifacts::default();
    let mut rec = PointRecord { index, eta: pt.eta, eps: pt.eps, eps_scaled: pt.eps_scaled, dim: None, tasks: Vec::new() };
    let params = point_params(cfg, pt);
    for &task in &cfg.tasks {
        let start = Instant::now();
        let res = params.as_ref().map_err(|e| anyhow::anyhow!("{e:#}")).and_then(|p| {
            rec.dim = Some(p.dim);
            match task {
                Task::Gaps => task_gaps(p, pt, &name, &mut art),
                Task::Steady => task_steady(cfg, opts, p, pt, &name, &mut art),
                Task::Evolve => task_evolve(cfg, opts, p, &name, &mut art),
                Task::Classical => task_classical(cfg, p, pt, &name, &mut art),
            }
        });
        let wall_time_s = start.elapsed().as_secs_f64();
        if let Err(e) = &res {
            log::warn!("point {index} (eta={}, eps_scaled={}) task {task}: {e:#}", pt.eta, pt.eps_scaled);
        }
        rec.tasks.push(TaskStatus { task, ok: res.is_ok(), error: res.err().map(|e| format!("{e:#}")), wall_time_s });
    }
    (rec, art)
}

fn merged_headers() -> [(&'static str, &'static str); 4] {
    [("gaps.csv", csv::GAPS_HEADER), ("steady.csv", csv::STEADY_HEADER), ("distribution.csv", csv::DISTRIBUTION_HEADER), ("classical.csv", CLASSICAL_HEADER)]
}

fn tasks_file(task: Task) -> &'static [&'static str] {
    match task {
        Task::Gaps => &["gaps.csv"],
        Task::Steady => &["steady.csv", "distribution.csv"],
        Task::Evolve => &[],
        Task::Classical => &["classical.csv"],
    }
}

/// Outcome of a sweep.
#[derive(Debug)]
pub struct SweepSummary {
    pub points: usize,
    pub failed_tasks: usize,
    pub files: Vec<PathBuf>,
}

/// Runs every task at every point, writes merged CSVs, per-point files and
/// `manifest.json` under `out`. Point failures are recorded, not fatal.
pub fn run_sweep(cfg: &Config, opts: &RunOptions, out: &Path) -> anyhow::Result<SweepSummary> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let t0 = Instant::now();
    let points = cfg.points();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build()?;
    let results: Vec<(PointRecord, PointArtifacts)> = pool.install(|| points.par_iter().enumerate().map(|(i, pt)| run_point(cfg, opts, i, pt)).collect());

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut written = Vec::new();
    for (file, header) in merged_headers() {
        if !cfg.tasks.iter().any(|t| tasks_file(*t).contains(&file)) {
            continue;
        }
        let mut text = format!("{header}\n");
        for (_, art) in &results {
            if let Some(rows) = art.rows.get(file) {
                text.push_str(rows);
            }
        }
        let path = out.join(file);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    for (_, art) in &results {
        for (rel, bytes) in &art.files {
            let path = out.join(rel);
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir)?;
            }
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
    }

    let records: Vec<&PointRecord> = results.iter().map(|(r, _)| r).collect();
    let failed_tasks = records.iter().flat_map(|r| &r.tasks).filter(|t| !t.ok).count();
    let manifest = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "tool": { "name": "cavity", "version": env!("CARGO_PKG_VERSION") },
        "config": cfg,
        "run_options": { "steady_husimi": opts.steady_husimi, "snapshots": opts.snapshots },
        "csv_headers": {
            "gaps.csv": csv::GAPS_HEADER,
            "steady.csv": csv::STEADY_HEADER,
            "distribution.csv": csv::DISTRIBUTION_HEADER,
            "classical.csv": CLASSICAL_HEADER,
            "spectra/*.csv": csv::SPECTRUM_HEADER,
            "evolve/*.csv": csv::EVOLVE_HEADER,
            "husimi/*.csv": csv::HUSIMI_HEADER,
            "trajectory/*.csv": csv::TRAJECTORY_HEADER,
            "ensemble/*.csv": csv::ENSEMBLE_HEADER,
            "cycle/*.csv": "period=,freq= lines then re,im",
        },
        "started_unix": started,
        "wall_time_s": t0.elapsed().as_secs_f64(),
        "points": records,
        "failed_tasks": failed_tasks,
    });
    let path = out.join("manifest.json");
    let mut f = fs::File::create(&path)?;
    serde_json::to_writer_pretty(&mut f, &manifest)?;
    writeln!(f)?;
    Ok(SweepSummary { points: points.len(), failed_tasks, files: written })
}

/// The single point of a configuration, for subcommands that take one.
pub fn single_point(cfg: &Config) -> anyhow::Result<Point> {
    let pts = cfg.points();
    if pts.len() != 1 {
        bail!("this subcommand takes a single (eta, drive) point, got {}", pts.len());
    }
    Ok(pts[0])
}
