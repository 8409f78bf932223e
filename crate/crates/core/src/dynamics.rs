//! Master-equation time evolution with observable recording.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::fock::{self, DensityMatrix, FockError, SystemParams};
use crate::husimi::{self, GridSpec};
use crate::liouvillian::{Generator, LiouvillianError};
use crate::ode::{Dopri5, OdeError, OdeOptions, OdeStats};

/// Largest tolerated `|Tr ρ − 1|` along a trajectory.
pub const TRACE_DRIFT_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Liouvillian(#[from] LiouvillianError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError),
    #[error("trace drifted by {err:e} at t={t} (limit {TRACE_DRIFT_TOL:e}); tighten rtol/atol")]
    TraceDrift { t: f64, err: f64 },
    #[error("time grid must be non-empty and non-decreasing")]
    BadTimeGrid,
    #[error("record covers [{have_lo}, {have_hi}] but the window needs [{need_lo}, {need_hi}]")]
    InsufficientCoverage { have_lo: f64, have_hi: f64, need_lo: f64, need_hi: f64 },
    #[error("averaging period must be positive, got {0}")]
    BadPeriod(f64),
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Hermitize and renormalize after every accepted step.
    pub hermitize_steps: bool,
    /// Record the refined Q maximum at each output time.
    pub q_grid: Option<GridSpec>,
    /// Output times at which the full state is kept.
    pub snapshot_times: Vec<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, hermitize_steps: false, q_grid: None, snapshot_times: Vec::new() }
    }
}

/// Observables sampled on the output grid.
#[derive(Debug, Clone, Default)]
pub struct EvolutionRecord {
    pub times: Vec<f64>,
    pub n_photon: Vec<f64>,
    /// `η·N`.
    pub n_rescaled: Vec<f64>,
    pub var_n: Vec<f64>,
    pub purity: Vec<f64>,
    /// `⟨a⟩`.
    pub amplitude: Vec<C64>,
    pub q_max: Option<Vec<f64>>,
    pub trace_err: Vec<f64>,
    pub snapshots: Vec<(f64, DensityMatrix)>,
    pub stats: OdeStats,
}

impl EvolutionRecord {
    fn push(&mut self, t: f64, rho: &DensityMatrix, eta: f64, q_grid: Option<&GridSpec>) {
        let n = fock::photon_number(rho);
        self.times.push(t);
        self.n_photon.push(n);
        self.n_rescaled.push(eta * n);
        self.var_n.push(fock::photon_var(rho));
        self.purity.push(fock::purity(rho));
        self.amplitude.push(fock::mean_amplitude(rho));
        self.trace_err.push((rho.trace() - C64::new(1.0, 0.0)).norm());
        if let Some(spec) = q_grid {
            self.q_max.get_or_insert_with(Vec::new).push(husimi::q_max(rho, spec).value);
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Integrates `dρ/dt = L ρ` from `rho0` at `t_grid[0]`, recording
/// observables at every grid time.
pub fn evolve(p: &SystemParams, rho0: &DensityMatrix, t_grid: &[f64], opts: &EvolveOptions) -> Result<EvolutionRecord, DynamicsError> {
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(DynamicsError::BadTimeGrid);
    }
    if rho0.dim() != p.dim {
        return Err(FockError::DimensionMismatch { expected: p.dim, got: rho0.dim() }.into());
    }
    let d = p.dim;
    let gen = Generator::new(p)?;
    let ode_opts = OdeOptions { rtol: opts.rtol, atol: opts.atol, ..Default::default() };
    let mut solver = Dopri5::new(|_t, y: &[C64], dy: &mut [C64]| gen.apply_vec(y, dy), t_grid[0], &rho0.to_column_stacked(), ode_opts);

    let mut record = EvolutionRecord::default();
    let hermitize = opts.hermitize_steps;
    let q_grid = opts.q_grid.as_ref();
    for &t in t_grid {
        solver.advance_to(t, |_, y| {
            if hermitize {
                let rho = fock::hermitize(&DensityMatrix::from_column_stacked(y, d));
                y.copy_from_slice(&rho.to_column_stacked());
            }
            hermitize
        })?;
        let rho = DensityMatrix::from_column_stacked(solver.state(), d);
        record.push(t, &rho, p.eta, q_grid);
        let err = *record.trace_err.last().unwrap();
        if !(err < TRACE_DRIFT_TOL) {
            return Err(DynamicsError::TraceDrift { t, err });
        }
        if opts.snapshot_times.iter().any(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1.0)) {
            record.snapshots.push((t, rho));
        }
    }
    record.stats = solver.stats();
    Ok(record)
}

/// Uniform grid `0, dt, …` up to and including `t_end`.
pub fn uniform_grid(t_end: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| t_end * i as f64 / steps as f64).collect()
}

/// Time average of the purity over `[t_center − period/2, t_center + period/2]`
/// using the piecewise-linear interpolant of the record.
pub fn purity_plateau(record: &EvolutionRecord, t_center: f64, period: f64) -> Result<f64, DynamicsError> {
    window_average(&record.times, &record.purity, t_center, period)
}

pub fn window_average(times: &[f64], values: &[f64], t_center: f64, period: f64) -> Result<f64, DynamicsError> {
    if !(period > 0.0) {
        return Err(DynamicsError::BadPeriod(period));
    }
    let lo = t_center - 0.5 * period;
    let hi = t_center + 0.5 * period;
    let (have_lo, have_hi) = (times.first().copied().unwrap_or(f64::NAN), times.last().copied().unwrap_or(f64::NAN));
    let tol = 1e-12 * hi.abs().max(1.0);
    if !(have_lo <= lo + tol && have_hi >= hi - tol) {
        return Err(DynamicsError::InsufficientCoverage { have_lo, have_hi, need_lo: lo, need_hi: hi });
    }
    let interp = |t0: f64, v0: f64, t1: f64, v1: f64, t: f64| if t1 > t0 { v0 + (v1 - v0) * (t - t0) / (t1 - t0) } else { v0 };
    let mut integral = 0.0;
    for i in 0..times.len().saturating_sub(1) {
        let (t0, t1) = (times[i], times[i + 1]);
        let a = t0.max(lo);
        let b = t1.min(hi);
        if b <= a {
            continue;
        }
        let va = interp(t0, values[i], t1, values[i + 1], a);
        let vb = interp(t0, values[i], t1, values[i + 1], b);
        integral += 0.5 * (va + vb) * (b - a);
    }
    Ok(integral / (hi - lo))
}
