//! Liouvillian spectra: dense and rightmost eigenvalues, dissipative gaps,
//! oscillation frequency, metastability and the steady state.
//!
//! Gap conventions, for eigenvalues `λ` of `L`:
//!
//! * `gap1 = −max{Re λ : |Im λ| > tol_imag}` (oscillating modes),
//! * `gap2 = −max{Re λ : |Im λ| ≤ tol_imag, |λ| > tol_zero}` (real modes),
//! * `osc_freq = |Im λ*|` for the `λ*` attaining `gap1`.

use std::cmp::Ordering;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::arnoldi::{self, ArnoldiError, ArnoldiOptions};
use crate::fock::{self, DensityDiagnostics, DensityMatrix, SystemParams};
use crate::liouvillian::{self, LiouvillianError, Superoperator};
use crate::sparse::{BandLu, BandLuError};

/// Default threshold on `|λ|` for the null eigenvalue.
pub const TOL_ZERO: f64 = 1e-9;

/// Default `tol_imag = 1e-6·max(1, |Δ|)`.
pub fn default_tol_imag(delta: f64) -> f64 {
    1e-6 * delta.abs().max(1.0)
}

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Liouvillian(#[from] LiouvillianError),
    #[error("dense eigensolve failed to converge")]
    DenseEigen,
    #[error("shifted factorization failed: {0}")]
    Factorization(#[from] BandLuError),
    #[error("iterative eigensolver: {0}")]
    Arnoldi(#[from] ArnoldiError),
    #[error("rightmost eigenvalues not certified after {shifts} shifts (strip Im in [0, {imag_bound:.3}] covered up to {covered_to:.3})")]
    CoverageNotReached { shifts: usize, imag_bound: f64, covered_to: f64 },
    #[error("steady state is not unique: second eigenvalue {0} lies within tol_zero of zero")]
    DegenerateNullSpace(C64),
    #[error("need at least {needed} nonzero eigenvalues, got {got}")]
    InsufficientEigenvalues { needed: usize, got: usize },
    #[error("k must be at least 1")]
    InvalidK,
}

/// Spectrum summary. Eigenvalues are sorted by descending real part (ties by
/// descending imaginary part).
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<C64>,
    pub gap1: Option<f64>,
    pub gap2: Option<f64>,
    pub osc_freq: Option<f64>,
    pub metastability_ratio: Option<f64>,
    pub tol_imag: f64,
    pub tol_zero: f64,
    /// Only part of the spectrum is known.
    pub partial: bool,
}

fn by_real_desc(a: &C64, b: &C64) -> Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

impl SpectrumResult {
    pub fn from_eigenvalues(mut eigenvalues: Vec<C64>, tol_imag: f64, tol_zero: f64, partial: bool) -> Self {
        eigenvalues.sort_by(by_real_desc);
        let osc = eigenvalues
            .iter()
            .filter(|l| l.im.abs() > tol_imag)
            .max_by(|a, b| a.re.total_cmp(&b.re).then(b.im.abs().total_cmp(&a.im.abs())));
        let real_mode = eigenvalues
            .iter()
            .filter(|l| l.im.abs() <= tol_imag && l.norm() > tol_zero)
            .map(|l| l.re)
            .max_by(f64::total_cmp);
        let mut out = Self {
            gap1: osc.map(|l| (-l.re).max(0.0)),
            gap2: real_mode.map(|r| (-r).max(0.0)),
            osc_freq: osc.map(|l| l.im.abs()),
            metastability_ratio: None,
            eigenvalues,
            tol_imag,
            tol_zero,
            partial,
        };
        out.metastability_ratio = metastability_ratio(&out).ok();
        out
    }

    /// Number of eigenvalues with `|λ| < tol`.
    pub fn count_near_zero(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|l| l.norm() < tol).count()
    }
}

/// Largest ratio `Re λ_{i+1}/Re λ_i` over consecutive eigenvalues (descending
/// real part, null eigenvalue excluded).
pub fn metastability_ratio(spec: &SpectrumResult) -> Result<f64, SpectralError> {
    let re: Vec<f64> = spec
        .eigenvalues
        .iter()
        .filter(|l| l.norm() > spec.tol_zero)
        .map(|l| l.re)
        .collect();
    if re.len() < 2 {
        return Err(SpectralError::InsufficientEigenvalues { needed: 2, got: re.len() });
    }
    let mut sorted = re;
    sorted.sort_by(|a, b| b.total_cmp(a));
    let ratio = sorted
        .windows(2)
        .filter(|w| w[0].abs() > spec.tol_zero)
        .map(|w| w[1] / w[0])
        .fold(f64::NAN, f64::max);
    if ratio.is_nan() {
        return Err(SpectralError::InsufficientEigenvalues { needed: 2, got: 0 });
    }
    Ok(ratio)
}

/// All eigenvalues by dense eigendecomposition (`dim <= DENSE_DIM_LIMIT`).
pub fn full_spectrum(l: &Superoperator) -> Result<SpectrumResult, SpectralError> {
    let dense = l.to_dense()?;
    let vals = dense.eigenvalues().map_err(|_| SpectralError::DenseEigen)?;
    Ok(SpectrumResult::from_eigenvalues(vals, default_tol_imag(l.params().delta), TOL_ZERO, false))
}

/// Settings for [`rightmost_eigenvalues_with`].
#[derive(Debug, Clone, Copy)]
pub struct RightmostOptions {
    /// Real part of every shift, a small positive number.
    pub shift_re: f64,
    /// Eigenvalues requested per shift before adaptive growth.
    pub nev_per_shift: usize,
    pub max_shifts: usize,
    pub arnoldi_tol: f64,
}

impl RightmostOptions {
    pub fn for_superoperator(l: &Superoperator, k: usize) -> Self {
        let p = l.params();
        let scale = p.kappa.max(p.gain).max(p.eta).max(1e-3);
        Self { shift_re: 1e-2 * scale, nev_per_shift: (k + 8).max(12), max_shifts: 400, arnoldi_tol: 1e-12 }
    }
}

/// Eigenvalues of the shifted-inverse operator nearest one shift.
struct ShiftRun {
    center: C64,
    radius: f64,
    values: Vec<C64>,
    exhaustive: bool,
}

fn start_vector(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
}

fn nearest_to_shift(l: &Superoperator, shift: C64, nev: usize, tol: f64) -> Result<(ShiftRun, Vec<arnoldi::RitzPair>), SpectralError> {
    let n = l.matrix().nrows();
    let lu = BandLu::factor(l.matrix(), shift)?;
    let op = |x: &[C64], y: &mut [C64]| {
        y.copy_from_slice(x);
        lu.solve_in_place(y);
    };
    let mut opts = ArnoldiOptions::new(nev);
    opts.tol = tol;
    let pairs = arnoldi::largest_magnitude(n, op, &start_vector(n, 0x5eed), opts)?;
    let values: Vec<C64> = pairs.iter().map(|p| shift + 1.0 / p.value).collect();
    let exhaustive = values.len() >= n;
    let radius = if exhaustive { f64::INFINITY } else { values.iter().map(|v| (v - shift).norm()).fold(0.0, f64::max) };
    Ok((ShiftRun { center: shift, radius, values, exhaustive }, pairs))
}

/// The `k` eigenvalues of largest real part, from shift-invert Arnoldi
/// runs at shifts `σ = s + iω` (`s` small and positive).
///
/// Each run finds every eigenvalue inside a disc around its shift. Shifts
/// are added along the imaginary axis until the union of discs covers the
/// strip `Re λ ∈ [x_k, 0]`, `Im λ ∈ [0, Y]`, where `x_k` is the k-th
/// largest real part found so far and `Y` a Gershgorin bound on `|Im λ|`.
/// The spectrum is closed under conjugation, so only `Im ≥ 0` is scanned.
pub fn rightmost_eigenvalues(l: &Superoperator, k: usize) -> Result<SpectrumResult, SpectralError> {
    rightmost_eigenvalues_with(l, k, RightmostOptions::for_superoperator(l, k))
}

pub fn rightmost_eigenvalues_with(l: &Superoperator, k: usize, opts: RightmostOptions) -> Result<SpectrumResult, SpectralError> {
    if k == 0 {
        return Err(SpectralError::InvalidK);
    }
    let n = l.matrix().nrows();
    let k = k.min(n);
    let s = opts.shift_re;
    let imag_bound = l.matrix().imag_extent_bound();
    let dedupe_tol = 1e-7 * l.matrix().norm_inf().max(1.0);

    let mut found: Vec<C64> = Vec::new();
    let add = |found: &mut Vec<C64>, v: C64| {
        for cand in [v, v.conj()] {
            if !found.iter().any(|f| (f - cand).norm() < dedupe_tol) {
                found.push(cand);
            }
        }
    };
    let mut runs: Vec<ShiftRun> = Vec::new();
    let mut nev = opts.nev_per_shift.min(n);
    let mut omega = 0.0;
    let mut covered_to = 0.0;

    while runs.len() < opts.max_shifts {
        let (run, _) = nearest_to_shift(l, C64::new(s, omega), nev, opts.arnoldi_tol)?;
        for &v in &run.values {
            add(&mut found, v);
        }
        let exhaustive = run.exhaustive;
        runs.push(run);
        if exhaustive || found.len() >= n {
            break;
        }
        if found.len() < k {
            nev = (2 * nev).min(n);
            continue;
        }
        let mut re: Vec<f64> = found.iter().map(|v| v.re).collect();
        re.sort_by(|a, b| b.total_cmp(a));
        let x_k = re[k - 1];
        let width = s - x_k;

        // covered vertical intervals of the strip
        let mut intervals: Vec<(f64, f64)> = runs
            .iter()
            .filter(|r| r.radius > width)
            .map(|r| {
                let h = (r.radius * r.radius - width * width).sqrt();
                (r.center.im - h, r.center.im + h)
            })
            .collect();
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut reach = 0.0f64;
        for (lo, hi) in &intervals {
            if *lo <= reach {
                reach = reach.max(*hi);
            } else {
                break;
            }
        }
        covered_to = reach;
        if reach >= imag_bound {
            let top: Vec<C64> = {
                let mut all = found.clone();
                all.sort_by(by_real_desc);
                all.truncate(k);
                all
            };
            return Ok(SpectrumResult::from_eigenvalues(top, default_tol_imag(l.params().delta), TOL_ZERO, k < n));
        }
        let last = runs.last().unwrap();
        let last_h = if last.radius > width { (last.radius * last.radius - width * width).sqrt() } else { 0.0 };
        if last.center.im - last_h <= reach && last_h > 0.0 {
            // the latest disc connected to the covered region: move on
            omega = reach + last_h;
        } else if last_h > 0.0 && last.center.im > reach {
            // a gap remains below the latest disc
            omega = reach + 0.9 * last_h;
        } else {
            nev = (2 * nev).min(n);
            if last.center.im < reach {
                omega = reach;
            }
        }
    }
    // all eigenvalues found without reaching the coverage bound
    if found.len() >= n || runs.last().is_some_and(|r| r.exhaustive) {
        let mut all = found;
        all.sort_by(by_real_desc);
        all.truncate(k);
        return Ok(SpectrumResult::from_eigenvalues(all, default_tol_imag(l.params().delta), TOL_ZERO, k < n));
    }
    Err(SpectralError::CoverageNotReached { shifts: runs.len(), imag_bound, covered_to })
}

/// Steady state of the generator with residual and observables.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// `max |L ρ|` entrywise.
    pub residual: f64,
    /// Eigenvalue nearest zero and the next one.
    pub null_eigenvalue: C64,
    pub second_eigenvalue: C64,
    pub diagnostics: DensityDiagnostics,
    pub observables: SteadyObservables,
    /// Top-level population and suggested larger dimension when the
    /// truncation is inadequate.
    pub truncation_tail: f64,
    pub suggested_dim: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SteadyObservables {
    pub n_photon: f64,
    pub var_n: f64,
    pub purity: f64,
    pub distribution: Vec<f64>,
    /// `η·√Var N`.
    pub fluct_eta_sigma: f64,
    /// `η²·Var N`.
    pub fluct_eta2_var: f64,
}

impl SteadyObservables {
    pub fn of(rho: &DensityMatrix, eta: f64) -> Self {
        let var_n = fock::photon_var(rho);
        Self {
            n_photon: fock::photon_number(rho),
            var_n,
            purity: fock::purity(rho),
            distribution: fock::photon_distribution(rho),
            fluct_eta_sigma: eta * var_n.max(0.0).sqrt(),
            fluct_eta2_var: eta * eta * var_n,
        }
    }
}

fn trace_normalized(v: &[C64], dim: usize) -> DensityMatrix {
    let rho = DensityMatrix::from_column_stacked(v, dim);
    let tr = rho.trace();
    let scaled: Vec<C64> = v.iter().map(|x| x / tr).collect();
    fock::hermitize(&DensityMatrix::from_column_stacked(&scaled, dim))
}

/// Null vector of `L` from shift-invert Arnoldi near zero, refined by one
/// inverse-iteration sweep, hermitized and trace-normalized.
pub fn steady_state(l: &Superoperator) -> Result<SteadyState, SpectralError> {
    let p = *l.params();
    let d = p.dim;
    let scale = p.kappa.max(p.gain).max(p.eta).max(1e-3);
    let shift = C64::new(1e-8 * scale, 0.0);
    let (run, pairs) = nearest_to_shift(l, shift, 2, 1e-12)?;
    let mut by_dist: Vec<usize> = (0..run.values.len()).collect();
    by_dist.sort_by(|&a, &b| run.values[a].norm().total_cmp(&run.values[b].norm()));
    let null_eigenvalue = run.values[by_dist[0]];
    let second_eigenvalue = run.values.get(*by_dist.get(1).unwrap_or(&0)).copied().unwrap_or(C64::new(f64::NAN, 0.0));
    if second_eigenvalue.norm() < TOL_ZERO {
        return Err(SpectralError::DegenerateNullSpace(second_eigenvalue));
    }

    let lu = BandLu::factor(l.matrix(), shift)?;
    let mut v = pairs[by_dist[0]].vector.clone();
    lu.solve_in_place(&mut v);
    let rho = trace_normalized(&v, d);

    let lr = liouvillian::apply(&p, &rho)?;
    let residual = lr.max_abs();
    let diagnostics = fock::validate_density(&rho);
    let (truncation_tail, suggested_dim) = fock::truncation_check(&rho);
    let observables = SteadyObservables::of(&rho, p.eta);
    Ok(SteadyState { rho, residual, null_eigenvalue, second_eigenvalue, diagnostics, observables, truncation_tail, suggested_dim })
}

/// Steady state with the truncation grown (up to `max_dim`) while the top
/// Fock level carries more than the tolerated population.
pub fn steady_state_adaptive(p: &SystemParams, max_dim: usize) -> Result<SteadyState, SpectralError> {
    let mut p = *p;
    loop {
        let ss = steady_state(&liouvillian::build_superoperator(&p)?)?;
        match ss.suggested_dim {
            Some(d) if d > p.dim && p.dim < max_dim => {
                log::info!("growing truncation from {} to {}", p.dim, d.min(max_dim));
                p = p.with_dim(d.min(max_dim));
            }
            _ => return Ok(ss),
        }
    }
}

/// Largest Fock dimension for which [`spectrum_auto`] uses the dense solver.
pub const AUTO_DENSE_DIM: usize = 40;

/// Cap on the eigenvalue count [`spectrum_auto`] grows to.
pub const AUTO_MAX_K: usize = 64;

/// Full spectrum for small truncations, otherwise the `k` rightmost
/// eigenvalues, doubling `k` (up to [`AUTO_MAX_K`]) while either gap is
/// still undefined. Many oscillating modes can sit to the right of the
/// first real one.
pub fn spectrum_auto(l: &Superoperator, k: usize) -> Result<SpectrumResult, SpectralError> {
    if l.dim_fock() <= AUTO_DENSE_DIM {
        return full_spectrum(l);
    }
    let mut k = k;
    loop {
        let spec = rightmost_eigenvalues(l, k)?;
        if (spec.gap1.is_some() && spec.gap2.is_some()) || k >= AUTO_MAX_K || !spec.partial {
            return Ok(spec);
        }
        k = (2 * k).min(AUTO_MAX_K);
        log::info!("gap undefined among the rightmost eigenvalues; retrying with k = {k}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::build_superoperator;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn gaps_from_definitions() {
        let spec = SpectrumResult::from_eigenvalues(vec![c(0.0, 0.0), c(-0.5, 0.0), c(-0.2, 3.0), c(-0.2, -3.0)], 1e-6, 1e-9, false);
        assert_eq!(spec.gap1, Some(0.2));
        assert_eq!(spec.gap2, Some(0.5));
        assert_eq!(spec.osc_freq, Some(3.0));

        // conjugating every eigenvalue leaves the gaps unchanged
        let conj: Vec<C64> = spec.eigenvalues.iter().map(|l| l.conj()).collect();
        let spec2 = SpectrumResult::from_eigenvalues(conj, 1e-6, 1e-9, false);
        assert_eq!((spec.gap1, spec.gap2, spec.osc_freq), (spec2.gap1, spec2.gap2, spec2.osc_freq));
    }

    #[test]
    fn metastability_ratio_arithmetic() {
        let spec = SpectrumResult::from_eigenvalues(vec![c(0.0, 0.0), c(-0.01, 0.0), c(-0.011, 0.0), c(-1.0, 0.0)], 1e-6, 1e-9, false);
        let r = metastability_ratio(&spec).unwrap();
        assert!((r - 1.0 / 0.011).abs() < 1e-9);

        let short = SpectrumResult::from_eigenvalues(vec![c(0.0, 0.0), c(-1.0, 0.0)], 1e-6, 1e-9, false);
        assert!(matches!(metastability_ratio(&short), Err(SpectralError::InsufficientEigenvalues { .. })));
    }

    #[test]
    fn vacuum_steady_state_under_pure_loss() {
        let p = SystemParams::new(10.0, 0.3, 0.0, 0.0, c(0.0, 0.0), 8).unwrap();
        let ss = steady_state(&build_superoperator(&p).unwrap()).unwrap();
        assert!((ss.rho.get(0, 0).re - 1.0).abs() < 1e-10);
        assert!((ss.observables.purity - 1.0).abs() < 1e-10);
        assert!(ss.residual < 1e-10);
    }

    #[test]
    fn closed_system_has_degenerate_null_space() {
        let p = SystemParams::new(1.0, 0.0, 0.0, 0.0, c(0.0, 0.0), 4).unwrap();
        let err = steady_state(&build_superoperator(&p).unwrap()).unwrap_err();
        assert!(matches!(err, SpectralError::DegenerateNullSpace(_)));
    }

    #[test]
    fn k_one_returns_null_eigenvalue() {
        let p = SystemParams::new(3.0, 0.4, 0.2, 0.1, c(0.5, 0.0), 10).unwrap();
        let spec = rightmost_eigenvalues(&build_superoperator(&p).unwrap(), 1).unwrap();
        assert_eq!(spec.eigenvalues.len(), 1);
        assert!(spec.eigenvalues[0].norm() < 1e-9);
        assert!(spec.partial);
        assert!(matches!(rightmost_eigenvalues(&build_superoperator(&p).unwrap(), 0), Err(SpectralError::InvalidK)));
    }
}
