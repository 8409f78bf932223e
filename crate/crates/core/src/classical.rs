//! Mean-field dynamics of the cavity amplitude `α = ⟨a⟩`, a driven Van der
//! Pol oscillator:
//!
//! `α̇ = ((g − κ)/2 + iΔ)α − η|α|²α − iε`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::fock::{FockError, SystemParams};
use crate::husimi::{GridSpec, QGrid};
use crate::ode::{self, OdeError, OdeOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassicalError {
    #[error(transparent)]
    Params(#[from] FockError),
    #[error("no Hopf bifurcation: gain {gain} is below loss {kappa}")]
    NoBifurcation { gain: f64, kappa: f64 },
    #[error("not in the limit-cycle phase: {0}")]
    NotInLimitCycle(String),
    #[error("fixed-point Newton iteration did not converge (residual {0:e})")]
    NewtonFailed(f64),
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError),
}

/// Tolerances shared with the quantum integrator.
pub fn default_ode_options() -> OdeOptions {
    OdeOptions { rtol: 1e-8, atol: 1e-10, ..Default::default() }
}

fn tight_ode_options() -> OdeOptions {
    OdeOptions { rtol: 1e-11, atol: 1e-13, ..Default::default() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    pub t: f64,
    pub alpha: C64,
}

/// Right-hand side of the mean-field equation.
pub fn vdp_rhs(alpha: C64, p: &SystemParams) -> C64 {
    C64::new(p.net_gain(), p.delta) * alpha - p.eta * alpha.norm_sqr() * alpha - C64::new(0.0, 1.0) * p.eps
}

/// Rescaled drive `ε√η` at the Hopf bifurcation in the weak-nonlinearity
/// limit: `√((g−κ)[(g−κ)² + 4Δ²])/4`.
pub fn hopf_threshold(p: &SystemParams) -> Result<f64, ClassicalError> {
    let net = p.gain - p.kappa;
    if net < 0.0 {
        return Err(ClassicalError::NoBifurcation { gain: p.gain, kappa: p.kappa });
    }
    Ok((net * (net * net + 4.0 * p.delta * p.delta)).sqrt() / 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub alpha: C64,
    /// Eigenvalues of the real 2×2 linearization.
    pub jacobian_eigenvalues: [C64; 2],
    pub stable: bool,
}

/// Eigenvalues of the linearized flow `δα̇ = Pδα + Qδᾱ` at `alpha`.
pub fn linearization_eigenvalues(alpha: C64, p: &SystemParams) -> [C64; 2] {
    let pp = C64::new(p.net_gain(), p.delta) - 2.0 * p.eta * alpha.norm_sqr();
    let q = -p.eta * alpha * alpha;
    let disc = C64::new(q.norm_sqr() - pp.im * pp.im, 0.0).sqrt();
    [pp.re + disc, pp.re - disc]
}

fn classify(alpha: C64, p: &SystemParams) -> FixedPoint {
    let ev = linearization_eigenvalues(alpha, p);
    FixedPoint { alpha, jacobian_eigenvalues: ev, stable: ev.iter().all(|e| e.re < 0.0) }
}

/// Newton iteration on the real 2-D form of `vdp_rhs(α) = 0`.
fn newton_polish(mut alpha: C64, p: &SystemParams) -> Result<C64, ClassicalError> {
    let scale = 1.0 + p.eps.norm() + p.delta.abs() + p.net_gain().abs();
    for _ in 0..100 {
        let f = vdp_rhs(alpha, p);
        if f.norm() < 1e-14 * scale {
            return Ok(alpha);
        }
        // f(α + δ) ≈ f + Pδ + Qδ̄
        let pp = C64::new(p.net_gain(), p.delta) - 2.0 * p.eta * alpha.norm_sqr();
        let q = -p.eta * alpha * alpha;
        // solve Pδ + Qδ̄ = −f: conjugate equation gives δ = (−f P̄ + Q (−f̄))/(|P|² − |Q|²)
        let det = pp.norm_sqr() - q.norm_sqr();
        if det.abs() < 1e-300 {
            break;
        }
        let delta = (-f * pp.conj() + q * f.conj()) / det;
        alpha += delta;
    }
    let res = vdp_rhs(alpha, p).norm();
    if res < 1e-10 * scale {
        Ok(alpha)
    } else {
        Err(ClassicalError::NewtonFailed(res))
    }
}

/// Real roots of `η²x³ − 2aηx² + (a² + Δ²)x − |ε|² = 0` (with `x = |α|²`),
/// the occupation condition for stationary amplitudes.
fn occupation_roots(p: &SystemParams) -> Vec<f64> {
    let a = p.net_gain();
    let e2 = p.eps.norm_sqr();
    let lin = a * a + p.delta * p.delta;
    if p.eta == 0.0 {
        return if lin > 0.0 { vec![e2 / lin] } else { Vec::new() };
    }
    let (c3, c2, c1, c0) = (p.eta * p.eta, -2.0 * a * p.eta, lin, -e2);
    let cubic = |x: f64| ((c3 * x + c2) * x + c1) * x + c0;
    let dcubic = |x: f64| (3.0 * c3 * x + 2.0 * c2) * x + c1;
    // stationary points of the cubic split the positive axis into monotone
    // pieces; bisect each sign change
    let mut knots = vec![0.0];
    let disc = c2 * c2 - 3.0 * c3 * c1;
    if disc > 0.0 {
        for r in [(-c2 - disc.sqrt()) / (3.0 * c3), (-c2 + disc.sqrt()) / (3.0 * c3)] {
            if r > 0.0 {
                knots.push(r);
            }
        }
    }
    // cubic → +∞; an upper bound for the largest root
    let mut hi = 1.0f64.max(*knots.last().unwrap() * 2.0);
    while cubic(hi) <= 0.0 {
        hi *= 2.0;
    }
    knots.push(hi);
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (mut lo, mut up) = (w[0], w[1]);
        let (flo, fup) = (cubic(lo), cubic(up));
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo.signum() == fup.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + up);
            if cubic(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                up = mid;
            }
        }
        let mut x = 0.5 * (lo + up);
        for _ in 0..3 {
            let d = dcubic(x);
            if d != 0.0 {
                x -= cubic(x) / d;
            }
        }
        roots.push(x);
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (1.0 + b.abs()));
    roots
}

/// All stationary amplitudes of the flow, Newton-polished.
pub fn fixed_points(p: &SystemParams) -> Result<Vec<FixedPoint>, ClassicalError> {
    p.validate()?;
    if p.eps.norm() == 0.0 {
        // origin; with ε = 0 and g > κ the ring |α|² = (g−κ)/(2η) is a cycle,
        // not a set of fixed points, unless Δ = 0
        return Ok(vec![classify(C64::new(0.0, 0.0), p)]);
    }
    let i = C64::new(0.0, 1.0);
    let mut out: Vec<FixedPoint> = Vec::new();
    for x in occupation_roots(p) {
        let denom = C64::new(p.net_gain() - p.eta * x, p.delta);
        if denom.norm() == 0.0 {
            continue;
        }
        let guess = i * p.eps / denom;
        let alpha = newton_polish(guess, p)?;
        if !out.iter().any(|f| (f.alpha - alpha).norm() < 1e-9 * (1.0 + alpha.norm())) {
            out.push(classify(alpha, p));
        }
    }
    out.sort_by(|a, b| a.alpha.norm().total_cmp(&b.alpha.norm()));
    Ok(out)
}

/// The stationary amplitude on the stable branch (the lowest-occupation
/// stable root when several coexist). When no root is stable, the
/// lowest-occupation unstable one is returned with `stable = false`.
pub fn fixed_point(p: &SystemParams) -> Result<FixedPoint, ClassicalError> {
    let all = fixed_points(p)?;
    all.iter()
        .find(|f| f.stable)
        .or_else(|| all.first())
        .copied()
        .ok_or_else(|| ClassicalError::NewtonFailed(f64::NAN))
}

/// `|α*|²` of [`fixed_point`], used by the truncation heuristic.
pub fn fixed_point_occupation(p: &SystemParams) -> Option<f64> {
    fixed_point(p).ok().map(|f| f.alpha.norm_sqr())
}

/// Integrates the mean-field equation, sampling at `t_grid`.
pub fn integrate(alpha0: C64, p: &SystemParams, t_grid: &[f64]) -> Result<Vec<ClassicalState>, ClassicalError> {
    integrate_with(alpha0, p, t_grid, default_ode_options())
}

pub fn integrate_with(alpha0: C64, p: &SystemParams, t_grid: &[f64], opts: OdeOptions) -> Result<Vec<ClassicalState>, ClassicalError> {
    let p = *p;
    let ys = ode::solve(|_, y, dy| dy[0] = vdp_rhs(y[0], &p), t_grid, &[alpha0], opts)?;
    Ok(t_grid.iter().zip(ys).map(|(&t, y)| ClassicalState { t, alpha: y[0] }).collect())
}

/// State at a single time.
pub fn propagate(alpha0: C64, p: &SystemParams, t: f64, opts: OdeOptions) -> Result<C64, ClassicalError> {
    Ok(integrate_with(alpha0, p, &[0.0, t], opts)?[1].alpha)
}

/// One period of an attracting limit cycle.
#[derive(Debug, Clone)]
pub struct LimitCycle {
    /// Uniform samples over one period; the last point closes the orbit.
    pub points: Vec<ClassicalState>,
    pub period: f64,
    pub freq: f64,
    pub centroid: C64,
    /// Mean distance of the orbit from its centroid.
    pub radius: f64,
    /// Nontrivial Floquet multiplier, estimated from the return map.
    pub floquet_multiplier: f64,
    /// `|α(0) − α(period)|`.
    pub closure_error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct LimitCycleOptions {
    /// Angle of the Poincaré ray `{c + r·e^{iθ}, r > 0}` around the centroid.
    pub section_angle: f64,
    /// Samples over one period.
    pub samples: usize,
    /// Transient to discard; `20/(g − κ)` when `None`.
    pub t_burn: Option<f64>,
}

impl Default for LimitCycleOptions {
    fn default() -> Self {
        Self { section_angle: 0.0, samples: 400, t_burn: None }
    }
}

/// Signed distance to the section line and the coordinate along the ray.
fn section_coords(alpha: C64, centroid: C64, angle: f64) -> (f64, f64) {
    let z = (alpha - centroid) * C64::from_polar(1.0, -angle);
    (z.im, z.re)
}

pub fn limit_cycle(p: &SystemParams) -> Result<LimitCycle, ClassicalError> {
    limit_cycle_with(p, LimitCycleOptions::default())
}

/// Finds the attracting cycle by integrating past the transient and
/// timing successive same-direction crossings of a Poincaré ray through the
/// orbit centroid.
pub fn limit_cycle_with(p: &SystemParams, opts: LimitCycleOptions) -> Result<LimitCycle, ClassicalError> {
    p.validate()?;
    let net = p.gain - p.kappa;
    if net <= 0.0 {
        return Err(ClassicalError::NotInLimitCycle(format!("net gain g − κ = {net} is not positive")));
    }
    if p.eta <= 0.0 {
        return Err(ClassicalError::NotInLimitCycle("two-photon loss is zero; amplitudes grow without bound".into()));
    }
    let tight = tight_ode_options();
    let r0 = (0.5 * net / p.eta).sqrt();
    let fixed = fixed_points(p)?;
    let anchor = fixed.first().map_or(C64::new(0.0, 0.0), |f| f.alpha);
    let t_burn = opts.t_burn.unwrap_or(20.0 / net);
    let mut alpha = propagate(anchor + r0, p, t_burn, tight)?;

    if let Some(st) = fixed.iter().find(|f| f.stable && (f.alpha - alpha).norm() < 1e-3 * (1.0 + r0)) {
        return Err(ClassicalError::NotInLimitCycle(format!("trajectory settles on the stable fixed point {}", st.alpha)));
    }

    // coarse sampling of several revolutions; near the bifurcation the
    // relaxation is slow, so keep integrating until the orbit closes
    let omega_est = p.delta.abs().max(net).max(p.eta * r0 * r0);
    let dt = 2.0 * PI / omega_est / 200.0;
    let window = (40.0 * 2.0 * PI / omega_est).max(10.0 / net);
    let steps = (window / dt).ceil() as usize;
    let coarse: Vec<f64> = (0..=steps).map(|i| i as f64 * dt).collect();
    let n = opts.samples.max(16);
    let has_stable_focus = fixed.iter().any(|f| f.stable);
    let mut last_closure = f64::NAN;
    for _attempt in 0..MAX_CYCLE_ATTEMPTS {
        let traj = integrate_with(alpha, p, &coarse, tight)?;
        alpha = traj[steps].alpha;
        let spread = traj.iter().map(|s| (s.alpha - traj[0].alpha).norm()).fold(0.0, f64::max);
        if spread < 1e-6 * (1.0 + r0) {
            return Err(ClassicalError::NotInLimitCycle("no oscillation after the transient".into()));
        }
        let mean = traj.iter().map(|s| s.alpha).sum::<C64>() / traj.len() as f64;
        let crossings = find_crossings(&traj, mean, opts.section_angle, p, tight)?;
        if crossings.len() < 3 {
            return Err(ClassicalError::NotInLimitCycle(format!("only {} section crossings found", crossings.len())));
        }
        if has_stable_focus {
            // Aitken limit of the return map; a spiral into the focus
            // extrapolates to zero distance from the center
            let xs: Vec<f64> = crossings.iter().map(|c| section_coords(c.1, mean, opts.section_angle).1).collect();
            let k = xs.len();
            let (d1, d2) = (xs[k - 2] - xs[k - 3], xs[k - 1] - xs[k - 2]);
            if d1 * d2 > 0.0 && d2.abs() < d1.abs() && d1 < 0.0 {
                let limit = xs[k - 1] - d2 * d2 / (d2 - d1);
                if limit < 0.05 * xs[k - 1] {
                    return Err(ClassicalError::NotInLimitCycle("oscillation decays onto the stable fixed point".into()));
                }
            }
        }
        let rough_period = (crossings[crossings.len() - 1].0 - crossings[0].0) / (crossings.len() - 1) as f64;

        // centroid over one period, then time crossings on its ray
        let grid: Vec<f64> = (0..=n).map(|i| i as f64 * rough_period / n as f64).collect();
        let one = integrate_with(crossings[crossings.len() - 1].1, p, &grid, tight)?;
        let centroid = one[..n].iter().map(|s| s.alpha).sum::<C64>() / n as f64;
        let grid2: Vec<f64> = (0..=(3 * n)).map(|i| i as f64 * rough_period / n as f64).collect();
        let traj2 = integrate_with(one[n].alpha, p, &grid2, tight)?;
        let crossings = find_crossings(&traj2, centroid, opts.section_angle, p, tight)?;
        if crossings.len() < 2 {
            return Err(ClassicalError::NotInLimitCycle("lost the section after recentering".into()));
        }
        let period = crossings[1].0 - crossings[0].0;
        let start = crossings[0].1;

        let grid: Vec<f64> = (0..=n).map(|i| i as f64 * period / n as f64).collect();
        let states = integrate_with(start, p, &grid, tight)?;
        let max_abs = states.iter().map(|s| s.alpha.norm()).fold(0.0, f64::max);
        let closure_error = (states[n].alpha - states[0].alpha).norm();
        if closure_error <= 1e-6 * max_abs.max(1.0) {
            return finish_cycle(p, &opts, states, centroid, period, closure_error);
        }
        last_closure = closure_error;
    }
    Err(ClassicalError::NotInLimitCycle(format!("orbit does not close (error {last_closure:e})")))
}

const MAX_CYCLE_ATTEMPTS: usize = 40;

fn finish_cycle(p: &SystemParams, opts: &LimitCycleOptions, states: Vec<ClassicalState>, centroid: C64, period: f64, closure_error: f64) -> Result<LimitCycle, ClassicalError> {
    let tight = tight_ode_options();
    let n = states.len() - 1;
    let start = states[0].alpha;
    let radius = states[..n].iter().map(|s| (s.alpha - centroid).norm()).sum::<f64>() / n as f64;

    // return map along the ray: x ↦ P(x); the multiplier is dP/dx
    let (_, x_star) = section_coords(start, centroid, opts.section_angle);
    let delta = 1e-5 * radius;
    let perturbed = start + C64::from_polar(delta, opts.section_angle);
    let grid: Vec<f64> = (0..=(2 * n)).map(|i| i as f64 * period / n as f64).collect();
    let ptraj = integrate_with(perturbed, p, &grid, tight)?;
    let pc = find_crossings(&ptraj[1..], centroid, opts.section_angle, p, tight)?;
    let floquet_multiplier = match pc.first() {
        Some(&(_, back)) => (section_coords(back, centroid, opts.section_angle).1 - x_star) / delta,
        None => f64::NAN,
    };
    if !(floquet_multiplier.abs() < 1.0) {
        return Err(ClassicalError::NotInLimitCycle(format!("cycle is not attracting (multiplier {floquet_multiplier})")));
    }

    Ok(LimitCycle {
        points: states,
        period,
        freq: 2.0 * PI / period,
        centroid,
        radius,
        floquet_multiplier,
        closure_error,
    })
}

/// Crossings of the ray `{c + r·e^{iθ}, r > 0}` in the dominant rotation
/// direction, with times refined by secant iteration on re-integrated
/// segments. Returns `(time, α)` pairs.
fn find_crossings(traj: &[ClassicalState], centroid: C64, angle: f64, p: &SystemParams, opts: OdeOptions) -> Result<Vec<(f64, C64)>, ClassicalError> {
    let mut up = Vec::new();
    let mut down = Vec::new();
    for w in traj.windows(2) {
        let (s0, x0) = section_coords(w[0].alpha, centroid, angle);
        let (s1, x1) = section_coords(w[1].alpha, centroid, angle);
        if x0 + x1 <= 0.0 {
            continue;
        }
        if s0 < 0.0 && s1 >= 0.0 {
            up.push((w[0], w[1]));
        } else if s0 > 0.0 && s1 <= 0.0 {
            down.push((w[0], w[1]));
        }
    }
    let chosen = if up.len() >= down.len() { up } else { down };
    let mut out = Vec::with_capacity(chosen.len());
    for (a, b) in chosen {
        let g = |s: &C64| section_coords(*s, centroid, angle).0;
        // secant on τ ∈ [0, h] from the left state
        let h = b.t - a.t;
        let (mut t_lo, mut g_lo) = (0.0, g(&a.alpha));
        let (mut t_hi, mut g_hi) = (h, g(&b.alpha));
        let mut best = (t_lo + (t_hi - t_lo) * g_lo / (g_lo - g_hi), C64::new(0.0, 0.0));
        for _ in 0..30 {
            let tau = t_lo - g_lo * (t_hi - t_lo) / (g_hi - g_lo);
            let s = propagate(a.alpha, p, tau, opts)?;
            let gs = g(&s);
            best = (tau, s);
            if gs.abs() < 1e-13 * (1.0 + s.norm()) {
                break;
            }
            if gs.signum() == g_lo.signum() {
                // Illinois modification keeps the bracket shrinking on both ends
                t_lo = tau;
                g_lo = gs;
                g_hi *= 0.5;
            } else {
                t_hi = tau;
                g_hi = gs;
                g_lo *= 0.5;
            }
        }
        out.push((a.t + best.0, best.1));
    }
    Ok(out)
}

/// Initial-state distribution of the Monte Carlo ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum VacuumSampling {
    /// Husimi Q of the vacuum: σ = 1/√2 per quadrature.
    #[default]
    Husimi,
    /// Wigner function of the vacuum: σ = 1/2 per quadrature.
    Wigner,
}

impl VacuumSampling {
    pub fn sigma(self) -> f64 {
        match self {
            Self::Husimi => std::f64::consts::FRAC_1_SQRT_2,
            Self::Wigner => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct McOptions {
    pub sampling: VacuumSampling,
    pub ode: OdeOptions,
    pub parallel: bool,
}

impl Default for McOptions {
    fn default() -> Self {
        Self { sampling: VacuumSampling::Husimi, ode: default_ode_options(), parallel: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalEnsemble {
    pub seed: u64,
    pub n_traj: usize,
    pub t_query: f64,
    pub initial: Vec<C64>,
    pub samples_t: Vec<C64>,
}

/// Initial amplitude of trajectory `index`, drawn from its own ChaCha
/// stream `(seed, index)`.
pub fn vacuum_sample(seed: u64, index: u64, sampling: VacuumSampling) -> C64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let x: f64 = StandardNormal.sample(&mut rng);
    let y: f64 = StandardNormal.sample(&mut rng);
    sampling.sigma() * C64::new(x, y)
}

pub fn mc_ensemble(p: &SystemParams, n_traj: usize, seed: u64, t_query: f64) -> Result<ClassicalEnsemble, ClassicalError> {
    mc_ensemble_with(p, n_traj, seed, t_query, McOptions::default())
}

/// Integrates `n_traj` trajectories from vacuum-distributed starts to
/// `t_query`. Results are identical for serial and parallel execution.
pub fn mc_ensemble_with(p: &SystemParams, n_traj: usize, seed: u64, t_query: f64, opts: McOptions) -> Result<ClassicalEnsemble, ClassicalError> {
    p.validate()?;
    let initial: Vec<C64> = (0..n_traj as u64).map(|i| vacuum_sample(seed, i, opts.sampling)).collect();
    let run = |a0: &C64| -> Result<C64, ClassicalError> {
        if t_query == 0.0 {
            Ok(*a0)
        } else {
            propagate(*a0, p, t_query, opts.ode)
        }
    };
    let samples_t = if opts.parallel {
        initial.par_iter().map(run).collect::<Result<Vec<_>, _>>()?
    } else {
        initial.iter().map(run).collect::<Result<Vec<_>, _>>()?
    };
    Ok(ClassicalEnsemble { seed, n_traj, t_query, initial, samples_t })
}

/// Ensemble average of the coherent-state kernel `e^{−|α − αᵢ|²}`, so a
/// single sample at β reproduces the quantum Q of `|β⟩`.
pub fn classical_husimi(ensemble: &ClassicalEnsemble, spec: &GridSpec) -> QGrid {
    let n = ensemble.samples_t.len().max(1) as f64;
    let mean_n = ensemble.samples_t.iter().map(|a| a.norm_sqr()).sum::<f64>() / n;
    let radius = spec.radius.unwrap_or_else(|| GridSpec::auto_radius(mean_n));
    let (re_axis, im_axis) = spec.axes(radius);
    let samples = &ensemble.samples_t;
    QGrid::from_fn(re_axis, im_axis, |a| {
        samples
            .iter()
            .map(|s| {
                let d2 = (a - s).norm_sqr();
                if d2 > 40.0 {
                    0.0
                } else {
                    (-d2).exp()
                }
            })
            .sum::<f64>()
            / n
    })
}

/// Oscillation phase at `t_query` for a grid of initial amplitudes.
#[derive(Debug, Clone)]
pub struct PhaseMap {
    pub re_axis: Vec<f64>,
    pub im_axis: Vec<f64>,
    /// `arg(α(t_query) − centroid)` in (−π, π]; NaN at singular cells.
    /// Row-major with the imaginary axis as the slow index.
    pub phase: Vec<f64>,
    pub singular: Vec<bool>,
    pub centroid: C64,
    pub cycle_radius: f64,
}

impl PhaseMap {
    pub fn get(&self, i_re: usize, i_im: usize) -> f64 {
        self.phase[i_im * self.re_axis.len() + i_re]
    }

    pub fn is_singular(&self, i_re: usize, i_im: usize) -> bool {
        self.singular[i_im * self.re_axis.len() + i_re]
    }
}

/// Fraction of the cycle radius below which a trajectory counts as not
/// having reached the cycle.
pub const SINGULAR_FRACTION: f64 = 0.05;

pub fn phase_map(p: &SystemParams, re_axis: &[f64], im_axis: &[f64], t_query: f64) -> Result<PhaseMap, ClassicalError> {
    let cycle = limit_cycle(p)?;
    let nr = re_axis.len();
    let opts = default_ode_options();
    let results: Vec<Result<(f64, bool), ClassicalError>> = (0..re_axis.len() * im_axis.len())
        .into_par_iter()
        .map(|idx| {
            let a0 = C64::new(re_axis[idx % nr], im_axis[idx / nr]);
            let a = propagate(a0, p, t_query, opts)?;
            let z = a - cycle.centroid;
            if z.norm() < SINGULAR_FRACTION * cycle.radius {
                Ok((f64::NAN, true))
            } else {
                Ok((z.arg(), false))
            }
        })
        .collect();
    let mut phase = Vec::with_capacity(results.len());
    let mut singular = Vec::with_capacity(results.len());
    for r in results {
        let (ph, s) = r?;
        phase.push(ph);
        singular.push(s);
    }
    Ok(PhaseMap { re_axis: re_axis.to_vec(), im_axis: im_axis.to_vec(), phase, singular, centroid: cycle.centroid, cycle_radius: cycle.radius })
}

/// Wrapped phase difference in (−π, π].
pub fn wrap_phase(d: f64) -> f64 {
    let mut x = d % (2.0 * PI);
    if x <= -PI {
        x += 2.0 * PI;
    } else if x > PI {
        x -= 2.0 * PI;
    }
    x
}
