//! Dormand–Prince 5(4) integrator with PI step-size control for complex
//! state vectors.

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h0: Option<f64>,
    pub h_max: f64,
    /// Steps smaller than `h_min·max(1, |t|)` abort the integration.
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, h0: None, h_max: f64::INFINITY, h_min: 1e-14, max_steps: 50_000_000 }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t={t} (h={h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget exhausted at t={t}")]
    MaxSteps { t: f64 },
    #[error("non-finite state at t={t}")]
    NonFinite { t: f64 },
    #[error("output times must be non-decreasing and start at or after t0 (got {0})")]
    BadGrid(f64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

// Dormand–Prince coefficients
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// 5th-order minus embedded 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - BETA * 0.75;

/// Stateful integrator for `y' = f(t, y)`.
pub struct Dopri5<F> {
    rhs: F,
    t: f64,
    y: Vec<C64>,
    k: [Vec<C64>; 7],
    y_stage: Vec<C64>,
    y_new: Vec<C64>,
    h: f64,
    err_prev: f64,
    fsal_valid: bool,
    opts: OdeOptions,
    stats: OdeStats,
}

impl<F> Dopri5<F>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    pub fn new(rhs: F, t0: f64, y0: &[C64], opts: OdeOptions) -> Self {
        let n = y0.len();
        let z = || vec![C64::new(0.0, 0.0); n];
        Self {
            rhs,
            t: t0,
            y: y0.to_vec(),
            k: [z(), z(), z(), z(), z(), z(), z()],
            y_stage: z(),
            y_new: z(),
            h: opts.h0.unwrap_or(0.0),
            err_prev: 1e-4,
            fsal_valid: false,
            opts,
            stats: OdeStats::default(),
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[C64] {
        &self.y
    }

    /// Mutable access to the state; the cached derivative is invalidated.
    pub fn state_mut(&mut self) -> &mut [C64] {
        self.fsal_valid = false;
        &mut self.y
    }

    pub fn stats(&self) -> OdeStats {
        self.stats
    }

    fn eval(&mut self, t: f64, stage: usize, from_stage: bool) {
        let src = if from_stage { &self.y_stage } else { &self.y };
        (self.rhs)(t, src, &mut self.k[stage]);
        self.stats.evaluations += 1;
    }

    fn error_norm(&self, err: impl Iterator<Item = C64>) -> f64 {
        let n = self.y.len().max(1);
        let sum: f64 = err
            .zip(self.y.iter().zip(&self.y_new))
            .map(|(e, (a, b))| {
                let sc = self.opts.atol + self.opts.rtol * a.norm().max(b.norm());
                (e.norm() / sc).powi(2)
            })
            .sum();
        (sum / n as f64).sqrt()
    }

    fn initial_step(&mut self, direction_span: f64) -> f64 {
        // Hairer–Wanner starting step heuristic
        let n = self.y.len().max(1) as f64;
        let (atol, rtol) = (self.opts.atol, self.opts.rtol);
        let scale = move |v: &C64, y: &C64| v.norm() / (atol + rtol * y.norm());
        let d0 = (self.y.iter().map(|y| scale(y, y).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (self.k[0].iter().zip(&self.y).map(|(f, y)| scale(f, y).powi(2)).sum::<f64>() / n).sqrt();
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(direction_span).min(self.opts.h_max);
        for i in 0..self.y.len() {
            self.y_stage[i] = self.y[i] + h0 * self.k[0][i];
        }
        let t1 = self.t + h0;
        self.eval(t1, 1, true);
        let d2 = (self.k[1].iter().zip(&self.k[0]).zip(&self.y).map(|((a, b), y)| scale(&(a - b), y).powi(2)).sum::<f64>() / n).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1).min(direction_span).min(self.opts.h_max)
    }

    /// Advances exactly to `t_end` with as many adaptive steps as needed.
    /// `after_step` runs on the state after every accepted step.
    pub fn advance_to<P>(&mut self, t_end: f64, mut after_step: P) -> Result<(), OdeError>
    where
        P: FnMut(f64, &mut [C64]) -> bool,
    {
        if t_end < self.t {
            return Err(OdeError::BadGrid(t_end));
        }
        let n = self.y.len();
        while self.t < t_end {
            if !self.fsal_valid {
                let t = self.t;
                self.eval(t, 0, false);
                self.fsal_valid = true;
            }
            if self.h <= 0.0 {
                self.h = self.initial_step(t_end - self.t);
            }
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                return Err(OdeError::MaxSteps { t: self.t });
            }
            let remaining = t_end - self.t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h.min(self.opts.h_max) };
            if h < self.opts.h_min * self.t.abs().max(1.0) && !last {
                return Err(OdeError::StepUnderflow { t: self.t, h });
            }
            let t = self.t;
            let stages: [(f64, &[f64]); 5] = [
                (C2, &[A21]),
                (C3, &[A31, A32]),
                (C4, &[A41, A42, A43]),
                (C5, &[A51, A52, A53, A54]),
                (1.0, &[A61, A62, A63, A64, A65]),
            ];
            for (s, (c, a)) in stages.iter().enumerate() {
                for i in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for (j, aj) in a.iter().enumerate() {
                        acc += *aj * self.k[j][i];
                    }
                    self.y_stage[i] = self.y[i] + h * acc;
                }
                self.eval(t + c * h, s + 1, true);
            }
            for i in 0..n {
                self.y_new[i] = self.y[i]
                    + h * (A71 * self.k[0][i] + A73 * self.k[2][i] + A74 * self.k[3][i] + A75 * self.k[4][i] + A76 * self.k[5][i]);
            }
            std::mem::swap(&mut self.y_stage, &mut self.y_new);
            self.eval(t + h, 6, true);
            std::mem::swap(&mut self.y_stage, &mut self.y_new);

            let k = &self.k;
            let err_iter = (0..n).map(|i| {
                h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i])
            });
            let err = self.error_norm(err_iter);
            if !err.is_finite() {
                if self.y_new.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) && h <= self.opts.h_min {
                    return Err(OdeError::NonFinite { t });
                }
                self.h = h * FAC_MIN;
                self.stats.rejected += 1;
                continue;
            }
            if err <= 1.0 {
                let err_c = err.max(1e-10);
                let fac = (SAFETY * err_c.powf(-ALPHA) * self.err_prev.powf(BETA)).clamp(FAC_MIN, FAC_MAX);
                self.err_prev = err_c;
                std::mem::swap(&mut self.y, &mut self.y_new);
                self.k.swap(0, 6);
                self.t = if last { t_end } else { t + h };
                self.stats.accepted += 1;
                if after_step(self.t, &mut self.y) {
                    self.fsal_valid = false;
                }
                // keep the controller's proposal unless the step was clipped
                if !last || fac < 1.0 {
                    self.h = h * fac;
                }
            } else {
                let fac = (SAFETY * err.powf(-ALPHA)).clamp(FAC_MIN, 1.0);
                self.h = h * fac;
                self.stats.rejected += 1;
            }
        }
        Ok(())
    }
}

/// Integrates and returns the state at each time in `t_grid` (the first
/// entry is the initial time).
pub fn solve<F>(rhs: F, t_grid: &[f64], y0: &[C64], opts: OdeOptions) -> Result<Vec<Vec<C64>>, OdeError>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let Some(&t0) = t_grid.first() else {
        return Ok(Vec::new());
    };
    let mut solver = Dopri5::new(rhs, t0, y0, opts);
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        solver.advance_to(t, |_, _| false)?;
        out.push(solver.state().to_vec());
    }
    Ok(out)
}
