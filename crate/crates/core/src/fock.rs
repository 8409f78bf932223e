//! Truncated Fock-space operator algebra, state constructors and scalar
//! observables for a single bosonic mode.
//!
//! All matrices are dense `dim × dim` complex matrices in the number basis
//! `|0⟩, |1⟩, …, |dim−1⟩`. Sparsity is only exploited at the superoperator
//! level (see [`crate::liouvillian`]).

use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use thiserror::Error;

/// Tail weight of a truncated coherent state above which a warning is logged.
pub const COHERENT_TAIL_WARN: f64 = 1e-6;

/// Steady-state occupation of the top Fock level above which the truncation
/// is reported as inadequate.
pub const TRUNCATION_TAIL_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("invalid Fock dimension {0} (need at least 2)")]
    InvalidDimension(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: &'static str, reason: String },
}

/// Physical rates of the cavity plus the Fock truncation.
///
/// `delta` is the detuning, `kappa` single-photon loss, `gain` linear
/// (incoherent) gain, `eta` two-photon loss and `eps` the coherent drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub delta: f64,
    pub kappa: f64,
    pub gain: f64,
    pub eta: f64,
    pub eps: C64,
    pub dim: usize,
}

impl SystemParams {
    pub fn new(delta: f64, kappa: f64, gain: f64, eta: f64, eps: C64, dim: usize) -> Result<Self, FockError> {
        let p = Self { delta, kappa, gain, eta, eps, dim };
        p.validate()?;
        Ok(p)
    }

    /// Rates used throughout the time-crystal figures: Δ = 10, κ = 0.1, g = 1,
    /// with a real drive set from the rescaled strength `ε√η`.
    ///
    /// The truncation is chosen by [`default_dim`].
    pub fn time_crystal(eta: f64, eps_scaled: f64) -> Self {
        let mut p = Self { delta: 10.0, kappa: 0.1, gain: 1.0, eta, eps: C64::new(0.0, 0.0), dim: 2 };
        p = p.with_eps_scaled(eps_scaled);
        p.dim = default_dim(&p).unwrap_or(2);
        p
    }

    pub fn validate(&self) -> Result<(), FockError> {
        let nonneg = |key: &'static str, v: f64| {
            if !v.is_finite() || v < 0.0 {
                Err(FockError::InvalidParameter { key, reason: format!("must be a finite value >= 0, got {v}") })
            } else {
                Ok(())
            }
        };
        if !self.delta.is_finite() {
            return Err(FockError::InvalidParameter { key: "delta", reason: "must be finite".into() });
        }
        nonneg("kappa", self.kappa)?;
        nonneg("gain", self.gain)?;
        nonneg("eta", self.eta)?;
        if !(self.eps.re.is_finite() && self.eps.im.is_finite()) {
            return Err(FockError::InvalidParameter { key: "eps", reason: "must be finite".into() });
        }
        if self.dim < 2 {
            return Err(FockError::InvalidDimension(self.dim));
        }
        Ok(())
    }

    /// Rescaled drive `|ε|·√η`; `None` when `η = 0`.
    pub fn eps_scaled(&self) -> Option<f64> {
        (self.eta > 0.0).then(|| self.eps.norm() * self.eta.sqrt())
    }

    /// Sets a real drive `ε = eps_scaled/√η`. With `η = 0` the drive is zero.
    pub fn with_eps_scaled(mut self, eps_scaled: f64) -> Self {
        let eps = if self.eta > 0.0 { eps_scaled / self.eta.sqrt() } else { 0.0 };
        self.eps = C64::new(eps, 0.0);
        self
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    /// Net linear amplification `(g − κ)/2`.
    pub fn net_gain(&self) -> f64 {
        0.5 * (self.gain - self.kappa)
    }
}

/// Truncation heuristic `ceil(3·n̄ + 20)`.
///
/// `n̄` is the larger of the limit-cycle occupation `(g−κ)/(2η)` and the
/// occupation of the stable classical fixed point. Without two-photon loss
/// and with net loss the thermal occupation `g/(κ−g)` replaces the cycle
/// term. Returns `None` when no finite occupation scale exists (η = 0 with
/// net gain).
pub fn default_dim(p: &SystemParams) -> Option<usize> {
    let a = p.net_gain();
    let cycle = if p.eta > 0.0 {
        (a / p.eta).max(0.0)
    } else if a < 0.0 {
        p.gain / (p.kappa - p.gain)
    } else {
        return None;
    };
    let fixed = crate::classical::fixed_point_occupation(p).unwrap_or(0.0);
    let n_est = cycle.max(fixed);
    Some((3.0 * n_est + 20.0).ceil() as usize)
}

/// Dense `dim × dim` operator in the Fock basis.
#[derive(Debug, Clone)]
pub struct Operator {
    mat: Mat<C64>,
}

impl Operator {
    pub fn from_mat(mat: Mat<C64>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "operators are square");
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &Mat<C64> {
        &self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint().to_owned() }
    }

    pub fn matmul(&self, rhs: &Operator) -> Self {
        Self { mat: &self.mat * &rhs.mat }
    }

    /// `self·ket`.
    pub fn apply(&self, ket: &[C64]) -> Vec<C64> {
        let d = self.dim();
        assert_eq!(ket.len(), d);
        (0..d).map(|i| (0..d).map(|j| self.mat[(i, j)] * ket[j]).sum()).collect()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.mat)
    }
}

/// Annihilation operator: `⟨n−1|a|n⟩ = √n`.
pub fn annihilation(dim: usize) -> Result<Operator, FockError> {
    check_dim(dim)?;
    let mut m = Mat::<C64>::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(Operator::from_mat(m))
}

/// Creation operator, the adjoint of [`annihilation`]. `a†|dim−1⟩ = 0`.
pub fn creation(dim: usize) -> Result<Operator, FockError> {
    Ok(annihilation(dim)?.adjoint())
}

/// Number operator `a†a`, with exact integer diagonal.
pub fn number(dim: usize) -> Result<Operator, FockError> {
    check_dim(dim)?;
    Ok(Operator::from_mat(Mat::from_fn(dim, dim, |i, j| if i == j { C64::new(i as f64, 0.0) } else { C64::new(0.0, 0.0) })))
}

/// Two-photon annihilation `a²`.
pub fn a_squared(dim: usize) -> Result<Operator, FockError> {
    let a = annihilation(dim)?;
    Ok(a.matmul(&a))
}

pub fn identity(dim: usize) -> Result<Operator, FockError> {
    check_dim(dim)?;
    Ok(Operator::from_mat(Mat::identity(dim, dim)))
}

/// Drive Hamiltonian in the frame rotating with the drive:
/// `H = −Δ a†a + ε a† + ε* a`.
pub fn hamiltonian(p: &SystemParams) -> Result<Operator, FockError> {
    let n = number(p.dim)?;
    let ad = creation(p.dim)?;
    let a = annihilation(p.dim)?;
    let mat = Mat::from_fn(p.dim, p.dim, |i, j| {
        -p.delta * n.get(i, j) + p.eps * ad.get(i, j) + p.eps.conj() * a.get(i, j)
    });
    Ok(Operator::from_mat(mat))
}

/// Amplitudes of the coherent state `|α⟩` on the truncated basis, before
/// renormalization, together with the probability weight lost above
/// `dim − 1`.
pub fn coherent_amplitudes(alpha: C64, dim: usize) -> (Vec<C64>, f64) {
    let mut amps = Vec::with_capacity(dim);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    let mut kept = 0.0;
    for n in 0..dim {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        kept += c.norm_sqr();
        amps.push(c);
    }
    (amps, (1.0 - kept).max(0.0))
}

/// Normalized coherent ket on the truncated space plus its truncation tail
/// weight.
pub fn coherent_ket(alpha: C64, dim: usize) -> Result<(Vec<C64>, f64), FockError> {
    check_dim(dim)?;
    let (mut amps, tail) = coherent_amplitudes(alpha, dim);
    let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in amps.iter_mut() {
        *c /= norm;
    }
    if tail > COHERENT_TAIL_WARN {
        log::warn!("coherent state |{alpha}⟩ loses weight {tail:.3e} to truncation at dim={dim}");
    }
    Ok((amps, tail))
}

/// Projector onto the (renormalized) truncated coherent state `|α⟩`.
pub fn coherent_state(alpha: C64, dim: usize) -> Result<DensityMatrix, FockError> {
    let (ket, _) = coherent_ket(alpha, dim)?;
    Ok(DensityMatrix::pure(&ket))
}

/// Fock state `|n⟩⟨n|`.
pub fn fock_state(n: usize, dim: usize) -> Result<DensityMatrix, FockError> {
    check_dim(dim)?;
    if n >= dim {
        return Err(FockError::InvalidParameter { key: "n", reason: format!("level {n} outside dim {dim}") });
    }
    let mut m = Mat::<C64>::zeros(dim, dim);
    m[(n, n)] = C64::new(1.0, 0.0);
    Ok(DensityMatrix::from_mat_unchecked(m))
}

pub fn vacuum(dim: usize) -> Result<DensityMatrix, FockError> {
    fock_state(0, dim)
}

/// State of the cavity mode. Construction does not enforce physicality;
/// use [`validate_density`] to check it and [`hermitize`] to clean up
/// numerical drift.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: Mat<C64>,
}

impl DensityMatrix {
    pub fn from_mat_unchecked(mat: Mat<C64>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "density matrices are square");
        Self { mat }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(ket: &[C64]) -> Self {
        let d = ket.len();
        Self { mat: Mat::from_fn(d, d, |i, j| ket[i] * ket[j].conj()) }
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(probs: &[f64]) -> Self {
        let d = probs.len();
        let mut mat = Mat::<C64>::zeros(d, d);
        for (n, &p) in probs.iter().enumerate() {
            mat[(n, n)] = C64::new(p, 0.0);
        }
        Self { mat }
    }

    /// Reshapes a column-stacked vector `vec(ρ)` (entry `i + j·dim` holds
    /// `ρ[i][j]`).
    pub fn from_column_stacked(v: &[C64], dim: usize) -> Self {
        assert_eq!(v.len(), dim * dim);
        Self { mat: Mat::from_fn(dim, dim, |i, j| v[i + j * dim]) }
    }

    pub fn to_column_stacked(&self) -> Vec<C64> {
        let d = self.dim();
        let mut v = Vec::with_capacity(d * d);
        for j in 0..d {
            for i in 0..d {
                v.push(self.mat[(i, j)]);
            }
        }
        v
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &Mat<C64> {
        &self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.mat)
    }

    /// Largest entrywise modulus of `ρ − ρ†`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut err: f64 = 0.0;
        for i in 0..d {
            for j in 0..=i {
                err = err.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        err
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = hermitian_part(&self.mat);
        h.self_adjoint_eigenvalues(Side::Lower).expect("Hermitian eigensolve converges")
    }
}

fn hermitian_part(m: &Mat<C64>) -> Mat<C64> {
    let d = m.nrows();
    Mat::from_fn(d, d, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()))
}

fn max_abs(m: &Mat<C64>) -> f64 {
    let mut best: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

fn check_dim(dim: usize) -> Result<(), FockError> {
    if dim < 2 {
        Err(FockError::InvalidDimension(dim))
    } else {
        Ok(())
    }
}

fn check_same(expected: usize, got: usize) -> Result<(), FockError> {
    if expected != got {
        Err(FockError::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}

/// `Tr(ρ·op)`.
pub fn expectation(op: &Operator, rho: &DensityMatrix) -> Result<C64, FockError> {
    check_same(op.dim(), rho.dim())?;
    let d = op.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            acc += rho.mat[(i, k)] * op.mat[(k, i)];
        }
    }
    Ok(acc)
}

/// `⟨a⟩`, computed from the superdiagonal of ρ.
pub fn mean_amplitude(rho: &DensityMatrix) -> C64 {
    (1..rho.dim()).map(|n| (n as f64).sqrt() * rho.mat[(n, n - 1)]).sum()
}

/// `⟨a†a⟩`.
pub fn photon_number(rho: &DensityMatrix) -> f64 {
    (0..rho.dim()).map(|n| n as f64 * rho.mat[(n, n)].re).sum()
}

/// `⟨(a†a)²⟩ − ⟨a†a⟩²`.
pub fn photon_var(rho: &DensityMatrix) -> f64 {
    let mean = photon_number(rho);
    let second: f64 = (0..rho.dim()).map(|n| (n * n) as f64 * rho.mat[(n, n)].re).sum();
    second - mean * mean
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    // Tr ρ² = Σ_ij ρ_ij ρ_ji; for Hermitian ρ this is the squared Frobenius norm.
    let d = rho.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += rho.mat[(i, j)] * rho.mat[(j, i)];
        }
    }
    acc.re
}

/// Fock populations `p(n) = ρ_nn`.
pub fn photon_distribution(rho: &DensityMatrix) -> Vec<f64> {
    (0..rho.dim()).map(|n| rho.mat[(n, n)].re).collect()
}

/// `(ρ + ρ†)/2` renormalized to unit trace.
pub fn hermitize(rho: &DensityMatrix) -> DensityMatrix {
    let mut mat = hermitian_part(&rho.mat);
    let tr: f64 = (0..mat.nrows()).map(|i| mat[(i, i)].re).sum();
    if tr != 0.0 && tr.is_finite() {
        for j in 0..mat.ncols() {
            for i in 0..mat.nrows() {
                mat[(i, j)] /= tr;
            }
        }
    }
    DensityMatrix { mat }
}

/// Tolerances of [`validate_density`].
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityDiagnostics {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub trace_flag: bool,
    pub hermiticity_flag: bool,
    pub positivity_flag: bool,
}

impl DensityDiagnostics {
    pub fn is_valid(&self) -> bool {
        !(self.trace_flag || self.hermiticity_flag || self.positivity_flag)
    }
}

pub fn validate_density(rho: &DensityMatrix) -> DensityDiagnostics {
    let trace_error = (rho.trace() - C64::new(1.0, 0.0)).norm();
    let hermiticity_error = rho.hermiticity_error();
    let min_eigenvalue = rho.eigenvalues().first().copied().unwrap_or(f64::NAN);
    DensityDiagnostics {
        trace_error,
        hermiticity_error,
        min_eigenvalue,
        trace_flag: !(trace_error < TRACE_TOL),
        hermiticity_flag: !(hermiticity_error < HERMITICITY_TOL),
        positivity_flag: !(min_eigenvalue >= -POSITIVITY_TOL),
    }
}

/// Post-hoc truncation check: the top Fock level must stay essentially
/// empty. Returns the top-level population and, when it exceeds
/// [`TRUNCATION_TAIL_TOL`], a suggested larger dimension.
pub fn truncation_check(rho: &DensityMatrix) -> (f64, Option<usize>) {
    let d = rho.dim();
    let top = rho.mat[(d - 1, d - 1)].re;
    if top > TRUNCATION_TAIL_TOL {
        let suggested = (d as f64 * 1.5).ceil() as usize;
        log::warn!("top Fock level population {top:.3e} exceeds {TRUNCATION_TAIL_TOL:.0e}; try dim >= {suggested}");
        (top, Some(suggested))
    } else {
        (top, None)
    }
}
