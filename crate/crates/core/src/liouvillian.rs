//! Lindblad generator of the cavity,
//!
//! `dρ/dt = i[ρ, H] + κ D[a]ρ + g D[a†]ρ + η D[a²]ρ`,
//! `D[o]ρ = oρo† − (o†oρ + ρo†o)/2`,
//!
//! as a matrix-free action ([`apply`]) and as an assembled sparse
//! superoperator ([`build_superoperator`]).
//!
//! Vectorization is column stacking: entry `i + j·dim` of `vec(ρ)` is
//! `ρ[i][j]`, so `vec(AXB) = (Bᵀ ⊗ A) vec(X)` and `L·vec(ρ) = vec(dρ/dt)`.
//! The truncated `a†` is used as-is; the top Fock level simply cannot be
//! pumped further, which keeps the generator in Lindblad form.

use faer::Mat;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::fock::{self, DensityMatrix, FockError, Operator, SystemParams};
use crate::sparse::{self, CsrMatrix};

/// Largest Fock dimension for which dense materialization is allowed.
pub const DENSE_DIM_LIMIT: usize = 80;

/// Default cap on stored superoperator entries.
pub const DEFAULT_NNZ_BUDGET: usize = 50_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiouvillianError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("superoperator for dim={dim} needs ~{needed} entries, over the budget of {budget}; use the matrix-free `apply` with an iterative solver")]
    MemoryBudget { dim: usize, needed: usize, budget: usize },
    #[error("dense materialization limited to dim <= {limit}, got {dim}; use `rightmost_eigenvalues`")]
    DenseTooLarge { dim: usize, limit: usize },
    #[error("sector decomposition requires eps = 0 exactly, got {0}")]
    SectorUnavailable(C64),
}

/// Per-level coefficients shared by the matrix-free action.
struct Rates {
    dim: usize,
    sqrt_n: Vec<f64>,
    // √((n+1)(n+2)) for the two-photon jump
    sqrt_pair: Vec<f64>,
    // diagonal of κ a†a + g a a† + η a†²a² (truncated)
    decay_diag: Vec<f64>,
}

impl Rates {
    fn new(p: &SystemParams) -> Self {
        let d = p.dim;
        let sqrt_n = (0..=d).map(|n| (n as f64).sqrt()).collect();
        let sqrt_pair = (0..d).map(|n| (((n + 1) * (n + 2)) as f64).sqrt()).collect();
        let decay_diag = (0..d)
            .map(|n| {
                let nf = n as f64;
                let pumped = if n + 1 < d { nf + 1.0 } else { 0.0 };
                p.kappa * nf + p.gain * pumped + p.eta * nf * (nf - 1.0)
            })
            .collect();
        Self { dim: d, sqrt_n, sqrt_pair, decay_diag }
    }
}

/// Matrix-free Lindblad action. Cost is `O(dim²)`.
pub fn apply(p: &SystemParams, rho: &DensityMatrix) -> Result<DensityMatrix, LiouvillianError> {
    p.validate()?;
    if rho.dim() != p.dim {
        return Err(FockError::DimensionMismatch { expected: p.dim, got: rho.dim() }.into());
    }
    let d = p.dim;
    let src = rho.mat();
    let mut out = Mat::<C64>::zeros(d, d);
    apply_into(p, &Rates::new(p), |i, j| src[(i, j)], |i, j, v| out[(i, j)] = v);
    debug_assert_eq!(out.nrows(), d);
    Ok(DensityMatrix::from_mat_unchecked(out))
}

/// Matrix-free action on a column-stacked vector.
pub fn apply_vec(p: &SystemParams, v: &[C64], out: &mut [C64]) {
    let d = p.dim;
    assert_eq!(v.len(), d * d);
    assert_eq!(out.len(), d * d);
    apply_into(p, &Rates::new(p), |i, j| v[i + j * d], |i, j, x| out[i + j * d] = x);
}

/// Reusable matrix-free generator for repeated application (time stepping).
pub struct Generator {
    params: SystemParams,
    rates: Rates,
}

impl Generator {
    pub fn new(p: &SystemParams) -> Result<Self, LiouvillianError> {
        p.validate()?;
        Ok(Self { params: *p, rates: Rates::new(p) })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// `out = L·vec(ρ)` for column-stacked `v`.
    pub fn apply_vec(&self, v: &[C64], out: &mut [C64]) {
        let d = self.params.dim;
        apply_into(&self.params, &self.rates, |i, j| v[i + j * d], |i, j, x| out[i + j * d] = x);
    }
}

#[inline(always)]
fn apply_into<R, W>(p: &SystemParams, rates: &Rates, rho: R, mut write: W)
where
    R: Fn(usize, usize) -> C64,
    W: FnMut(usize, usize, C64),
{
    let d = rates.dim;
    let s = &rates.sqrt_n;
    let i_unit = C64::new(0.0, 1.0);
    let eps = p.eps;
    let eps_c = p.eps.conj();
    for n in 0..d {
        for m in 0..d {
            let r = rho(m, n);
            // (ρH − Hρ)_mn with H = −Δ a†a + ε a† + ε* a
            let mut comm = C64::new(p.delta * (m as f64 - n as f64), 0.0) * r;
            if n > 0 {
                comm += eps_c * s[n] * rho(m, n - 1);
            }
            if n + 1 < d {
                comm += eps * s[n + 1] * rho(m, n + 1);
            }
            if m > 0 {
                comm -= eps * s[m] * rho(m - 1, n);
            }
            if m + 1 < d {
                comm -= eps_c * s[m + 1] * rho(m + 1, n);
            }
            let mut acc = i_unit * comm;
            acc -= 0.5 * (rates.decay_diag[m] + rates.decay_diag[n]) * r;
            if m + 1 < d && n + 1 < d {
                acc += p.kappa * s[m + 1] * s[n + 1] * rho(m + 1, n + 1);
            }
            if m > 0 && n > 0 {
                acc += p.gain * s[m] * s[n] * rho(m - 1, n - 1);
            }
            if m + 2 < d && n + 2 < d {
                acc += p.eta * rates.sqrt_pair[m] * rates.sqrt_pair[n] * rho(m + 2, n + 2);
            }
            write(m, n, acc);
        }
    }
}

/// Assembled Lindblad superoperator (column-stacking convention).
#[derive(Debug, Clone)]
pub struct Superoperator {
    params: SystemParams,
    matrix: CsrMatrix,
}

impl Superoperator {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn dim_fock(&self) -> usize {
        self.params.dim
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// `L·vec(ρ)` through the stored matrix.
    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let v = self.matrix.matvec(&rho.to_column_stacked());
        DensityMatrix::from_column_stacked(&v, self.params.dim)
    }

    /// Dense copy, limited to `dim <= DENSE_DIM_LIMIT`.
    pub fn to_dense(&self) -> Result<Mat<C64>, LiouvillianError> {
        self.to_dense_with_limit(DENSE_DIM_LIMIT)
    }

    pub fn to_dense_with_limit(&self, limit: usize) -> Result<Mat<C64>, LiouvillianError> {
        if self.params.dim > limit {
            return Err(LiouvillianError::DenseTooLarge { dim: self.params.dim, limit });
        }
        Ok(self.matrix.to_dense())
    }
}

fn to_csr(op: &Operator) -> CsrMatrix {
    sparse::dense_to_csr(op.mat())
}

fn transpose(op: &Operator) -> Operator {
    Operator::from_mat(op.mat().transpose().to_owned())
}

fn conjugate(op: &Operator) -> Operator {
    Operator::from_mat(op.mat().conjugate().to_owned())
}

/// Builds `L = −i(I⊗H − Hᵀ⊗I) + Σ_c [c̄⊗c − ½ I⊗c†c − ½ (c†c)ᵀ⊗I]` over
/// `c ∈ {√κ a, √g a†, √η a²}` from explicit Kronecker products.
pub fn build_superoperator(p: &SystemParams) -> Result<Superoperator, LiouvillianError> {
    build_superoperator_with_budget(p, DEFAULT_NNZ_BUDGET)
}

pub fn build_superoperator_with_budget(p: &SystemParams, nnz_budget: usize) -> Result<Superoperator, LiouvillianError> {
    p.validate()?;
    let d = p.dim;
    // diagonal + ≤ 4 drive terms + 3 jump terms per entry of vec(ρ)
    let needed = 8 * d * d;
    if needed > nnz_budget {
        return Err(LiouvillianError::MemoryBudget { dim: d, needed, budget: nnz_budget });
    }
    let id = to_csr(&fock::identity(d)?);
    let h = fock::hamiltonian(p)?;
    let minus_i = C64::new(0.0, -1.0);
    let i_unit = C64::new(0.0, 1.0);
    let i_h = sparse::kron(&id, &to_csr(&h));
    let ht_i = sparse::kron(&to_csr(&transpose(&h)), &id);
    let mut terms_owned: Vec<(C64, CsrMatrix)> = vec![(minus_i, i_h), (i_unit, ht_i)];

    let jumps = [
        (p.kappa, fock::annihilation(d)?),
        (p.gain, fock::creation(d)?),
        (p.eta, fock::a_squared(d)?),
    ];
    for (rate, c) in jumps {
        if rate == 0.0 {
            continue;
        }
        let cdc = c.adjoint().matmul(&c);
        let r = C64::new(rate, 0.0);
        terms_owned.push((r, sparse::kron(&to_csr(&conjugate(&c)), &to_csr(&c))));
        terms_owned.push((-0.5 * r, sparse::kron(&id, &to_csr(&cdc))));
        terms_owned.push((-0.5 * r, sparse::kron(&to_csr(&transpose(&cdc)), &id)));
    }
    let terms: Vec<(C64, &CsrMatrix)> = terms_owned.iter().map(|(c, m)| (*c, m)).collect();
    let matrix = sparse::linear_combination(&terms);
    Ok(Superoperator { params: *p, matrix })
}

/// Block of the ε = 0 generator acting on the `m`-th diagonal of ρ.
///
/// For `m >= 0` the block acts on `ρ[n][n+m]`, for `m < 0` on
/// `ρ[n+|m|][n]`, with `n = 0..dim−|m|`.
#[derive(Debug, Clone)]
pub struct SectorBlock {
    pub m: isize,
    pub matrix: Mat<C64>,
}

impl SectorBlock {
    /// Fock index pair `(row, col)` of the block's `k`-th coordinate.
    pub fn element(&self, k: usize) -> (usize, usize) {
        sector_element(self.m, k)
    }
}

fn sector_element(m: isize, k: usize) -> (usize, usize) {
    if m >= 0 {
        (k, k + m as usize)
    } else {
        (k + m.unsigned_abs(), k)
    }
}

/// Splits the undriven generator into `2·dim − 1` independent coherence
/// sectors. Block entries are read off the matrix-free action.
pub fn sector_blocks(p: &SystemParams) -> Result<Vec<SectorBlock>, LiouvillianError> {
    p.validate()?;
    if p.eps != C64::new(0.0, 0.0) {
        return Err(LiouvillianError::SectorUnavailable(p.eps));
    }
    let d = p.dim as isize;
    (-(d - 1)..d).map(|m| sector_block(p, m)).collect()
}

pub fn sector_block(p: &SystemParams, m: isize) -> Result<SectorBlock, LiouvillianError> {
    if p.eps != C64::new(0.0, 0.0) {
        return Err(LiouvillianError::SectorUnavailable(p.eps));
    }
    let d = p.dim;
    let size = d - m.unsigned_abs();
    let rates = Rates::new(p);
    let mut matrix = Mat::<C64>::zeros(size, size);
    for col in 0..size {
        let (ci, cj) = sector_element(m, col);
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        apply_into(
            p,
            &rates,
            |i, j| if (i, j) == (ci, cj) { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) },
            |i, j, v| out[i + j * d] = v,
        );
        for row in 0..size {
            let (ri, rj) = sector_element(m, row);
            matrix[(row, col)] = out[ri + rj * d];
        }
    }
    Ok(SectorBlock { m, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fock_state, vacuum};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let mut m = Mat::<C64>::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..=i {
                let v = C64::new(rng.random::<f64>() - 0.5, if i == j { 0.0 } else { rng.random::<f64>() - 0.5 });
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        DensityMatrix::from_mat_unchecked(m)
    }

    fn random_params(dim: usize, rng: &mut ChaCha8Rng) -> SystemParams {
        SystemParams::new(
            rng.random_range(-10.0..10.0),
            rng.random_range(0.0..1.0),
            rng.random_range(0.0..1.0),
            rng.random_range(0.0..0.3),
            C64::new(rng.random_range(0.0..2.0), rng.random_range(-1.0..1.0)),
            dim,
        )
        .unwrap()
    }

    #[test]
    fn vacuum_is_dark_under_pure_damping() {
        let p = SystemParams::new(3.0, 0.7, 0.0, 0.0, C64::new(0.0, 0.0), 5).unwrap();
        let out = apply(&p, &vacuum(5).unwrap()).unwrap();
        assert_eq!(out.max_abs(), 0.0);
    }

    #[test]
    fn single_photon_decay() {
        let kappa = 0.3;
        let p = SystemParams::new(0.0, kappa, 0.0, 0.0, C64::new(0.0, 0.0), 4).unwrap();
        let out = apply(&p, &fock_state(1, 4).unwrap()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = match (i, j) {
                    (0, 0) => kappa,
                    (1, 1) => -kappa,
                    _ => 0.0,
                };
                assert!((out.get(i, j) - C64::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn matrix_and_matrix_free_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = random_params(12, &mut rng);
        let l = build_superoperator(&p).unwrap();
        for _ in 0..20 {
            let rho = random_hermitian(12, &mut rng);
            let a = apply(&p, &rho).unwrap();
            let b = l.apply(&rho);
            let mut dev: f64 = 0.0;
            for i in 0..12 {
                for j in 0..12 {
                    dev = dev.max((a.get(i, j) - b.get(i, j)).norm());
                }
            }
            assert!(dev < 1e-12, "deviation {dev}");
        }
    }

    #[test]
    fn trace_and_hermiticity_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dim in [2, 3, 9, 16] {
            let p = random_params(dim, &mut rng);
            let rho = random_hermitian(dim, &mut rng);
            let out = apply(&p, &rho).unwrap();
            assert!(out.trace().norm() < 1e-12 * rho.max_abs().max(1.0) * dim as f64);
            assert!(out.hermiticity_error() < 1e-12);
        }
    }

    #[test]
    fn column_stacking_layout() {
        // κ D[a] moves ρ[1][1] into ρ[0][0]; with column stacking the entry
        // for ρ[i][j] sits at i + j·dim.
        let p = SystemParams::new(0.0, 1.0, 0.0, 0.0, C64::new(0.0, 0.0), 3).unwrap();
        let l = build_superoperator(&p).unwrap();
        assert_eq!(l.matrix().get(0, 4), C64::new(1.0, 0.0));
        // ρ[0][1] decays at κ/2
        assert_eq!(l.matrix().get(3, 3), C64::new(-0.5, 0.0));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = SystemParams::new(0.0, 1.0, 0.0, 0.0, C64::new(0.0, 0.0), 3).unwrap();
        let err = apply(&p, &vacuum(4).unwrap()).unwrap_err();
        assert_eq!(err, LiouvillianError::Fock(FockError::DimensionMismatch { expected: 3, got: 4 }));
    }

    #[test]
    fn budget_and_dense_limits() {
        let p = SystemParams::new(0.0, 1.0, 0.0, 0.0, C64::new(0.0, 0.0), 30).unwrap();
        assert!(matches!(
            build_superoperator_with_budget(&p, 100),
            Err(LiouvillianError::MemoryBudget { dim: 30, .. })
        ));
        let l = build_superoperator(&p).unwrap();
        assert!(matches!(l.to_dense_with_limit(20), Err(LiouvillianError::DenseTooLarge { .. })));
    }

    #[test]
    fn sectors_need_zero_drive() {
        let p = SystemParams::new(0.0, 1.0, 0.0, 0.0, C64::new(0.1, 0.0), 3).unwrap();
        assert!(matches!(sector_blocks(&p), Err(LiouvillianError::SectorUnavailable(_))));
    }

    #[test]
    fn sector_blocks_tile_the_generator() {
        let p = SystemParams::new(2.0, 0.2, 0.5, 0.1, C64::new(0.0, 0.0), 6).unwrap();
        let blocks = sector_blocks(&p).unwrap();
        assert_eq!(blocks.len(), 11);
        let l = build_superoperator(&p).unwrap();
        let d = 6;
        let mut covered = 0;
        for b in &blocks {
            let size = b.matrix.nrows();
            covered += size;
            for r in 0..size {
                for c in 0..size {
                    let (ri, rj) = b.element(r);
                    let (ci, cj) = b.element(c);
                    let want = l.matrix().get(ri + rj * d, ci + cj * d);
                    assert!((b.matrix[(r, c)] - want).norm() < 1e-14);
                }
            }
        }
        assert_eq!(covered, d * d);
    }
}
