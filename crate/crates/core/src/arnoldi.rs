//! Thick-restart Arnoldi iteration for the largest-magnitude eigenpairs of a
//! linear operator given as a closure.
//!
//! Restarts keep an orthonormal basis of the wanted Ritz vectors, which
//! spans the same invariant subspace of the projected matrix as the ordered
//! Schur vectors of a Krylov–Schur restart.

use faer::Mat;
use num_complex::Complex64 as C64;
use thiserror::Error;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy)]
pub struct ArnoldiOptions {
    /// Number of wanted eigenpairs.
    pub nev: usize,
    /// Maximum basis size per cycle.
    pub ncv: usize,
    /// Relative residual tolerance `‖Au − θu‖ ≤ tol·|θ|`.
    pub tol: f64,
    pub max_restarts: usize,
}

impl ArnoldiOptions {
    pub fn new(nev: usize) -> Self {
        Self { nev, ncv: (2 * nev + 20).max(30), tol: 1e-12, max_restarts: 300 }
    }
}

#[derive(Debug, Clone)]
pub struct RitzPair {
    pub value: C64,
    pub vector: Vec<C64>,
    pub residual: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArnoldiError {
    #[error("Arnoldi did not converge after {restarts} restarts; relative residuals of wanted pairs: {residuals:?}")]
    NotConverged { restarts: usize, residuals: Vec<f64> },
    #[error("projected eigenproblem failed")]
    ProjectedEigen,
    #[error("starting vector is zero")]
    ZeroStart,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthogonalizes `w` against `basis` with two classical Gram–Schmidt
/// passes, returning the accumulated coefficients.
fn orthogonalize(basis: &[Vec<C64>], w: &mut [C64]) -> Vec<C64> {
    let mut coeffs = vec![ZERO; basis.len()];
    for _ in 0..2 {
        for (c, v) in coeffs.iter_mut().zip(basis) {
            let h = dot(v, w);
            *c += h;
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= h * vi;
            }
        }
    }
    coeffs
}

/// Deterministic pseudo-random unit vector orthogonal to `basis`.
fn fresh_direction(n: usize, basis: &[Vec<C64>], salt: u64) -> Option<Vec<C64>> {
    let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ salt.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut w: Vec<C64> = (0..n).map(|_| C64::new(next(), next())).collect();
    orthogonalize(basis, &mut w);
    let nw = norm(&w);
    if nw < 1e-8 {
        return None;
    }
    w.iter_mut().for_each(|x| *x /= nw);
    Some(w)
}

/// Largest-magnitude eigenpairs of the `n × n` operator `op` (`op(x, y)`
/// writes `A·x` into `y`), sorted by decreasing `|θ|`.
pub fn largest_magnitude<F>(n: usize, mut op: F, start: &[C64], opts: ArnoldiOptions) -> Result<Vec<RitzPair>, ArnoldiError>
where
    F: FnMut(&[C64], &mut [C64]),
{
    assert_eq!(start.len(), n);
    let nev = opts.nev.min(n).max(1);
    let ncv = opts.ncv.max(nev + 2).min(n);

    let s = norm(start);
    if s == 0.0 {
        return Err(ArnoldiError::ZeroStart);
    }
    let mut basis: Vec<Vec<C64>> = vec![start.iter().map(|x| x / s).collect()];
    // (ncv + 1) × ncv projected matrix; row `m` couples to basis[m]
    let mut h = Mat::<C64>::zeros(ncv + 1, ncv);
    let mut kept = 0usize;
    let mut w = vec![ZERO; n];
    let mut last_residuals = Vec::new();

    for restart in 0..=opts.max_restarts {
        let mut m = ncv;
        for j in kept..ncv {
            op(&basis[j], &mut w);
            let coeffs = orthogonalize(&basis, &mut w);
            for (i, c) in coeffs.iter().enumerate() {
                h[(i, j)] = *c;
            }
            let beta = norm(&w);
            let scale = coeffs.iter().map(|c| c.norm()).fold(beta, f64::max);
            if j + 1 == n {
                // full space spanned; the relation is exact
                m = j + 1;
                h[(j + 1, j)] = ZERO;
                basis.push(vec![ZERO; n]);
                break;
            }
            if beta <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
                // invariant subspace found: continue with a fresh direction
                h[(j + 1, j)] = ZERO;
                match fresh_direction(n, &basis, (restart * ncv + j) as u64) {
                    Some(v) => basis.push(v),
                    None => {
                        m = j + 1;
                        basis.push(vec![ZERO; n]);
                        break;
                    }
                }
            } else {
                h[(j + 1, j)] = C64::new(beta, 0.0);
                basis.push(w.iter().map(|x| x / beta).collect());
            }
        }

        let hm = Mat::from_fn(m, m, |i, j| h[(i, j)]);
        let eig = hm.eigen().map_err(|_| ArnoldiError::ProjectedEigen)?;
        let vals: Vec<C64> = (0..m).map(|i| eig.S()[i]).collect();
        let vecs = eig.U();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| vals[b].norm().total_cmp(&vals[a].norm()).then(a.cmp(&b)));

        let ritz_vec = |i: usize| -> Vec<C64> {
            let mut y: Vec<C64> = (0..m).map(|r| vecs[(r, i)]).collect();
            let ny = norm(&y);
            y.iter_mut().for_each(|x| *x /= ny);
            y
        };
        let coupling = |y: &[C64]| -> f64 { (0..m).map(|c| h[(m, c)] * y[c]).sum::<C64>().norm() };

        let mut residuals = Vec::with_capacity(nev);
        let mut converged = true;
        for &i in order.iter().take(nev) {
            let y = ritz_vec(i);
            let rel = coupling(&y) / vals[i].norm().max(f64::MIN_POSITIVE);
            residuals.push(rel);
            if !(rel <= opts.tol) {
                converged = false;
            }
        }
        last_residuals = residuals.clone();

        if converged || m < ncv || restart == opts.max_restarts {
            if !converged && m == ncv {
                return Err(ArnoldiError::NotConverged { restarts: restart, residuals });
            }
            let pairs = order
                .iter()
                .take(nev)
                .zip(&residuals)
                .map(|(&i, &res)| {
                    let y = ritz_vec(i);
                    let mut u = vec![ZERO; n];
                    for (c, yc) in y.iter().enumerate() {
                        for (ui, vi) in u.iter_mut().zip(&basis[c]) {
                            *ui += yc * vi;
                        }
                    }
                    let nu = norm(&u);
                    u.iter_mut().for_each(|x| *x /= nu);
                    RitzPair { value: vals[i], vector: u, residual: res }
                })
                .collect();
            return Ok(pairs);
        }

        // thick restart on the span of the leading Ritz vectors
        let keep = (nev + (ncv - nev) / 2).min(m - 1);
        let mut q: Vec<Vec<C64>> = Vec::with_capacity(keep);
        for &i in order.iter().take(keep) {
            let mut y = ritz_vec(i);
            orthogonalize(&q, &mut y);
            let ny = norm(&y);
            if ny > 1e-8 {
                y.iter_mut().for_each(|x| *x /= ny);
                q.push(y);
            }
        }
        let p = q.len();
        // K = Qᴴ H_m Q, b = h_row·Q
        let mut hq = vec![vec![ZERO; m]; p];
        for (k, qk) in q.iter().enumerate() {
            for r in 0..m {
                hq[k][r] = (0..m).map(|c| h[(r, c)] * qk[c]).sum();
            }
        }
        let mut new_h = Mat::<C64>::zeros(ncv + 1, ncv);
        for a in 0..p {
            for b in 0..p {
                new_h[(a, b)] = dot(&q[a], &hq[b]);
            }
            new_h[(p, a)] = (0..m).map(|c| h[(m, c)] * q[a][c]).sum();
        }
        let mut new_basis = Vec::with_capacity(ncv + 1);
        for qk in &q {
            let mut v = vec![ZERO; n];
            for (c, qc) in qk.iter().enumerate() {
                for (vi, bi) in v.iter_mut().zip(&basis[c]) {
                    *vi += qc * bi;
                }
            }
            new_basis.push(v);
        }
        new_basis.push(basis.swap_remove(m));
        basis = new_basis;
        h = new_h;
        kept = p;
    }
    Err(ArnoldiError::NotConverged { restarts: opts.max_restarts, residuals: last_residuals })
}
