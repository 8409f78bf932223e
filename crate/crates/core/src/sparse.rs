//! Sparse and banded complex matrices backing the superoperator.

use std::io::{self, Write};

use faer::Mat;
use num_complex::Complex64 as C64;
use thiserror::Error;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    /// Assembles from unsorted triplets; duplicates are summed and exact
    /// zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                rows.push(r);
                last = Some((r, c));
            }
        }
        let mut keep_cols = Vec::with_capacity(col_idx.len());
        let mut keep_vals = Vec::with_capacity(values.len());
        for ((r, c), v) in rows.into_iter().zip(col_idx).zip(values) {
            if v != ZERO {
                row_ptr[r + 1] += 1;
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { nrows, ncols, row_ptr, col_idx: keep_cols, values: keep_vals }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(ZERO, |(_, v)| v)
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let mut m = Mat::<C64>::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    /// Lower and upper bandwidths `(kl, ku)`.
    pub fn bandwidths(&self) -> (usize, usize) {
        self.iter().fold((0, 0), |(kl, ku), (r, c, _)| {
            if r >= c {
                (kl.max(r - c), ku)
            } else {
                (kl, ku.max(c - r))
            }
        })
    }

    /// Gershgorin bound on `|Im λ|` over the spectrum.
    pub fn imag_extent_bound(&self) -> f64 {
        (0..self.nrows)
            .map(|r| {
                self.row(r)
                    .map(|(c, v)| if c == r { v.im.abs() } else { v.norm() })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows).map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Coordinate text export, one `row col re im` line per stored entry
    /// (0-based indices).
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# rows={} cols={} nnz={}", self.nrows, self.ncols, self.nnz())?;
        for (r, c, v) in self.iter() {
            writeln!(w, "{r} {c} {:e} {:e}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// Kronecker product `A ⊗ B` of sparse matrices.
pub fn kron(a: &CsrMatrix, b: &CsrMatrix) -> CsrMatrix {
    let mut trip = Vec::with_capacity(a.nnz() * b.nnz());
    for (ra, ca, va) in a.iter() {
        for (rb, cb, vb) in b.iter() {
            trip.push((ra * b.nrows + rb, ca * b.ncols + cb, va * vb));
        }
    }
    CsrMatrix::from_triplets(a.nrows * b.nrows, a.ncols * b.ncols, trip)
}

/// Sum of `coef·M` terms of equal shape.
pub fn linear_combination(terms: &[(C64, &CsrMatrix)]) -> CsrMatrix {
    let (nrows, ncols) = terms.first().map_or((0, 0), |(_, m)| (m.nrows, m.ncols));
    let mut trip = Vec::new();
    for (coef, m) in terms {
        assert_eq!((m.nrows, m.ncols), (nrows, ncols));
        trip.extend(m.iter().map(|(r, c, v)| (r, c, *coef * v)));
    }
    CsrMatrix::from_triplets(nrows, ncols, trip)
}

pub fn dense_to_csr(m: &Mat<C64>) -> CsrMatrix {
    let mut trip = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] != ZERO {
                trip.push((i, j, m[(i, j)]));
            }
        }
    }
    CsrMatrix::from_triplets(m.nrows(), m.ncols(), trip)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BandLuError {
    #[error("matrix is exactly singular at pivot {0}")]
    Singular(usize),
}

/// LU factorization with partial pivoting of a banded matrix, stored in
/// LAPACK `gbtrf` layout (column-major band with `kl` extra rows of fill).
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<C64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    /// Factors `A − shift·I`.
    pub fn factor(a: &CsrMatrix, shift: C64) -> Result<Self, BandLuError> {
        assert_eq!(a.nrows(), a.ncols());
        let n = a.nrows();
        let (kl, ku) = a.bandwidths();
        let ldab = 2 * kl + ku + 1;
        let kv = kl + ku;
        let mut ab = vec![ZERO; ldab * n];
        for (r, c, v) in a.iter() {
            ab[kv + r - c + c * ldab] += v;
        }
        for i in 0..n {
            ab[kv + i * ldab] -= shift;
        }
        let mut lu = Self { n, kl, ku, ldab, ab, ipiv: vec![0; n] };
        lu.factor_in_place()?;
        Ok(lu)
    }

    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        self.kl + self.ku + r - c + c * self.ldab
    }

    fn factor_in_place(&mut self) -> Result<(), BandLuError> {
        let n = self.n;
        let mut ju = 0usize;
        for j in 0..n {
            let km = self.kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = -1.0;
            for i in 0..=km {
                let v = self.ab[self.idx(j + i, j)].norm();
                if v > best {
                    best = v;
                    jp = i;
                }
            }
            self.ipiv[j] = j + jp;
            if best == 0.0 {
                return Err(BandLuError::Singular(j));
            }
            ju = ju.max((j + self.ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let a = self.idx(j, c);
                    let b = self.idx(j + jp, c);
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.ab[self.idx(j, j)];
            let inv = C64::new(1.0, 0.0) / pivot;
            let col0 = self.idx(j, j);
            for i in 1..=km {
                self.ab[col0 + i] *= inv;
            }
            for c in j + 1..=ju {
                let ujc = self.ab[self.idx(j, c)];
                if ujc == ZERO {
                    continue;
                }
                // rows j+1..=j+km of column c are contiguous in band storage
                let dst = self.idx(j + 1, c);
                for i in 0..km {
                    let l = self.ab[col0 + 1 + i];
                    self.ab[dst + i] -= l * ujc;
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `(A − shift·I) x = b` in place.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        let kv = self.kl + self.ku;
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let km = self.kl.min(n - 1 - j);
            let bj = b[j];
            if bj != ZERO {
                let col0 = self.idx(j, j);
                for i in 1..=km {
                    b[j + i] -= self.ab[col0 + i] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            let xj = b[j] / self.ab[self.idx(j, j)];
            b[j] = xj;
            if xj != ZERO {
                let lo = j.saturating_sub(kv);
                for i in lo..j {
                    b[i] -= self.ab[self.idx(i, j)] * xj;
                }
            }
        }
    }
}
