//! Husimi Q function on rectangular phase-space grids.
//!
//! `Q(α) = ⟨α|ρ|α⟩` with no `1/π` prefactor, so the vacuum peaks at
//! `Q(0) = 1` and a normalized state integrates to `π` over the plane.

use faer::Side;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::fock::{self, DensityMatrix};

/// Default number of grid points per axis.
pub const DEFAULT_GRID_N: usize = 201;

/// Square grid specification centered at `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    /// Half-width; `None` selects `1.5·√N + 4` from the state's photon
    /// number.
    pub radius: Option<f64>,
    pub center: C64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n: DEFAULT_GRID_N, radius: None, center: C64::new(0.0, 0.0) }
    }
}

impl GridSpec {
    pub fn new(n: usize, radius: f64) -> Self {
        Self { n, radius: Some(radius), center: C64::new(0.0, 0.0) }
    }

    pub fn auto_radius(n_photon: f64) -> f64 {
        1.5 * n_photon.max(0.0).sqrt() + 4.0
    }

    pub fn axes(&self, radius: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.n.max(2);
        let axis = |c: f64| (0..n).map(|i| c - radius + 2.0 * radius * i as f64 / (n - 1) as f64).collect::<Vec<_>>();
        (axis(self.center.re), axis(self.center.im))
    }
}

/// Phase-space grid values, stored row-major with the imaginary axis as the
/// slow index: `values[i_im·n_re + i_re]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QGrid {
    pub re_axis: Vec<f64>,
    pub im_axis: Vec<f64>,
    pub values: Vec<f64>,
}

impl QGrid {
    pub fn from_fn<F>(re_axis: Vec<f64>, im_axis: Vec<f64>, f: F) -> Self
    where
        F: Fn(C64) -> f64 + Sync,
    {
        let nr = re_axis.len();
        let values = (0..im_axis.len() * nr)
            .into_par_iter()
            .map(|idx| f(C64::new(re_axis[idx % nr], im_axis[idx / nr])))
            .collect();
        Self { re_axis, im_axis, values }
    }

    pub fn get(&self, i_re: usize, i_im: usize) -> f64 {
        self.values[i_im * self.re_axis.len() + i_re]
    }

    pub fn point(&self, i_re: usize, i_im: usize) -> C64 {
        C64::new(self.re_axis[i_re], self.im_axis[i_im])
    }

    pub fn cell_area(&self) -> f64 {
        let dx = self.re_axis.get(1).map_or(0.0, |x| x - self.re_axis[0]);
        let dy = self.im_axis.get(1).map_or(0.0, |y| y - self.im_axis[0]);
        dx * dy
    }

    /// `Σ Q·ΔA/π`, which is 1 for a normalized state when the grid covers
    /// its support.
    pub fn normalization(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area() / std::f64::consts::PI
    }

    pub fn argmax(&self) -> (usize, usize) {
        let nr = self.re_axis.len();
        let (idx, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        (idx % nr, idx / nr)
    }

    /// Grid maximum refined by a quadratic fit over the 3×3 neighborhood of
    /// the grid argmax.
    pub fn refined_max(&self) -> QMax {
        let (ir, ii) = self.argmax();
        let raw = QMax { value: self.get(ir, ii), alpha: self.point(ir, ii) };
        let (nr, ni) = (self.re_axis.len(), self.im_axis.len());
        if ir == 0 || ii == 0 || ir + 1 >= nr || ii + 1 >= ni {
            return raw;
        }
        let q = |dr: isize, di: isize| self.get((ir as isize + dr) as usize, (ii as isize + di) as usize);
        let c = q(0, 0);
        let gx = 0.5 * (q(1, 0) - q(-1, 0));
        let gy = 0.5 * (q(0, 1) - q(0, -1));
        let hxx = q(1, 0) - 2.0 * c + q(-1, 0);
        let hyy = q(0, 1) - 2.0 * c + q(0, -1);
        let hxy = 0.25 * (q(1, 1) - q(1, -1) - q(-1, 1) + q(-1, -1));
        let det = hxx * hyy - hxy * hxy;
        // only refine inside a concave neighborhood
        if !(hxx < 0.0 && det > 0.0) {
            return raw;
        }
        let dx = (-(hyy * gx - hxy * gy) / det).clamp(-1.0, 1.0);
        let dy = (-(hxx * gy - hxy * gx) / det).clamp(-1.0, 1.0);
        let value = c + gx * dx + gy * dy + 0.5 * (hxx * dx * dx + 2.0 * hxy * dx * dy + hyy * dy * dy);
        let step_r = self.re_axis[1] - self.re_axis[0];
        let step_i = self.im_axis[1] - self.im_axis[0];
        QMax { value: value.max(c), alpha: raw.alpha + C64::new(dx * step_r, dy * step_i) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QMax {
    pub value: f64,
    pub alpha: C64,
}

/// Spectral form of ρ used for fast Q evaluation:
/// `Q(α) = e^{−|α|²} Σ_k p_k |P_k(ᾱ)|²` with `P_k(z) = Σ_n ψ_kn zⁿ/√n!`.
pub struct HusimiEvaluator {
    weights: Vec<f64>,
    // coefficients ψ_kn/√n!, one row per retained eigenvector
    coeffs: Vec<Vec<C64>>,
}

impl HusimiEvaluator {
    pub fn new(rho: &DensityMatrix) -> Self {
        let d = rho.dim();
        let herm = faer::Mat::from_fn(d, d, |i, j| 0.5 * (rho.get(i, j) + rho.get(j, i).conj()));
        let eig = herm.self_adjoint_eigen(Side::Lower).expect("Hermitian eigensolve converges");
        let u = eig.U();
        let s = eig.S();
        let mut inv_sqrt_fact = vec![1.0; d];
        for n in 1..d {
            inv_sqrt_fact[n] = inv_sqrt_fact[n - 1] / (n as f64).sqrt();
        }
        let mut weights = Vec::new();
        let mut coeffs = Vec::new();
        for k in 0..d {
            let w = s[k].re;
            // negative weights are numerical noise of a positive state
            if w <= 1e-15 {
                continue;
            }
            weights.push(w);
            coeffs.push((0..d).map(|n| u[(n, k)] * inv_sqrt_fact[n]).collect());
        }
        Self { weights, coeffs }
    }

    pub fn q(&self, alpha: C64) -> f64 {
        let z = alpha.conj();
        let mut acc = 0.0;
        for (w, c) in self.weights.iter().zip(&self.coeffs) {
            // Horner evaluation of P_k(ᾱ)
            let mut p = C64::new(0.0, 0.0);
            for cn in c.iter().rev() {
                p = p * z + cn;
            }
            acc += w * p.norm_sqr();
        }
        acc * (-alpha.norm_sqr()).exp()
    }
}

fn resolve_radius(spec: &GridSpec, rho: &DensityMatrix) -> f64 {
    spec.radius.unwrap_or_else(|| GridSpec::auto_radius(fock::photon_number(rho)))
}

/// `Q(α) = ⟨α|ρ|α⟩` over the grid.
pub fn husimi(rho: &DensityMatrix, spec: &GridSpec) -> QGrid {
    let radius = resolve_radius(spec, rho);
    let extent = spec.center.norm() + radius;
    if extent * extent > 0.5 * rho.dim() as f64 {
        let (_, tail) = fock::coherent_amplitudes(C64::new(extent, 0.0), rho.dim());
        // Q stays exact for the truncated state; this only hints that the
        // truncation may be too small for the region being looked at
        if tail > fock::COHERENT_TAIL_WARN {
            log::debug!("Q grid reaches |α|={extent:.2}, where coherent states leak {tail:.2e} past dim={}", rho.dim());
        }
    }
    let (re_axis, im_axis) = spec.axes(radius);
    let eval = HusimiEvaluator::new(rho);
    QGrid::from_fn(re_axis, im_axis, |a| eval.q(a))
}

/// Refined maximum of Q over the grid.
pub fn q_max(rho: &DensityMatrix, spec: &GridSpec) -> QMax {
    husimi(rho, spec).refined_max()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, vacuum};

    #[test]
    fn vacuum_q() {
        let rho = vacuum(10).unwrap();
        let grid = husimi(&rho, &GridSpec::new(41, 3.0));
        for ii in 0..41 {
            for ir in 0..41 {
                let a = grid.point(ir, ii);
                assert!((grid.get(ir, ii) - (-a.norm_sqr()).exp()).abs() < 1e-14);
            }
        }
        let m = grid.refined_max();
        assert!((m.value - 1.0).abs() < 1e-12);
        assert!(m.alpha.norm() < 1e-12);
        assert!((grid.normalization() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn coherent_q_is_displaced_gaussian() {
        let beta = C64::new(1.2, -0.7);
        let rho = coherent_state(beta, 40).unwrap();
        let grid = husimi(&rho, &GridSpec::new(31, 4.0));
        for (i, &v) in grid.values.iter().enumerate() {
            let a = grid.point(i % 31, i / 31);
            assert!((v - (-(a - beta).norm_sqr()).exp()).abs() < 1e-10);
        }
        // the maximum between grid nodes is recovered by the refinement
        let m = q_max(&rho, &GridSpec::new(31, 4.0));
        assert!((m.value - 1.0).abs() < 5e-3, "{}", m.value);
    }

    #[test]
    fn mixture_ring_closed_form() {
        // ½(|0⟩⟨0| + |1⟩⟨1|): Q = e^{−|α|²}(1 + |α|²)/2
        let rho = DensityMatrix::diagonal(&[0.5, 0.5, 0.0, 0.0]);
        let grid = husimi(&rho, &GridSpec::new(51, 3.0));
        for (i, &v) in grid.values.iter().enumerate() {
            let r2 = grid.point(i % 51, i / 51).norm_sqr();
            assert!((v - 0.5 * (-r2).exp() * (1.0 + r2)).abs() < 1e-14);
        }
        assert!(grid.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn auto_radius_covers_state() {
        let rho = coherent_state(C64::new(3.0, 0.0), 50).unwrap();
        let grid = husimi(&rho, &GridSpec { n: 121, ..Default::default() });
        assert!((grid.normalization() - 1.0).abs() < 1e-2);
    }
}
