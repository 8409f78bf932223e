//! Quantum and mean-field simulation of a single driven cavity mode with
//! linear loss `κ`, linear gain `g`, two-photon loss `η`, detuning `Δ` and
//! coherent drive `ε`.
//!
//! Density matrices are vectorized by stacking columns: `vec(ρ)[i + j·D] = ρ_ij`.

pub mod arnoldi;
pub mod classical;
pub mod dynamics;
pub mod fock;
pub mod husimi;
pub mod io;
pub mod liouvillian;
pub mod ode;
pub mod sparse;
pub mod spectra;

pub use num_complex::Complex64 as C64;

pub use fock::{DensityMatrix, Operator, SystemParams};
pub use liouvillian::{build_superoperator, Superoperator};
pub use spectra::{full_spectrum, rightmost_eigenvalues, steady_state, SpectrumResult, SteadyState};
