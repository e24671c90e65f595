//! Exact finite-size dynamics on the truncated Fock ⊗ Dicke space.
//!
//! Basis states `|n⟩|j, m⟩` with `0 ≤ n ≤ n_max` and `−j ≤ m ≤ j` are
//! flattened m-major, n-minor:
//!
//! ```text
//! index(n, m) = (m + j)·(n_max + 1) + n
//! ```

mod bessel;
mod chebyshev;
mod operators;
mod sparse;
mod spectrum;
mod states;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bessel::bessel_j_sequence;
pub use chebyshev::{
    chebyshev_coefficients, chebyshev_order, chebyshev_step, evolve, evolve_with, ChebyshevPropagator,
    NORM_TOLERANCE,
};
pub use operators::{build_operators, OperatorSet, DEFAULT_DIMENSION_CAP};
pub use sparse::CsrMatrix;
pub use spectrum::{lowest_eigenpair, spectral_bounds, SpectralBounds, DENSE_BOUNDS_MAX_DIM, DENSE_EIGEN_MAX_DIM};
pub use states::{
    auto_n_max, coherent_state, ground_state, initial_state_params, truncation_loss, InitialKind,
    TRUNCATION_LIMIT,
};

/// Tag naming the flattening convention, written next to serialized states.
pub const BASIS_ORDERING: &str = "m-major,n-minor";

/// Shape of the truncated product space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Basis {
    pub two_j: u32,
    pub n_max: usize,
}

impl Basis {
    pub fn new(two_j: u32, n_max: usize) -> Self {
        Basis { two_j, n_max }
    }

    pub fn field_levels(&self) -> usize {
        self.n_max + 1
    }

    pub fn spin_levels(&self) -> usize {
        self.two_j as usize + 1
    }

    pub fn dim(&self) -> usize {
        self.field_levels() * self.spin_levels()
    }

    /// Flat index of `|n⟩|j, m⟩` with `k = m + j`.
    pub fn index(&self, n: usize, k: usize) -> usize {
        debug_assert!(n <= self.n_max && k <= self.two_j as usize);
        k * self.field_levels() + n
    }

    /// Inverse of [`Basis::index`], returning `(n, k)`.
    pub fn levels(&self, index: usize) -> (usize, usize) {
        (index % self.field_levels(), index / self.field_levels())
    }

    /// `m = k − j`.
    pub fn m(&self, k: usize) -> f64 {
        k as f64 - self.two_j as f64 / 2.0
    }
}

/// State vector with amplitudes `κ_{n,m}` in the flattened basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumState {
    pub basis: Basis,
    pub amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn new(basis: Basis, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::domain(format!(
                "{} amplitudes for a basis of dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        Ok(QuantumState { basis, amplitudes })
    }

    /// The product basis state `|n⟩|j, m = k − j⟩`.
    pub fn basis_state(basis: Basis, n: usize, k: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dim()];
        amplitudes[basis.index(n, k)] = Complex64::new(1.0, 0.0);
        QuantumState { basis, amplitudes }
    }

    /// `|0⟩|j, −j⟩`.
    pub fn vacuum(basis: Basis) -> Self {
        QuantumState::basis_state(basis, 0, 0)
    }

    pub fn j(&self) -> f64 {
        self.basis.two_j as f64 / 2.0
    }

    pub fn amplitude(&self, n: usize, k: usize) -> Complex64 {
        self.amplitudes[self.basis.index(n, k)]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::domain("cannot normalise a zero or non-finite state"));
        }
        for a in &mut self.amplitudes {
            *a /= norm;
        }
        Ok(self)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `⟨ψ|D|ψ⟩` for a diagonal operator given by its diagonal.
    pub fn expectation_diagonal(&self, diagonal: &[f64]) -> f64 {
        self.amplitudes
            .iter()
            .zip(diagonal)
            .map(|(a, d)| a.norm_sqr() * d)
            .sum()
    }

    /// `⟨ψ|M|ψ⟩` for a real sparse operator.
    pub fn expectation(&self, op: &CsrMatrix) -> Complex64 {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        op.apply(&self.amplitudes, &mut out);
        self.amplitudes.iter().zip(&out).map(|(a, b)| a.conj() * b).sum()
    }

    /// Largest `|ψ_i − φ_i|`.
    pub fn max_distance(&self, other: &QuantumState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }
}
