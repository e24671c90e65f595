use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operators::build_operators;
use super::spectrum::lowest_eigenpair;
use super::{Basis, QuantumState};
use crate::error::{Error, Result};
use crate::model::{stationary_circle_amplitudes, two_j_from, ModelParams, DEFAULT_N_MAX};

/// Largest acceptable probability outside the retained Fock levels.
pub const TRUNCATION_LIMIT: f64 = 1e-10;
/// Tail probability targeted by the automatic cutoff, well inside the limit.
const AUTO_TAIL: f64 = 1e-13;

/// Coherent-state families used as initial conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    /// Stationary state of the undriven model, threshold `Ω₀ = ωω₀`.
    StationaryDicke,
    /// Rotating fixed point `c2`, threshold `Ω = ω(ω₀+δφ)`.
    StationaryCircle,
    /// `|0⟩|j, −j⟩`.
    Fock,
    /// `α = ζ = 10^{−ε}`.
    NearlyFock,
}

/// Coherent-state labels `(α, ζ)` of an initial-state family. `epsilon` is
/// only read by [`InitialKind::NearlyFock`].
pub fn initial_state_params(kind: InitialKind, params: &ModelParams, epsilon: f64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    let stationary = |big_omega: f64| match stationary_circle_amplitudes(params, big_omega) {
        Some((spin, field)) => {
            let four_j = 4.0 * params.j();
            let zeta = -spin / (four_j - spin * spin).sqrt();
            (
                Complex64::new(field / std::f64::consts::SQRT_2, 0.0),
                Complex64::new(zeta, 0.0),
            )
        }
        None => (zero, zero),
    };
    match kind {
        InitialKind::StationaryDicke => stationary(params.omega * params.omega0),
        InitialKind::StationaryCircle => stationary(params.omega * params.rotated_omega0()),
        InitialKind::Fock => (zero, zero),
        InitialKind::NearlyFock => {
            let x = 10f64.powf(-epsilon);
            (Complex64::new(x, 0.0), Complex64::new(x, 0.0))
        }
    }
}

/// Poisson weights `e^{−|α|²/2} αⁿ/√(n!)` for `n = 0 … n_max`.
fn field_amplitudes(alpha: Complex64, n_max: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    out.push(c);
    for n in 1..=n_max {
        c *= alpha / (n as f64).sqrt();
        out.push(c);
    }
    out
}

/// Probability `1 − Σ_{n ≤ n_max} |⟨n|α⟩|²` lost by the field cutoff.
pub fn truncation_loss(alpha: Complex64, n_max: usize) -> f64 {
    let kept: f64 = field_amplitudes(alpha, n_max).iter().map(|c| c.norm_sqr()).sum();
    (1.0 - kept).max(0.0)
}

/// Smallest cutoff, at least the default of 100, whose coherent-state tail
/// for `|α|` is far below [`TRUNCATION_LIMIT`].
pub fn auto_n_max(alpha: Complex64) -> usize {
    let mu = alpha.norm_sqr();
    let mut weight = (-mu).exp();
    let mut kept = weight;
    let mut n = 0usize;
    while 1.0 - kept > AUTO_TAIL {
        n += 1;
        weight *= mu / n as f64;
        kept += weight;
        if n > 100_000 {
            break;
        }
    }
    n.max(DEFAULT_N_MAX)
}

/// Product coherent state `|α⟩|ζ⟩` on the truncated space,
/// `κ_{n,m} = e^{−|α|²/2} αⁿ/√(n!) · ζ^{m+j} √C(2j, m+j) / (1+|ζ|²)^j`,
/// renormalised after truncation.
pub fn coherent_state(alpha: Complex64, zeta: Complex64, j: f64, n_max: usize) -> Result<QuantumState> {
    let two_j = two_j_from(j)?;
    if !(alpha.norm().is_finite() && zeta.norm().is_finite()) {
        return Err(Error::domain("coherent-state labels must be finite"));
    }
    let field = field_amplitudes(alpha, n_max);
    let loss = (1.0 - field.iter().map(|c| c.norm_sqr()).sum::<f64>()).max(0.0);
    if loss >= TRUNCATION_LIMIT {
        return Err(Error::Truncation {
            loss,
            n_max,
            limit: TRUNCATION_LIMIT,
        });
    }
    let mut spin = Vec::with_capacity(two_j as usize + 1);
    let mut s = Complex64::new((1.0 + zeta.norm_sqr()).powf(-j), 0.0);
    spin.push(s);
    for k in 1..=two_j as usize {
        s *= zeta * (((two_j as usize - k + 1) as f64) / k as f64).sqrt();
        spin.push(s);
    }
    let basis = Basis::new(two_j, n_max);
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dim()];
    for (k, sk) in spin.iter().enumerate() {
        for (n, fn_) in field.iter().enumerate() {
            amplitudes[basis.index(n, k)] = sk * fn_;
        }
    }
    QuantumState::new(basis, amplitudes)?.normalized()
}

/// Lowest eigenvector of `H_D` with the largest-magnitude amplitude made
/// real and positive. Above threshold the two parity sectors are nearly
/// degenerate; whichever the eigensolver returns is kept as is.
pub fn ground_state(params: &ModelParams) -> Result<QuantumState> {
    let ops = build_operators(params)?;
    let (_, vector) = lowest_eigenpair(&ops.h_dicke)?;
    let pivot = vector.iter().fold(0.0f64, |best, &v| if v.abs() > best.abs() { v } else { best });
    let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
    let amplitudes: Vec<Complex64> = vector.iter().map(|&v| Complex64::new(sign * v, 0.0)).collect();
    let state = QuantumState::new(ops.basis, amplitudes)?.normalized()?;
    let top: f64 = (0..ops.basis.spin_levels())
        .map(|k| state.amplitude(ops.basis.n_max, k).norm_sqr())
        .sum();
    if top >= TRUNCATION_LIMIT {
        return Err(Error::Truncation {
            loss: top,
            n_max: ops.basis.n_max,
            limit: TRUNCATION_LIMIT,
        });
    }
    Ok(state)
}
