//! Thermodynamic-limit dynamics in the coherent-state phase space.
//!
//! A product coherent state `|α⟩|ζ⟩` is parametrised by canonical pairs
//! `(q₁, p₁)` for the pseudo-spin and `(q₂, p₂)` for the field:
//!
//! ```text
//! ζ = (q₁ + i p₁) / √(4j − (q₁² + p₁²)),   α = (q₂ + i p₂) / √2
//! ```
//!
//! so the spin chart covers the disc `q₁² + p₁² < 4j`; its boundary circle is
//! the single point `m = +j` of the Bloch sphere.

mod eom;
mod integrator;
mod observables;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::trajectory::{Engine, Sample, Trajectory};

pub use eom::{classical_hamiltonian, eom_rhs, hp_rhs};
pub use integrator::{DormandPrince, Tolerance};
pub use observables::{
    mean_photon_scaled, observe, parity_from_point, parity_meanfield, scaled_parity_meanfield,
    time_average,
};

/// Point of the classical phase space at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub t: f64,
    pub q1: f64,
    pub p1: f64,
    pub q2: f64,
    pub p2: f64,
}

impl PhasePoint {
    pub fn new(t: f64, q1: f64, p1: f64, q2: f64, p2: f64) -> Self {
        PhasePoint { t, q1, p1, q2, p2 }
    }

    /// The fixed point `c1`.
    pub fn origin(t: f64) -> Self {
        PhasePoint::new(t, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn from_array(t: f64, y: [f64; 4]) -> Self {
        PhasePoint::new(t, y[0], y[1], y[2], y[3])
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.q1, self.p1, self.q2, self.p2]
    }

    /// `q₁² + p₁²`, twice the Holstein-Primakoff occupation.
    pub fn spin_radius_sq(&self) -> f64 {
        self.q1 * self.q1 + self.p1 * self.p1
    }

    pub fn field_radius_sq(&self) -> f64 {
        self.q2 * self.q2 + self.p2 * self.p2
    }

    /// Point representing the coherent state `|α⟩|ζ⟩`.
    pub fn from_coherent(alpha: Complex64, zeta: Complex64, j: f64, t: f64) -> Self {
        let scale = (4.0 * j / (1.0 + zeta.norm_sqr())).sqrt();
        let spin = zeta * scale;
        let field = alpha * std::f64::consts::SQRT_2;
        PhasePoint::new(t, spin.re, spin.im, field.re, field.im)
    }

    /// Coherent-state labels `(α, ζ)` of this point.
    pub fn to_coherent(&self, j: f64) -> Result<(Complex64, Complex64)> {
        let room = 4.0 * j - self.spin_radius_sq();
        if !(room > 0.0) {
            return Err(Error::domain(format!(
                "q1^2 + p1^2 = {} reaches the chart boundary 4j = {}",
                self.spin_radius_sq(),
                4.0 * j
            )));
        }
        let zeta = Complex64::new(self.q1, self.p1) / room.sqrt();
        let alpha = Complex64::new(self.q2, self.p2) / std::f64::consts::SQRT_2;
        Ok((alpha, zeta))
    }
}

/// Integrates the mean-field equations from `start` to `t_end` and reports
/// the phase point on `sample_count` uniformly spaced times including both
/// end points. The drive is whatever `params.delta_phi` says.
///
/// Fails with [`Error::Integration`] when the step size collapses, which in
/// practice means the orbit ran into the spin chart boundary.
pub fn integrate(
    start: PhasePoint,
    params: &ModelParams,
    t_end: f64,
    sample_count: usize,
    tol: Tolerance,
) -> Result<Trajectory> {
    params.validate()?;
    if !(t_end > start.t) {
        return Err(Error::domain(format!(
            "t_end = {t_end} must exceed the start time {}",
            start.t
        )));
    }
    if sample_count < 2 {
        return Err(Error::TooFewSamples(sample_count));
    }
    let j = params.j();
    if !(start.spin_radius_sq() <= 4.0 * j) {
        return Err(Error::domain(format!(
            "start point has q1^2 + p1^2 = {} > 4j = {}",
            start.spin_radius_sq(),
            4.0 * j
        )));
    }
    let t0 = start.t;
    let grid = uniform_grid(t0, t_end, sample_count);
    let rhs = |t: f64, y: &[f64; 4]| eom_rhs(&PhasePoint::from_array(t, *y), t, params);
    let states = DormandPrince::new(tol).solve(rhs, t0, start.to_array(), &grid)?;

    let samples = grid
        .iter()
        .zip(states)
        .map(|(&t, y)| {
            let point = PhasePoint::from_array(t, y);
            if point.spin_radius_sq() > 4.0 * j {
                return Err(Error::Integration {
                    t,
                    reason: "sample left the domain q1^2 + p1^2 <= 4j".into(),
                });
            }
            Ok(Sample {
                t,
                point: Some(point),
                values: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Trajectory {
        params: *params,
        engine: Engine::MeanField,
        driven: params.delta_phi != 0.0,
        observables: Vec::new(),
        samples,
    })
}

/// `n` equally spaced times from `t0` to `t1`, hitting `t1` exactly.
pub fn uniform_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let span = t1 - t0;
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { t1 } else { t0 + span * (i as f64 / last) })
        .collect()
}
