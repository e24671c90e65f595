use num_complex::Complex64;

use super::PhasePoint;
use crate::error::{Error, Result};
use crate::trajectory::Observable;

/// `⟨a†a⟩/j = (q₂² + p₂²)/(2j)`.
pub fn mean_photon_scaled(point: &PhasePoint, j: f64) -> f64 {
    point.field_radius_sq() / (2.0 * j)
}

fn power_2j(base: f64, j: f64) -> f64 {
    base.powi((2.0 * j).round() as i32)
}

/// Parity of the coherent state `|α⟩|ζ⟩`,
/// `exp(−2|α|²)·((1 − |ζ|²)/(1 + |ζ|²))^{2j}`.
pub fn parity_meanfield(alpha: Complex64, zeta: Complex64, j: f64) -> f64 {
    let z2 = zeta.norm_sqr();
    (-2.0 * alpha.norm_sqr()).exp() * power_2j((1.0 - z2) / (1.0 + z2), j)
}

/// [`parity_meanfield`] written directly in phase-space coordinates,
/// `exp(−(q₂² + p₂²))·(1 − (q₁² + p₁²)/(2j))^{2j}`; finite on the whole disc.
pub fn parity_from_point(point: &PhasePoint, j: f64) -> f64 {
    (-point.field_radius_sq()).exp() * power_2j(1.0 - point.spin_radius_sq() / (2.0 * j), j)
}

/// Parity with the coordinates rescaled by `√j`,
/// `exp(−(q₂² + p₂²)/j)·(1 − (q₁² + p₁²)/(2j²))^{2j}`.
pub fn scaled_parity_meanfield(point: &PhasePoint, j: f64) -> Result<f64> {
    let base = 1.0 - point.spin_radius_sq() / (2.0 * j * j);
    if base < 0.0 {
        return Err(Error::domain(format!(
            "scaled parity needs q1^2 + p1^2 <= 2j^2 = {}, got {}",
            2.0 * j * j,
            point.spin_radius_sq()
        )));
    }
    Ok((-point.field_radius_sq() / j).exp() * power_2j(base, j))
}

/// Evaluates one observable at a phase point.
pub fn observe(point: &PhasePoint, j: f64, observable: Observable) -> Result<f64> {
    match observable {
        Observable::MeanPhotonScaled => Ok(mean_photon_scaled(point, j)),
        Observable::Parity => Ok(parity_from_point(point, j)),
        Observable::ScaledParity => scaled_parity_meanfield(point, j),
    }
}

/// `(1/(t_f − t₀)) ∫ v dt` by the trapezoidal rule on the sample grid.
pub fn time_average(series: &[(f64, f64)]) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::TooFewSamples(series.len()));
    }
    let mut integral = 0.0;
    for w in series.windows(2) {
        let (t0, v0) = w[0];
        let (t1, v1) = w[1];
        if !(t1 > t0) {
            return Err(Error::domain(format!(
                "sample times must increase strictly ({t0} then {t1})"
            )));
        }
        integral += 0.5 * (t1 - t0) * (v0 + v1);
    }
    let span = series[series.len() - 1].0 - series[0].0;
    Ok(integral / span)
}
