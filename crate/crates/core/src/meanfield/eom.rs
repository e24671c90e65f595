use num_complex::Complex64;

use super::PhasePoint;
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Relative distance to the chart boundary below which the flow is refused.
const BOUNDARY_GUARD: f64 = 1e-12;

fn check_room(room: f64, four_j: f64) -> Result<()> {
    if room < BOUNDARY_GUARD * four_j {
        Err(Error::domain(format!(
            "4j - (q1^2 + p1^2) = {room:e} is at the chart boundary (4j = {four_j})"
        )))
    } else {
        Ok(())
    }
}

/// Classical Hamiltonian `⟨α|⟨ζ|H_RD(t)|ζ⟩|α⟩` in phase-space coordinates.
pub fn classical_hamiltonian(point: &PhasePoint, t: f64, params: &ModelParams) -> Result<f64> {
    let four_j = 4.0 * params.j();
    let room = four_j - point.spin_radius_sq();
    if room < 0.0 {
        return Err(Error::domain("q1^2 + p1^2 exceeds 4j"));
    }
    let (s, c) = (params.delta_phi * t).sin_cos();
    let proj = point.q1 * c + point.p1 * s;
    Ok(0.5 * params.omega0 * (point.spin_radius_sq() - 2.0 * params.j())
        + 0.5 * params.omega * point.field_radius_sq()
        + 2.0 * params.lambda * (room / four_j).sqrt() * proj * point.q2)
}

/// Hamilton's equations `(q̇₁, ṗ₁, q̇₂, ṗ₂)` of the driven mean-field flow
/// with `φ(t) = δφ·t`.
pub fn eom_rhs(point: &PhasePoint, t: f64, params: &ModelParams) -> Result<[f64; 4]> {
    let PhasePoint { q1, p1, q2, p2, .. } = *point;
    let four_j = 4.0 * params.j();
    let room = four_j - (q1 * q1 + p1 * p1);
    check_room(room, four_j)?;

    let (w0, w, l) = (params.omega0, params.omega, params.lambda);
    let (sin_phi, cos_phi) = (params.delta_phi * t).sin_cos();
    let proj = cos_phi * q1 + sin_phi * p1;
    let shrink = (room / four_j).sqrt();
    let cross = 2.0 * l * proj * q2 / (four_j * room).sqrt();

    Ok([
        w0 * p1 - cross * p1 + 2.0 * l * shrink * sin_phi * q2,
        -w0 * q1 + cross * q1 - 2.0 * l * shrink * cos_phi * q2,
        w * p2,
        -w * q2 - 2.0 * l * shrink * proj,
    ])
}

/// Displacement equations `(α̇, β̇)` obtained from the Holstein-Primakoff
/// representation, with `β` the spin-boson displacement.
///
/// They describe the same flow as [`eom_rhs`] under
/// `β = (q₁ + i p₁)/√2`, `α = (q₂ + i p₂)/√2`, but are evaluated in complex
/// form and serve as a cross-check.
pub fn hp_rhs(
    alpha: Complex64,
    beta: Complex64,
    t: f64,
    params: &ModelParams,
) -> Result<(Complex64, Complex64)> {
    let two_j = params.two_j as f64;
    let room = two_j - beta.norm_sqr();
    check_room(room, two_j)?;

    let i = Complex64::i();
    let phase = Complex64::from_polar(1.0, params.delta_phi * t);
    let l = params.lambda;
    let shrink = (room / two_j).sqrt();
    let spin_mix = beta.conj() * phase + beta * phase.conj();
    let field_sum = alpha + alpha.conj();

    let alpha_dot = -i * (params.omega * alpha + l * shrink * spin_mix);
    let beta_dot = -i
        * (params.omega0 * beta + l * shrink * field_sum * phase
            - 0.5 * l / (two_j.sqrt() * room.sqrt()) * field_sum * spin_mix * beta);
    Ok((alpha_dot, beta_dot))
}
