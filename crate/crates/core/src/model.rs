//! Model parameters and closed-form results for the rotated Dicke model.
//!
//! The undriven Hamiltonian is
//!
//! ```text
//! H_D = ω₀ J_z + ω a†a + λ/√(2j) (a + a†)(J₊ + J₋)
//! ```
//!
//! and the drive rotates the pseudo-spin about `z` by `φ(t) = δφ·t`. In the
//! co-rotating frame the splitting is shifted to `ω₀ + δφ`, which moves every
//! equilibrium threshold from `ωω₀` to `ω(ω₀ + δφ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::PhasePoint;

/// Default boson cutoff used when nothing better is known.
pub const DEFAULT_N_MAX: usize = 100;

/// Physical parameters of one run plus the boson truncation of the quantum
/// engine. All energies in units with ħ = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Atomic level splitting ω₀.
    pub omega0: f64,
    /// Field frequency ω.
    pub omega: f64,
    /// Atom-field coupling λ.
    pub lambda: f64,
    /// Twice the pseudo-spin length, `2j = N`.
    pub two_j: u32,
    /// Rotation velocity δφ; zero is the undriven model.
    pub delta_phi: f64,
    /// Highest retained Fock level.
    pub n_max: usize,
}

impl ModelParams {
    /// Builds and validates a parameter set. `j` must be a positive
    /// half-integer.
    pub fn new(omega0: f64, omega: f64, lambda: f64, j: f64, delta_phi: f64) -> Result<Self> {
        let p = ModelParams {
            omega0,
            omega,
            lambda,
            two_j: two_j_from(j)?,
            delta_phi,
            n_max: DEFAULT_N_MAX,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_delta_phi(mut self, delta_phi: f64) -> Self {
        self.delta_phi = delta_phi;
        self
    }

    /// Same physics with the drive switched off.
    pub fn undriven(self) -> Self {
        self.with_delta_phi(0.0)
    }

    /// Pseudo-spin length j.
    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    /// Effective splitting in the co-rotating frame, `ω₀ + δφ`.
    pub fn rotated_omega0(&self) -> f64 {
        self.omega0 + self.delta_phi
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega0, self.omega, self.lambda, self.delta_phi]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::domain("model parameters must be finite"));
        }
        if self.omega <= 0.0 {
            return Err(Error::domain(format!("omega must be > 0, got {}", self.omega)));
        }
        if self.omega0 <= 0.0 {
            return Err(Error::domain(format!("omega0 must be > 0, got {}", self.omega0)));
        }
        if self.lambda < 0.0 {
            return Err(Error::domain(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.two_j == 0 {
            return Err(Error::domain("j must be > 0"));
        }
        if self.rotated_omega0() <= 0.0 {
            return Err(Error::domain(format!(
                "omega0 + delta_phi must be > 0, got {}",
                self.rotated_omega0()
            )));
        }
        if self.n_max < 1 {
            return Err(Error::domain("n_max must be >= 1"));
        }
        Ok(())
    }
}

/// Converts a pseudo-spin length to `2j`, rejecting anything that is not a
/// positive half-integer.
pub fn two_j_from(j: f64) -> Result<u32> {
    let twice = 2.0 * j;
    if !(twice.is_finite() && twice >= 1.0 && (twice - twice.round()).abs() < 1e-12) {
        return Err(Error::domain(format!(
            "j must be a positive half-integer (2j integer), got {j}"
        )));
    }
    Ok(twice.round() as u32)
}

fn require_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be > 0, got {x}")))
    }
}

/// Equilibrium critical coupling `λ_c = √(ωω₀)/2`.
pub fn critical_coupling(omega: f64, omega0: f64) -> Result<f64> {
    require_positive("omega", omega)?;
    require_positive("omega0", omega0)?;
    Ok((omega * omega0).sqrt() / 2.0)
}

/// Critical coupling of the co-rotating Hamiltonian, `√(ω(ω₀+δφ))/2`.
pub fn rotated_critical_coupling(omega: f64, omega0: f64, delta_phi: f64) -> Result<f64> {
    let big_omega = omega * (omega0 + delta_phi);
    if !(big_omega >= 0.0) {
        return Err(Error::domain(format!(
            "omega*(omega0+delta_phi) = {big_omega} < 0 has no real critical coupling"
        )));
    }
    Ok(big_omega.sqrt() / 2.0)
}

/// Rotation velocity at which a coupling `λ` becomes critical,
/// `4λ²/ω − ω₀`. Negative values mean the system is normal for every
/// non-negative velocity.
pub fn critical_velocity(omega: f64, omega0: f64, lambda: f64) -> Result<f64> {
    require_positive("omega", omega)?;
    Ok(4.0 * lambda * lambda / omega - omega0)
}

/// Relative slack allowed when testing a coupling against `λ_c`, so that a
/// rounded `critical_coupling` output still counts as on the line.
const THRESHOLD_SLACK: f64 = 1e-12;
/// Relative distance `|4λ² − ωω₀|/(ωω₀)` at rounding level, where a coupling
/// is indistinguishable from `λ_c` and the gap is exactly zero.
const ON_LINE: f64 = 16.0 * f64::EPSILON;

fn on_critical_line(lambda: f64, prod: f64) -> bool {
    (4.0 * lambda * lambda - prod).abs() <= ON_LINE * prod
}

/// Lower excitation branch ε₋ in the normal phase (λ ≤ λ_c).
pub fn excitation_energy_np(omega: f64, omega0: f64, lambda: f64) -> Result<f64> {
    require_positive("omega", omega)?;
    require_positive("omega0", omega0)?;
    let prod = omega * omega0;
    if 4.0 * lambda * lambda > prod * (1.0 + THRESHOLD_SLACK) {
        return Err(Error::domain(format!(
            "normal-phase energy requires lambda <= sqrt(omega*omega0)/2 = {}, got {lambda}",
            prod.sqrt() / 2.0
        )));
    }
    if on_critical_line(lambda, prod) {
        return Ok(0.0);
    }
    let (w2, w02) = (omega * omega, omega0 * omega0);
    let root = ((w02 - w2).powi(2) + 16.0 * lambda * lambda * prod).sqrt();
    // ω² + ω₀² − root, rationalised to avoid cancellation near λ_c.
    let gap = (4.0 * w2 * w02 - 16.0 * lambda * lambda * prod) / (w2 + w02 + root);
    Ok((0.5 * gap.max(0.0)).sqrt())
}

/// Lower excitation branch ε₋ in the super-radiant phase (λ ≥ λ_c).
pub fn excitation_energy_srp(omega: f64, omega0: f64, lambda: f64) -> Result<f64> {
    require_positive("omega", omega)?;
    require_positive("omega0", omega0)?;
    let prod = omega * omega0;
    if 4.0 * lambda * lambda < prod * (1.0 - THRESHOLD_SLACK) {
        return Err(Error::domain(format!(
            "super-radiant energy requires lambda >= sqrt(omega*omega0)/2 = {}, got {lambda}",
            prod.sqrt() / 2.0
        )));
    }
    if on_critical_line(lambda, prod) {
        return Ok(0.0);
    }
    let w2 = omega * omega;
    let s = 16.0 * lambda.powi(4) / w2;
    let b = 4.0 * w2 * omega0 * omega0;
    let f = (s - w2).powi(2) + b;
    let gap = (4.0 * s * w2 - b) / (s + w2 + f.sqrt());
    Ok((0.5 * gap.max(0.0)).sqrt())
}

/// Empirical dynamical critical line `0.5 + 0.327 δφ^{3/4}`.
///
/// This is a fit to mean-field phase diagrams at ω = ω₀ = 1 and is only
/// provided as a reference overlay; nothing in the crate branches on it.
pub fn dynamical_critical_fit(delta_phi: f64) -> Result<f64> {
    if !(delta_phi >= 0.0) {
        return Err(Error::domain(format!("delta_phi must be >= 0, got {delta_phi}")));
    }
    Ok(0.5 + 0.327 * delta_phi.powf(0.75))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedPointLabel {
    C1,
    C2,
    C3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    /// Exactly on the threshold: real, but neither stable nor unstable.
    Marginal,
    Unstable,
    /// The coordinates are complex for these parameters.
    NotReal,
}

/// A fixed point of the mean-field flow. `c2`/`c3` are circles in the lab
/// frame, so their coordinates depend on `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub label: FixedPointLabel,
    pub coordinates: Option<PhasePoint>,
    pub stability: Stability,
}

impl FixedPoint {
    pub fn is_stable(&self) -> bool {
        self.stability == Stability::Stable
    }

    pub fn is_real(&self) -> bool {
        self.coordinates.is_some()
    }
}

/// The three fixed points `c1`, `c2`, `c3` at time `t`.
///
/// Stability follows the analytic conditions: `c1` is stable strictly below
/// `λ_c^(rot)`; `c2`/`c3` are real from `λ_c^(rot)` upward and stable strictly
/// above it. On the line `c1` is unstable and `c2`/`c3` are marginal.
pub fn fixed_points(params: &ModelParams, t: f64) -> [FixedPoint; 3] {
    let threshold = (params.omega * params.rotated_omega0()).sqrt() / 2.0;
    let lambda = params.lambda;
    let c1 = FixedPoint {
        label: FixedPointLabel::C1,
        coordinates: Some(PhasePoint::origin(t)),
        stability: if lambda < threshold {
            Stability::Stable
        } else {
            Stability::Unstable
        },
    };
    let circle = stationary_circle_amplitudes(params, params.omega * params.rotated_omega0());
    let (c2, c3) = match circle {
        Some((spin_radius, field)) => {
            let phi = params.delta_phi * t;
            let (s, c) = phi.sin_cos();
            let c2 = PhasePoint::new(t, -spin_radius * c, -spin_radius * s, field, 0.0);
            let stability = if lambda > threshold {
                Stability::Stable
            } else {
                Stability::Marginal
            };
            (
                FixedPoint {
                    label: FixedPointLabel::C2,
                    coordinates: Some(c2),
                    stability,
                },
                FixedPoint {
                    label: FixedPointLabel::C3,
                    coordinates: Some(PhasePoint::new(t, -c2.q1, -c2.p1, -c2.q2, 0.0)),
                    stability,
                },
            )
        }
        None => (
            FixedPoint {
                label: FixedPointLabel::C2,
                coordinates: None,
                stability: Stability::NotReal,
            },
            FixedPoint {
                label: FixedPointLabel::C3,
                coordinates: None,
                stability: Stability::NotReal,
            },
        ),
    };
    [c1, c2, c3]
}

/// Radii `(√(2j(1−x)), (2λ/ω)√(j(1−x²)))` with `x = Ω/(4λ²)`, or `None` when
/// `4λ² < Ω` makes them complex. `Ω` is `ωω₀` for the undriven stationary
/// state and `ω(ω₀+δφ)` for the rotating circle.
pub(crate) fn stationary_circle_amplitudes(params: &ModelParams, big_omega: f64) -> Option<(f64, f64)> {
    let four_l2 = 4.0 * params.lambda * params.lambda;
    if four_l2 < big_omega || four_l2 == 0.0 {
        return None;
    }
    let x = big_omega / four_l2;
    let j = params.j();
    let spin = (2.0 * j * (1.0 - x)).max(0.0).sqrt();
    let field = 2.0 * params.lambda / params.omega * (j * (1.0 - x * x)).max(0.0).sqrt();
    Some((spin, field))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(lambda: f64, j: f64, delta_phi: f64) -> ModelParams {
        ModelParams::new(1.0, 1.0, lambda, j, delta_phi).unwrap()
    }

    #[test]
    fn critical_coupling_values() {
        assert_eq!(critical_coupling(1.0, 1.0).unwrap(), 0.5);
        assert_eq!(critical_coupling(4.0, 1.0).unwrap(), 1.0);
        assert!(critical_coupling(1.0, 1e-300).unwrap() < 1e-149);
        assert!(critical_coupling(0.0, 1.0).is_err());
        assert!(critical_coupling(1.0, -1.0).is_err());
    }

    #[test]
    fn rotated_critical_coupling_values() {
        assert_eq!(rotated_critical_coupling(1.0, 1.0, 0.0).unwrap(), 0.5);
        assert_abs_diff_eq!(
            rotated_critical_coupling(1.0, 1.0, 1.0).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
        assert_eq!(rotated_critical_coupling(1.0, 1.0, 3.0).unwrap(), 1.0);
        assert!(rotated_critical_coupling(1.0, 1.0, -2.0).is_err());
    }

    #[test]
    fn critical_velocity_values() {
        assert_eq!(critical_velocity(1.0, 1.0, 1.0).unwrap(), 3.0);
        assert_eq!(critical_velocity(1.0, 1.0, 0.5).unwrap(), 0.0);
        assert_eq!(critical_velocity(2.0, 1.0, 1.0).unwrap(), 1.0);
        assert!(critical_velocity(1.0, 1.0, 0.1).unwrap() < 0.0);
        assert!(critical_velocity(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn normal_phase_energy() {
        assert_abs_diff_eq!(excitation_energy_np(1.0, 1.0, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        // Off resonance the uncoupled gap is the smaller frequency.
        assert_abs_diff_eq!(excitation_energy_np(2.0, 0.5, 0.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(excitation_energy_np(1.0, 1.0, 0.5).unwrap(), 0.0);
        // ε² = (2 − √(16·0.09))/2 = 0.4 at resonance.
        assert_abs_diff_eq!(
            excitation_energy_np(1.0, 1.0, 0.3).unwrap(),
            0.4f64.sqrt(),
            epsilon = 1e-15
        );
        let err = excitation_energy_np(1.0, 1.0, 0.6).unwrap_err();
        assert!(err.to_string().contains("lambda <="), "{err}");
    }

    #[test]
    fn gap_closes_at_rounded_threshold() {
        for &(w, w0) in &[(1.0, 1.0), (0.37, 2.9), (3.3, 0.11), (1.7, 1.7000001)] {
            let lc = critical_coupling(w, w0).unwrap();
            assert_eq!(excitation_energy_np(w, w0, lc).unwrap(), 0.0);
            assert_eq!(excitation_energy_srp(w, w0, lc).unwrap(), 0.0);
            // Slightly off the line the square-root onset is resolved.
            assert!(excitation_energy_np(w, w0, lc * (1.0 - 1e-10)).unwrap() > 1e-7);
        }
    }

    #[test]
    fn super_radiant_energy() {
        assert_eq!(excitation_energy_srp(1.0, 1.0, 0.5).unwrap(), 0.0);
        // f = 229 at λ = 1.
        let expected = ((17.0 - 229f64.sqrt()) / 2.0).sqrt();
        assert_abs_diff_eq!(excitation_energy_srp(1.0, 1.0, 1.0).unwrap(), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(excitation_energy_srp(1.0, 1.0, 1.0).unwrap(), 0.96625, epsilon = 1e-5);
        assert!(excitation_energy_srp(1.0, 1.0, 0.4).is_err());
    }

    #[test]
    fn super_radiant_energy_large_coupling_tends_to_field_frequency() {
        // The lower branch saturates at ω rather than diverging.
        let mut prev = 0.0;
        for &l in &[0.6, 1.0, 2.0, 5.0, 20.0, 100.0] {
            let e = excitation_energy_srp(1.0, 1.0, l).unwrap();
            assert!(e > prev && e < 1.0);
            prev = e;
        }
        assert_abs_diff_eq!(excitation_energy_srp(1.0, 1.0, 100.0).unwrap(), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(excitation_energy_srp(0.7, 1.3, 100.0).unwrap(), 0.7, epsilon = 1e-8);
    }

    #[test]
    fn dynamical_fit_values() {
        assert_eq!(dynamical_critical_fit(0.0).unwrap(), 0.5);
        assert_abs_diff_eq!(dynamical_critical_fit(1.0).unwrap(), 0.827, epsilon = 1e-15);
        assert_abs_diff_eq!(dynamical_critical_fit(16.0).unwrap(), 3.116, epsilon = 1e-12);
        assert!(dynamical_critical_fit(-1.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1.0, 1.0, 1.0, 0.75, 0.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, -0.1, 1.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 0.0, 0.1, 1.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.1, 1.0, -1.5).is_err());
        let p = ModelParams::new(1.0, 1.0, 1.0, 1.5, 0.0).unwrap();
        assert_eq!(p.two_j, 3);
        assert_eq!(p.j(), 1.5);
        assert!(p.with_n_max(0).validate().is_err());
    }

    #[test]
    fn subcritical_fixed_points() {
        let [c1, c2, c3] = fixed_points(&params(0.3, 3.0, 0.0), 0.0);
        assert!(c1.is_stable());
        assert_eq!(c1.coordinates, Some(PhasePoint::origin(0.0)));
        assert_eq!(c2.stability, Stability::NotReal);
        assert_eq!(c3.stability, Stability::NotReal);
        assert!(!c2.is_real() && !c3.is_real());
    }

    #[test]
    fn supercritical_circle_coordinates() {
        let p = params(1.0, 1.0, 0.0);
        let [c1, c2, c3] = fixed_points(&p, 0.0);
        assert_eq!(c1.stability, Stability::Unstable);
        assert!(c2.is_stable() && c3.is_stable());
        let x = c2.coordinates.unwrap();
        assert_abs_diff_eq!(x.q1, -(1.5f64).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(x.q1, -1.22474, epsilon = 1e-5);
        assert_eq!(x.p1, 0.0);
        assert_abs_diff_eq!(x.q2, 2.0 * (15.0f64 / 16.0).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(x.q2, 1.93649, epsilon = 1e-5);
        assert_eq!(x.p2, 0.0);
        let y = c3.coordinates.unwrap();
        assert_eq!((y.q1, y.p1, y.q2, y.p2), (-x.q1, -x.p1, -x.q2, 0.0));
    }

    #[test]
    fn circle_rotates_with_drive() {
        let p = params(1.0, 1.0, 0.5);
        let t = std::f64::consts::PI; // φ = π/2
        let [_, c2, _] = fixed_points(&p, t);
        let x = c2.coordinates.unwrap();
        let radius = (2.0 * (1.0 - 1.5 / 4.0f64)).sqrt();
        assert_abs_diff_eq!(x.q1, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x.p1, -radius, epsilon = 1e-14);
    }

    #[test]
    fn circle_rotated_quarter_turn_matches_undriven_radius() {
        // A vanishing drive leaves the λ = 1 radius intact but still turns it.
        let dphi = 1e-9;
        let p = params(1.0, 1.0, dphi);
        let t = std::f64::consts::FRAC_PI_2 / dphi;
        let [_, c2, _] = fixed_points(&p, t);
        let x = c2.coordinates.unwrap();
        assert_abs_diff_eq!(x.q1, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(x.p1, -1.22474, epsilon = 1e-5);
    }

    #[test]
    fn on_the_line_convention() {
        // δφ = 3 puts λ = 1 exactly on the rotated critical line.
        let p = params(1.0, 2.0, 3.0);
        let [c1, c2, c3] = fixed_points(&p, 0.7);
        assert_eq!(c1.stability, Stability::Unstable);
        assert_eq!(c2.stability, Stability::Marginal);
        assert_eq!(c3.stability, Stability::Marginal);
        assert!(c2.is_real());
    }

    #[test]
    fn stability_flips_across_threshold() {
        for &dphi in &[0.0, 0.4, 1.0, 3.0] {
            let lc = rotated_critical_coupling(1.0, 1.0, dphi).unwrap();
            let below = fixed_points(&params(lc * (1.0 - 1e-6), 2.0, dphi), 0.0);
            let above = fixed_points(&params(lc * (1.0 + 1e-6), 2.0, dphi), 0.0);
            assert!(below[0].is_stable() && !below[1].is_real());
            assert!(!above[0].is_stable() && above[1].is_stable() && above[2].is_stable());
        }
    }
}
