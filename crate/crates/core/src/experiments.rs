//! Driving protocols and parameter sweeps.
//!
//! A protocol switches the rotation on at `t₀ = 0` and evolves until
//! `t_f = n_R·2π/δφ`. The undriven comparison run keeps the same `t_f` and
//! time grid; there `δφ` only sets the duration.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::{self, PhasePoint, Tolerance};
use crate::model::{
    critical_coupling, critical_velocity, dynamical_critical_fit, excitation_energy_np, excitation_energy_srp,
    rotated_critical_coupling, ModelParams,
};
use crate::quantum::{self, InitialKind, QuantumState};
use crate::trajectory::{Engine, Observable, Trajectory};

/// Revolutions used for time-averaged quantities.
pub const DEFAULT_AVERAGING_REVOLUTIONS: u32 = 150;
/// Revolutions used for final-time quantities.
pub const DEFAULT_FINAL_REVOLUTIONS: u32 = 1;
/// Samples per revolution when no count is given.
pub const SAMPLES_PER_REVOLUTION: usize = 100;
/// Time-averaged `⟨a†a⟩/j` above which a cell counts as photon-carrying.
pub const NONZERO_THRESHOLD: f64 = 1e-3;

/// Initial condition of a protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    StationaryDicke,
    StationaryCircle,
    Fock,
    NearlyFock { epsilon: f64 },
    /// Ground state of `H_D` (quantum engine only).
    GroundState,
    Explicit { alpha: Complex64, zeta: Complex64 },
}

impl InitialState {
    pub fn name(&self) -> &'static str {
        match self {
            InitialState::StationaryDicke => "stationary_dicke",
            InitialState::StationaryCircle => "stationary_circle",
            InitialState::Fock => "fock",
            InitialState::NearlyFock { .. } => "nearly_fock",
            InitialState::GroundState => "ground_state",
            InitialState::Explicit { .. } => "explicit",
        }
    }

    /// Coherent-state labels, or `None` for the ground state.
    pub fn coherent_labels(&self, params: &ModelParams) -> Option<(Complex64, Complex64)> {
        let kind = match *self {
            InitialState::StationaryDicke => InitialKind::StationaryDicke,
            InitialState::StationaryCircle => InitialKind::StationaryCircle,
            InitialState::Fock => InitialKind::Fock,
            InitialState::NearlyFock { epsilon } => {
                return Some(quantum::initial_state_params(InitialKind::NearlyFock, params, epsilon))
            }
            InitialState::GroundState => return None,
            InitialState::Explicit { alpha, zeta } => return Some((alpha, zeta)),
        };
        Some(quantum::initial_state_params(kind, params, 0.0))
    }
}

/// Boson cutoff adequate for the initial state of `initial` at `params`:
/// the coherent-state tail rule, with the stationary undriven amplitude
/// standing in for the ground state.
pub fn auto_n_max(initial: &InitialState, params: &ModelParams) -> usize {
    let alpha = initial
        .coherent_labels(params)
        .unwrap_or_else(|| quantum::initial_state_params(InitialKind::StationaryDicke, params, 0.0))
        .0;
    quantum::auto_n_max(alpha)
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub engine: Engine,
    pub initial: InitialState,
    pub driven: bool,
    pub n_revolutions: u32,
    pub sample_count: usize,
    pub observables: Vec<Observable>,
    pub params: ModelParams,
    pub tol: Tolerance,
}

pub fn default_sample_count(n_revolutions: u32) -> usize {
    SAMPLES_PER_REVOLUTION * n_revolutions as usize + 1
}

impl ProtocolSpec {
    /// Driven, one revolution, `⟨a†a⟩/j` only, default tolerances.
    pub fn new(engine: Engine, initial: InitialState, params: ModelParams) -> Self {
        ProtocolSpec {
            engine,
            initial,
            driven: true,
            n_revolutions: DEFAULT_FINAL_REVOLUTIONS,
            sample_count: default_sample_count(DEFAULT_FINAL_REVOLUTIONS),
            observables: vec![Observable::MeanPhotonScaled],
            params,
            tol: Tolerance::default(),
        }
    }

    /// Sets `n_R` and the matching default sample count.
    pub fn with_revolutions(mut self, n: u32) -> Self {
        self.n_revolutions = n;
        self.sample_count = default_sample_count(n);
        self
    }

    pub fn with_driven(mut self, driven: bool) -> Self {
        self.driven = driven;
        self
    }

    pub fn with_observables(mut self, observables: &[Observable]) -> Self {
        self.observables = observables.to_vec();
        self
    }

    pub fn with_params(mut self, params: ModelParams) -> Self {
        self.params = params;
        self
    }

    /// `t_f = n_R·2π/δφ`.
    pub fn final_time(&self) -> f64 {
        self.n_revolutions as f64 * 2.0 * std::f64::consts::PI / self.params.delta_phi
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.params.delta_phi > 0.0) {
            return Err(Error::domain(format!(
                "delta_phi must be > 0 to define t_f = n_R 2pi/delta_phi, got {}",
                self.params.delta_phi
            )));
        }
        if self.n_revolutions == 0 {
            return Err(Error::domain("n_revolutions must be >= 1"));
        }
        if self.sample_count < 2 {
            return Err(Error::TooFewSamples(self.sample_count));
        }
        if self.observables.is_empty() {
            return Err(Error::domain("at least one observable is required"));
        }
        if self.engine == Engine::Quantum && self.observables.contains(&Observable::ScaledParity) {
            return Err(Error::domain("scaled_parity is only defined for the meanfield engine"));
        }
        if self.engine == Engine::MeanField && self.initial == InitialState::GroundState {
            return Err(Error::domain("ground_state initial state needs the quantum engine"));
        }
        if let InitialState::NearlyFock { epsilon } = self.initial {
            if !epsilon.is_finite() {
                return Err(Error::domain("epsilon must be finite"));
            }
        }
        Ok(())
    }

    pub fn time_grid(&self) -> Vec<f64> {
        meanfield::uniform_grid(0.0, self.final_time(), self.sample_count)
    }
}

fn initial_quantum_state(spec: &ProtocolSpec) -> Result<QuantumState> {
    let p = &spec.params;
    match spec.initial.coherent_labels(p) {
        Some((alpha, zeta)) => quantum::coherent_state(alpha, zeta, p.j(), p.n_max),
        None => quantum::ground_state(p),
    }
}

/// Runs one protocol and attaches its observables.
pub fn run_protocol(spec: &ProtocolSpec) -> Result<Trajectory> {
    spec.validate()?;
    let p = spec.params;
    let mut trajectory = match spec.engine {
        Engine::MeanField => {
            let (alpha, zeta) = spec
                .initial
                .coherent_labels(&p)
                .ok_or_else(|| Error::domain("ground_state initial state needs the quantum engine"))?;
            let start = PhasePoint::from_coherent(alpha, zeta, p.j(), 0.0);
            let flow = if spec.driven { p } else { p.undriven() };
            let mut t = meanfield::integrate(start, &flow, spec.final_time(), spec.sample_count, spec.tol)?;
            t.attach_meanfield_observables(&spec.observables)?;
            t
        }
        Engine::Quantum => {
            let psi0 = initial_quantum_state(spec)?;
            quantum::evolve(&psi0, &p, &spec.time_grid(), &spec.observables, spec.driven)?
        }
    };
    trajectory.params = p;
    trajectory.driven = spec.driven;
    Ok(trajectory)
}

/// Driven and undriven runs of the same protocol on a shared time grid.
pub fn run_pair(spec: &ProtocolSpec) -> Result<(Trajectory, Trajectory)> {
    let driven = run_protocol(&spec.clone().with_driven(true))?;
    let undriven = run_protocol(&spec.clone().with_driven(false))?;
    Ok((driven, undriven))
}

/// Named sweep axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

/// Result of one grid point; failures carry the error message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum CellOutcome {
    /// Values aligned with the protocol's observables.
    Ok {
        final_values: Vec<f64>,
        time_averages: Vec<f64>,
    },
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    /// Axis values of this cell, in axis order.
    pub coordinates: Vec<f64>,
    pub outcome: CellOutcome,
}

impl SweepCell {
    pub fn time_average(&self, k: usize) -> Option<f64> {
        match &self.outcome {
            CellOutcome::Ok { time_averages, .. } => time_averages.get(k).copied(),
            CellOutcome::Failed { .. } => None,
        }
    }

    pub fn final_value(&self, k: usize) -> Option<f64> {
        match &self.outcome {
            CellOutcome::Ok { final_values, .. } => final_values.get(k).copied(),
            CellOutcome::Failed { .. } => None,
        }
    }

    /// Whether the time average of observable `k` exceeds
    /// [`NONZERO_THRESHOLD`].
    pub fn is_nonzero(&self, k: usize) -> Option<bool> {
        self.time_average(k).map(|v| v > NONZERO_THRESHOLD)
    }
}

/// Reference critical lines at one rotation velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overlay {
    pub delta_phi: f64,
    /// `√(ω(ω₀+δφ))/2`.
    pub rotated_critical_coupling: f64,
    /// `0.5 + 0.327·δφ^{3/4}`.
    pub dynamical_fit: f64,
}

/// Sweep output. Cells are ordered lexicographically by the axes, first
/// axis slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: Vec<Axis>,
    pub cells: Vec<SweepCell>,
    pub overlays: Vec<Overlay>,
    pub provenance: ProtocolSpec,
}

impl SweepResult {
    /// Cell at the multi-index `idx`.
    pub fn cell(&self, idx: &[usize]) -> &SweepCell {
        let mut flat = 0;
        for (axis, &i) in self.axes.iter().zip(idx) {
            flat = flat * axis.values.len() + i;
        }
        &self.cells[flat]
    }
}

fn check_axis(name: &str, values: &[f64], positive: bool) -> Result<()> {
    if values.is_empty() {
        return Err(Error::domain(format!("{name} sweep needs at least one value")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(format!("{name} values must be finite")));
    }
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain(format!("{name} values must increase strictly")));
    }
    if positive && values[0] <= 0.0 {
        return Err(Error::domain(format!("{name} values must be > 0, got {}", values[0])));
    }
    Ok(())
}

fn evaluate(spec: &ProtocolSpec) -> CellOutcome {
    let run = || -> Result<CellOutcome> {
        let t = run_protocol(spec)?;
        let final_values = spec
            .observables
            .iter()
            .map(|&o| t.final_value(o))
            .collect::<Result<_>>()?;
        let time_averages = spec
            .observables
            .iter()
            .map(|&o| t.time_average(o))
            .collect::<Result<_>>()?;
        Ok(CellOutcome::Ok {
            final_values,
            time_averages,
        })
    };
    run().unwrap_or_else(|e| CellOutcome::Failed { error: e.to_string() })
}

fn sweep(spec: &ProtocolSpec, axes: Vec<Axis>, configure: impl Fn(&[f64]) -> ModelParams + Sync) -> SweepResult {
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    let cells = points
        .into_par_iter()
        .map(|coordinates| {
            let cell_spec = spec.clone().with_params(configure(&coordinates));
            SweepCell {
                outcome: evaluate(&cell_spec),
                coordinates,
            }
        })
        .collect();
    SweepResult {
        axes,
        cells,
        overlays: Vec::new(),
        provenance: spec.clone(),
    }
}

/// `⟨·⟩` at the final time and time-averaged, for each `λ`.
pub fn sweep_lambda(spec: &ProtocolSpec, lambda_values: &[f64]) -> Result<SweepResult> {
    check_axis("lambda", lambda_values, false)?;
    spec.validate()?;
    let base = spec.params;
    Ok(sweep(
        spec,
        vec![Axis {
            name: "lambda".into(),
            values: lambda_values.to_vec(),
        }],
        |c| base.with_lambda(c[0]),
    ))
}

/// As [`sweep_lambda`] over rotation velocities `δφ > 0`.
pub fn sweep_velocity(spec: &ProtocolSpec, delta_phi_values: &[f64]) -> Result<SweepResult> {
    check_axis("delta_phi", delta_phi_values, true)?;
    let base = spec.params;
    spec.clone().with_params(base.with_delta_phi(delta_phi_values[0])).validate()?;
    Ok(sweep(
        spec,
        vec![Axis {
            name: "delta_phi".into(),
            values: delta_phi_values.to_vec(),
        }],
        |c| base.with_delta_phi(c[0]),
    ))
}

/// Two-dimensional `(λ, δφ)` grid with reference critical lines.
pub fn phase_diagram(spec: &ProtocolSpec, lambda_values: &[f64], delta_phi_values: &[f64]) -> Result<SweepResult> {
    check_axis("lambda", lambda_values, false)?;
    check_axis("delta_phi", delta_phi_values, true)?;
    let base = spec.params;
    spec.clone().with_params(base.with_delta_phi(delta_phi_values[0])).validate()?;
    let mut result = sweep(
        spec,
        vec![
            Axis {
                name: "lambda".into(),
                values: lambda_values.to_vec(),
            },
            Axis {
                name: "delta_phi".into(),
                values: delta_phi_values.to_vec(),
            },
        ],
        |c| base.with_lambda(c[0]).with_delta_phi(c[1]),
    );
    result.overlays = delta_phi_values
        .iter()
        .map(|&d| {
            Ok(Overlay {
                delta_phi: d,
                rotated_critical_coupling: rotated_critical_coupling(base.omega, base.omega0, d)?,
                dynamical_fit: dynamical_critical_fit(d)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(result)
}

/// Lower excitation branch and critical lines at one coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub lambda: f64,
    /// `ε₋` of the normal phase, present for `λ ≤ λ_c`.
    pub excitation_np: Option<f64>,
    /// `ε₋` of the super-radiant phase, present for `λ ≥ λ_c`.
    pub excitation_srp: Option<f64>,
    /// `4λ²/ω − ω₀`.
    pub critical_velocity: f64,
}

/// Equilibrium excitation spectrum over a coupling grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub omega: f64,
    pub omega0: f64,
    pub delta_phi: f64,
    pub critical_coupling: f64,
    pub rotated_critical_coupling: f64,
    pub points: Vec<SpectrumPoint>,
}

pub fn spectrum_curves(omega: f64, omega0: f64, delta_phi: f64, lambda_values: &[f64]) -> Result<SpectrumResult> {
    check_axis("lambda", lambda_values, false)?;
    let points = lambda_values
        .iter()
        .map(|&lambda| {
            Ok(SpectrumPoint {
                lambda,
                excitation_np: excitation_energy_np(omega, omega0, lambda).ok(),
                excitation_srp: excitation_energy_srp(omega, omega0, lambda).ok(),
                critical_velocity: critical_velocity(omega, omega0, lambda)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SpectrumResult {
        omega,
        omega0,
        delta_phi,
        critical_coupling: critical_coupling(omega, omega0)?,
        rotated_critical_coupling: rotated_critical_coupling(omega, omega0, delta_phi)?,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(lambda: f64, delta_phi: f64) -> ModelParams {
        ModelParams::new(1.0, 1.0, lambda, 6.0, delta_phi).unwrap()
    }

    #[test]
    fn circle_is_stationary_under_matching_drive() {
        let spec = ProtocolSpec::new(Engine::MeanField, InitialState::StationaryCircle, params(1.2, 1.0));
        let t = run_protocol(&spec).unwrap();
        let series = t.series(Observable::MeanPhotonScaled).unwrap();
        let first = series[0].1;
        assert!(first > 0.1);
        for (_, v) in series {
            assert!((v - first).abs() < 1e-8);
        }
    }

    #[test]
    fn mean_field_fock_stays_at_origin() {
        for driven in [true, false] {
            let spec = ProtocolSpec::new(Engine::MeanField, InitialState::Fock, params(1.3, 1.0))
                .with_driven(driven)
                .with_observables(&Observable::ALL);
            let t = run_protocol(&spec).unwrap();
            for s in &t.samples {
                assert_eq!(s.values, vec![0.0, 1.0, 1.0]);
            }
        }
    }

    #[test]
    fn quantum_fock_keeps_even_parity() {
        let p = ModelParams::new(1.0, 1.0, 1.0, 2.0, 1.0).unwrap().with_n_max(30);
        let spec = ProtocolSpec::new(Engine::Quantum, InitialState::Fock, p)
            .with_observables(&[Observable::Parity, Observable::MeanPhotonScaled]);
        let t = run_protocol(&spec).unwrap();
        for s in &t.samples {
            assert!((s.values[0] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn pair_shares_grid() {
        let spec = ProtocolSpec::new(Engine::MeanField, InitialState::StationaryDicke, params(1.0, 2.0));
        let (d, u) = run_pair(&spec).unwrap();
        assert_eq!(d.times(), u.times());
        assert!(d.driven && !u.driven);
        assert_eq!(*d.times().last().unwrap(), spec.final_time());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let base = ProtocolSpec::new(Engine::Quantum, InitialState::Fock, params(1.0, 1.0));
        assert!(base.clone().with_observables(&[Observable::ScaledParity]).validate().is_err());
        assert!(ProtocolSpec::new(Engine::MeanField, InitialState::GroundState, params(1.0, 1.0))
            .validate()
            .is_err());
        assert!(base.clone().with_params(params(1.0, 0.0)).validate().is_err());
        let mf = ProtocolSpec::new(Engine::MeanField, InitialState::Fock, params(1.0, 1.0));
        assert!(sweep_lambda(&mf, &[0.5, 0.4]).is_err());
        assert!(sweep_velocity(&mf, &[0.0, 1.0]).is_err());
        assert!(phase_diagram(&mf, &[], &[1.0]).is_err());
    }

    #[test]
    fn lambda_sweep_of_circle_follows_threshold() {
        let spec = ProtocolSpec::new(Engine::MeanField, InitialState::StationaryCircle, params(0.0, 1.0));
        let lambdas: Vec<f64> = (0..=12).map(|i| i as f64 * 0.1).collect();
        let r = sweep_lambda(&spec, &lambdas).unwrap();
        assert_eq!(r.cells.len(), lambdas.len());
        let threshold = rotated_critical_coupling(1.0, 1.0, 1.0).unwrap();
        for cell in &r.cells {
            let lambda = cell.coordinates[0];
            let x = 2.0 / (4.0 * lambda * lambda);
            let closed = if lambda > threshold { 0.5 * (2.0 * lambda).powi(2) * (1.0 - x * x) } else { 0.0 };
            assert!((cell.time_average(0).unwrap() - closed).abs() < 1e-7, "lambda {lambda}");
            assert_eq!(cell.is_nonzero(0).unwrap(), lambda > threshold);
        }
    }

    #[test]
    fn failed_cells_are_isolated() {
        // At λ = 3 the stationary amplitude needs far more than 30 Fock levels.
        let p = params(0.0, 1.0).with_n_max(30);
        let spec = ProtocolSpec::new(Engine::Quantum, InitialState::StationaryDicke, p);
        let r = sweep_lambda(&spec, &[0.3, 3.0]).unwrap();
        assert!(matches!(r.cells[0].outcome, CellOutcome::Ok { .. }));
        match &r.cells[1].outcome {
            CellOutcome::Failed { error } => assert!(error.contains("truncation")),
            other => panic!("expected a failed cell, got {other:?}"),
        }
        assert_eq!(r.cells[1].time_average(0), None);
    }

    #[test]
    fn phase_diagram_matches_single_sweep() {
        let spec = ProtocolSpec::new(Engine::MeanField, InitialState::StationaryCircle, params(0.0, 1.0));
        let grid = phase_diagram(&spec, &[0.6, 0.9], &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(grid.cells.len(), 6);
        assert_eq!(grid.overlays.len(), 3);
        assert_eq!(grid.cell(&[1, 2]).coordinates, vec![0.9, 2.0]);
        let single = sweep_lambda(&spec.clone().with_params(params(0.0, 2.0)), &[0.9]).unwrap();
        assert_eq!(grid.cell(&[1, 2]).outcome, single.cells[0].outcome);
        let again = phase_diagram(&spec, &[0.6, 0.9], &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(grid, again);
    }

    #[test]
    fn spectrum_switches_branch_at_threshold() {
        let r = spectrum_curves(1.0, 1.0, 1.0, &[0.2, 0.5, 0.9]).unwrap();
        assert_eq!(r.critical_coupling, 0.5);
        assert!(r.points[0].excitation_np.is_some() && r.points[0].excitation_srp.is_none());
        assert!(r.points[1].excitation_np.unwrap().abs() < 1e-6);
        assert!(r.points[1].excitation_srp.unwrap().abs() < 1e-6);
        assert!(r.points[2].excitation_np.is_none() && r.points[2].excitation_srp.is_some());
        assert!((r.points[2].critical_velocity - (4.0 * 0.81 - 1.0)).abs() < 1e-14);
    }
}
