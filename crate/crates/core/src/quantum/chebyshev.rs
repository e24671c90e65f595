use std::f64::consts::E;

use num_complex::Complex64;

use super::bessel::bessel_j_sequence;
use super::operators::{build_operators, OperatorSet};
use super::sparse::CsrMatrix;
use super::spectrum::{spectral_bounds, SpectralBounds};
use super::QuantumState;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::trajectory::{Engine, Observable, Sample, Trajectory};

/// Norm drift after one step beyond which propagation is aborted.
pub const NORM_TOLERANCE: f64 = 1e-8;
/// Magnitude below which a trailing expansion coefficient is negligible.
const COEFFICIENT_CUTOFF: f64 = 1e-16;

/// `a_k = (−i)^k e^{−i dt (E_max+E_min)/2} (2 − δ_{k0}) J_k(dt (E_max−E_min)/2)`
/// for `k = 0 … order`.
pub fn chebyshev_coefficients(dt: f64, e_min: f64, e_max: f64, order: usize) -> Vec<Complex64> {
    let x = 0.5 * dt * (e_max - e_min);
    let phase = Complex64::from_polar(1.0, -0.5 * dt * (e_max + e_min));
    let bessel = bessel_j_sequence(x.abs(), order);
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let mut minus_i_pow = Complex64::new(1.0, 0.0);
    bessel
        .iter()
        .enumerate()
        .map(|(k, &jk)| {
            let weight = if k == 0 { 1.0 } else { 2.0 };
            // J_k(−x) = (−1)^k J_k(x) for negative time steps.
            let jk = if k % 2 == 1 { sign * jk } else { jk };
            let a = minus_i_pow * phase * (weight * jk);
            minus_i_pow *= Complex64::new(0.0, -1.0);
            a
        })
        .collect()
}

/// Expansion order for one step: `⌈e·dt·ΔE/4⌉ + 20`, extended until the
/// trailing coefficient falls below `1e-16` past the Bessel turning point.
pub fn chebyshev_order(dt: f64, bounds: &SpectralBounds) -> usize {
    let x = 0.5 * dt.abs() * bounds.width();
    let base = (E * dt.abs() * bounds.width() / 4.0).ceil() as usize + 20;
    let reach = base + 40 + (2.0 * x).ceil() as usize;
    let bessel = bessel_j_sequence(x, reach);
    (base..=reach)
        .find(|&k| k as f64 > x && 2.0 * bessel[k].abs() < COEFFICIENT_CUTOFF)
        .unwrap_or(reach)
}

/// Precomputed expansion of `exp(−iH dt)` for one generator and step.
#[derive(Debug, Clone)]
pub struct ChebyshevPropagator<'a> {
    h: &'a CsrMatrix,
    bounds: SpectralBounds,
    dt: f64,
    coefficients: Vec<Complex64>,
}

impl<'a> ChebyshevPropagator<'a> {
    pub fn new(h: &'a CsrMatrix, bounds: SpectralBounds, dt: f64) -> Result<Self> {
        if !(bounds.e_max > bounds.e_min) {
            return Err(Error::domain(format!(
                "spectral bounds need E_max > E_min, got [{}, {}]",
                bounds.e_min, bounds.e_max
            )));
        }
        let order = chebyshev_order(dt, &bounds);
        Ok(ChebyshevPropagator {
            h,
            bounds,
            dt,
            coefficients: chebyshev_coefficients(dt, bounds.e_min, bounds.e_max, order),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `out = h x` with `h = (2H − (E_max+E_min))/(E_max−E_min)`.
    fn apply_scaled(&self, x: &[Complex64], out: &mut [Complex64]) {
        self.h.apply(x, out);
        let scale = 2.0 / self.bounds.width();
        let shift = 2.0 * self.bounds.centre() / self.bounds.width();
        out.iter_mut().zip(x).for_each(|(o, xi)| *o = *o * scale - xi * shift);
    }

    /// `Σ a_k T_k(h) ψ` by the three-term recurrence. The norm is checked,
    /// never silently restored.
    pub fn step(&self, psi: &QuantumState) -> Result<QuantumState> {
        let dim = psi.amplitudes.len();
        if dim != self.h.dim() {
            return Err(Error::domain(format!(
                "state dimension {dim} does not match operator dimension {}",
                self.h.dim()
            )));
        }
        let mut prev = psi.amplitudes.clone();
        let mut result: Vec<Complex64> = prev.iter().map(|x| x * self.coefficients[0]).collect();
        if self.coefficients.len() > 1 {
            let mut current = vec![Complex64::new(0.0, 0.0); dim];
            self.apply_scaled(&prev, &mut current);
            let a1 = self.coefficients[1];
            result.iter_mut().zip(&current).for_each(|(r, c)| *r += c * a1);
            let mut next = vec![Complex64::new(0.0, 0.0); dim];
            for &ak in &self.coefficients[2..] {
                self.apply_scaled(&current, &mut next);
                for i in 0..dim {
                    next[i] = 2.0 * next[i] - prev[i];
                    result[i] += next[i] * ak;
                }
                std::mem::swap(&mut prev, &mut current);
                std::mem::swap(&mut current, &mut next);
            }
        }
        let out = QuantumState {
            basis: psi.basis,
            amplitudes: result,
        };
        let drift = (out.norm() - psi.norm()).abs();
        if !(drift <= NORM_TOLERANCE) {
            return Err(Error::Propagation {
                norm: out.norm(),
                tolerance: NORM_TOLERANCE,
            });
        }
        Ok(out)
    }
}

/// One step `exp(−i H_ROT dt) ψ` with freshly computed spectral bounds.
pub fn chebyshev_step(ops: &OperatorSet, psi: &QuantumState, dt: f64) -> Result<QuantumState> {
    let bounds = spectral_bounds(&ops.h_rot)?;
    ChebyshevPropagator::new(&ops.h_rot, bounds, dt)?.step(psi)
}

fn record(ops: &OperatorSet, psi: &QuantumState, observables: &[Observable]) -> Result<Vec<f64>> {
    let j = ops.params.j();
    observables
        .iter()
        .map(|o| match o {
            Observable::MeanPhotonScaled => Ok(psi.expectation_diagonal(&ops.number) / j),
            Observable::Parity => Ok(psi.expectation_diagonal(&ops.parity)),
            Observable::ScaledParity => Err(Error::domain(
                "scaled_parity is a mean-field observable; the quantum engine reports parity",
            )),
        })
        .collect()
}

/// Evolves `psi0` over `t_grid` (starting at `t_grid[0]`) with one Chebyshev
/// step per sample. Driven runs use `H_ROT`; `a†a` and `Π` commute with the
/// frame rotation, so the recorded values are the laboratory-frame ones.
/// Undriven runs use `H_D`.
pub fn evolve(
    psi0: &QuantumState,
    params: &ModelParams,
    t_grid: &[f64],
    observables: &[Observable],
    driven: bool,
) -> Result<Trajectory> {
    if psi0.basis.two_j != params.two_j || psi0.basis.n_max != params.n_max {
        return Err(Error::domain(format!(
            "state basis (2j = {}, n_max = {}) does not match parameters (2j = {}, n_max = {})",
            psi0.basis.two_j, psi0.basis.n_max, params.two_j, params.n_max
        )));
    }
    let ops = build_operators(params)?;
    evolve_with(&ops, psi0, t_grid, observables, driven)
}

/// [`evolve`] on an already built operator set.
pub fn evolve_with(
    ops: &OperatorSet,
    psi0: &QuantumState,
    t_grid: &[f64],
    observables: &[Observable],
    driven: bool,
) -> Result<Trajectory> {
    if t_grid.is_empty() {
        return Err(Error::TooFewSamples(0));
    }
    if let Some(w) = t_grid.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::domain(format!(
            "time grid must increase strictly ({} then {})",
            w[0], w[1]
        )));
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::domain(format!(
            "initial state must be normalised, norm = {}",
            psi0.norm()
        )));
    }
    let h = ops.generator(driven);
    let bounds = spectral_bounds(h)?;
    let mut psi = psi0.clone();
    let mut samples = Vec::with_capacity(t_grid.len());
    samples.push(Sample {
        t: t_grid[0],
        point: None,
        values: record(ops, &psi, observables)?,
    });
    let mut propagator: Option<ChebyshevPropagator> = None;
    for w in t_grid.windows(2) {
        let dt = w[1] - w[0];
        if propagator.as_ref().is_none_or(|p| p.dt() != dt) {
            propagator = Some(ChebyshevPropagator::new(h, bounds, dt)?);
        }
        psi = propagator.as_ref().unwrap().step(&psi)?;
        samples.push(Sample {
            t: w[1],
            point: None,
            values: record(ops, &psi, observables)?,
        });
    }
    Ok(Trajectory {
        params: ops.params,
        engine: Engine::Quantum,
        driven,
        observables: observables.to_vec(),
        samples,
    })
}
