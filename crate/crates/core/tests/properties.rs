//! Property tests for the model, mean-field, quantum and experiment layers.

use std::f64::consts::{PI, SQRT_2};

use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;
use proptest::prelude::*;

use rotdicke::experiments::{
    auto_n_max, phase_diagram, run_pair, run_protocol, sweep_lambda, InitialState, ProtocolSpec,
};
use rotdicke::meanfield::{self, classical_hamiltonian, eom_rhs, hp_rhs, PhasePoint, Tolerance};
use rotdicke::model::{
    critical_coupling, excitation_energy_np, excitation_energy_srp, fixed_points, rotated_critical_coupling,
    ModelParams,
};
use rotdicke::quantum::{
    build_operators, chebyshev_step, coherent_state, spectral_bounds, Basis, ChebyshevPropagator, QuantumState,
};
use rotdicke::{Engine, Observable};

fn state_from(basis: Basis, raw: &[(f64, f64)]) -> QuantumState {
    let amps = (0..basis.dim()).map(|i| Complex64::new(raw[i].0, raw[i].1)).collect();
    QuantumState::new(basis, amps).unwrap().normalized().unwrap()
}

fn amplitudes(dim: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim)
}

/// Point strictly inside the spin chart, away from the boundary.
fn in_domain(j: f64, r_frac: f64, theta: f64, q2: f64, p2: f64, t: f64) -> PhasePoint {
    let r = (r_frac * 4.0 * j).sqrt();
    PhasePoint::new(t, r * theta.cos(), r * theta.sin(), q2, p2)
}

proptest! {
    #[test]
    fn gap_closes_on_the_critical_line(omega in 0.05..10.0f64, omega0 in 0.05..10.0f64) {
        let lc = critical_coupling(omega, omega0).unwrap();
        prop_assert!(excitation_energy_np(omega, omega0, lc).unwrap().abs() <= 1e-12);
        prop_assert!(excitation_energy_srp(omega, omega0, lc).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn critical_line_forms_are_inverse(omega in 0.05..10.0f64, omega0 in 0.05..10.0f64, dphi in -0.04..10.0f64) {
        let lc = rotated_critical_coupling(omega, omega0, dphi).unwrap();
        prop_assert!((lc * lc * 4.0 / omega - omega0 - dphi).abs() <= 1e-12 * (1.0 + omega0 + dphi.abs()));
    }

    #[test]
    fn origin_stability_flips_at_threshold(omega in 0.1..5.0f64, omega0 in 0.1..5.0f64, dphi in 0.0..5.0f64, t in 0.0..10.0f64) {
        let lc = rotated_critical_coupling(omega, omega0, dphi).unwrap();
        let below = ModelParams::new(omega0, omega, lc * (1.0 - 1e-6), 6.0, dphi).unwrap();
        let above = below.with_lambda(lc * (1.0 + 1e-6));
        prop_assert!(fixed_points(&below, t)[0].is_stable());
        prop_assert!(!fixed_points(&above, t)[0].is_stable());
    }

    #[test]
    fn circle_points_are_mirror_images(omega in 0.1..5.0f64, omega0 in 0.1..5.0f64, dphi in 0.0..5.0f64, excess in 1.01..4.0f64, t in 0.0..10.0f64) {
        let lc = rotated_critical_coupling(omega, omega0, dphi).unwrap();
        let p = ModelParams::new(omega0, omega, lc * excess, 6.0, dphi).unwrap();
        let [_, c2, c3] = fixed_points(&p, t);
        let (a, b) = (c2.coordinates.unwrap(), c3.coordinates.unwrap());
        prop_assert_eq!((b.q1, b.p1, b.q2), (-a.q1, -a.p1, -a.q2));
        prop_assert_eq!((a.p2, b.p2), (0.0, 0.0));
    }

    #[test]
    fn eom_and_hp_describe_the_same_flow(
        two_j in 1u32..40, omega in 0.1..3.0f64, omega0 in 0.1..3.0f64, lambda in 0.0..2.5f64, dphi in 0.0..3.0f64,
        r_frac in 0.0..0.99f64, theta in 0.0..(2.0 * PI), q2 in -4.0..4.0f64, p2 in -4.0..4.0f64, t in 0.0..50.0f64,
    ) {
        let p = ModelParams::new(omega0, omega, lambda, two_j as f64 / 2.0, dphi).unwrap();
        let x = in_domain(p.j(), r_frac, theta, q2, p2, t);
        let f = eom_rhs(&x, t, &p).unwrap();
        let (da, db) = hp_rhs(Complex64::new(x.q2, x.p2) / SQRT_2, Complex64::new(x.q1, x.p1) / SQRT_2, t, &p).unwrap();
        let g = [SQRT_2 * db.re, SQRT_2 * db.im, SQRT_2 * da.re, SQRT_2 * da.im];
        let scale = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (a, b) in f.iter().zip(&g) {
            prop_assert!((a - b).abs() <= 1e-12 * scale.max(1e-300));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn undriven_energy_is_conserved(
        lambda in 0.1..1.5f64, r_frac in 0.0..0.8f64, theta in 0.0..(2.0 * PI), q2 in -2.0..2.0f64, p2 in -2.0..2.0f64,
    ) {
        let p = ModelParams::new(1.0, 1.0, lambda, 6.0, 0.0).unwrap();
        let start = in_domain(p.j(), r_frac, theta, q2, p2, 0.0);
        let e0 = classical_hamiltonian(&start, 0.0, &p).unwrap();
        let tol = Tolerance { rtol: 1e-12, atol: 1e-14 };
        let traj = meanfield::integrate(start, &p, 50.0, 201, tol).unwrap();
        for s in &traj.samples {
            let e = classical_hamiltonian(s.point.as_ref().unwrap(), s.t, &p).unwrap();
            prop_assert!((e - e0).abs() < 1e-8 * e0.abs().max(1.0));
        }
    }

    #[test]
    fn integration_stays_on_the_sphere(
        lambda in 0.0..2.0f64, dphi in 0.0..3.0f64, r_frac in 0.0..0.95f64, theta in 0.0..(2.0 * PI),
        q2 in -3.0..3.0f64, p2 in -3.0..3.0f64,
    ) {
        let p = ModelParams::new(1.0, 1.0, lambda, 3.0, dphi).unwrap();
        let start = in_domain(p.j(), r_frac, theta, q2, p2, 0.0);
        if let Ok(traj) = meanfield::integrate(start, &p, 30.0, 301, Tolerance::default()) {
            for s in &traj.samples {
                prop_assert!(s.point.unwrap().spin_radius_sq() <= 4.0 * p.j());
            }
        }
    }

    #[test]
    fn origin_perturbations_grow_only_above_threshold(dphi in 0.0..2.0f64, angle in 0.0..(2.0 * PI)) {
        let lc = rotated_critical_coupling(1.0, 1.0, dphi).unwrap();
        for (factor, grows) in [(0.9, false), (1.1, true)] {
            let p = ModelParams::new(1.0, 1.0, lc * factor, 6.0, dphi).unwrap();
            let start = PhasePoint::new(0.0, 1e-4 * angle.cos(), 1e-4 * angle.sin(), 1e-4 * angle.sin(), 0.0);
            let traj = meanfield::integrate(start, &p, 50.0, 501, Tolerance::default()).unwrap();
            let peak = traj.samples.iter().map(|s| {
                let y = s.point.unwrap().to_array();
                y.iter().map(|v| v * v).sum::<f64>().sqrt()
            }).fold(0.0, f64::max);
            prop_assert_eq!(peak > 1e-2, grows, "lambda = {}, peak = {}", lc * factor, peak);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn chebyshev_step_matches_dense_exponential(
        two_j in 1u32..=4, lambda in 0.0..1.5f64, dphi in 0.0..2.0f64, dt_index in 0usize..3, raw in amplitudes(5 * 9),
    ) {
        let dt = [0.01, 0.1, 1.0][dt_index];
        let p = ModelParams::new(1.0, 1.0, lambda, two_j as f64 / 2.0, dphi).unwrap().with_n_max(8);
        let ops = build_operators(&p).unwrap();
        let psi = state_from(ops.basis, &raw);
        let (e, v) = ops.h_rot.to_dense().eigh(UPLO::Lower).unwrap();
        let dim = ops.dim();
        let exact: Vec<Complex64> = (0..dim).map(|r| {
            (0..dim).map(|col| {
                let proj: Complex64 = (0..dim).map(|k| v[[k, col]] * psi.amplitudes[k]).sum();
                proj * Complex64::from_polar(1.0, -e[col] * dt) * v[[r, col]]
            }).sum()
        }).collect();
        let cheb = chebyshev_step(&ops, &psi, dt).unwrap();
        for (a, b) in cheb.amplitudes.iter().zip(&exact) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn norm_is_conserved_over_many_steps(
        two_j in 1u32..=4, lambda in 0.0..1.5f64, dphi in 0.0..2.0f64, dt in 0.01..1.0f64, raw in amplitudes(5 * 9),
    ) {
        let p = ModelParams::new(1.0, 1.0, lambda, two_j as f64 / 2.0, dphi).unwrap().with_n_max(8);
        let ops = build_operators(&p).unwrap();
        let prop = ChebyshevPropagator::new(&ops.h_rot, spectral_bounds(&ops.h_rot).unwrap(), dt).unwrap();
        let mut psi = state_from(ops.basis, &raw);
        for _ in 0..1000 {
            psi = prop.step(&psi).unwrap();
        }
        prop_assert!((psi.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rotating_hamiltonian_commutes_with_parity(
        two_j in 1u32..=12, n_max in 1usize..30, omega in 0.1..3.0f64, omega0 in 0.1..3.0f64, lambda in 0.0..2.0f64, dphi in 0.0..3.0f64,
    ) {
        let p = ModelParams::new(omega0, omega, lambda, two_j as f64 / 2.0, dphi).unwrap().with_n_max(n_max);
        let ops = build_operators(&p).unwrap();
        // Π is diagonal, so [H, Π]_rc = H_rc (Π_c − Π_r).
        let worst = ops.h_rot.triplets().map(|(r, c, v)| (v * (ops.parity[c] - ops.parity[r])).abs()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-13);
    }

    #[test]
    fn spectral_bounds_enclose_the_spectrum(
        two_j in 1u32..=8, n_max in 2usize..40, lambda in 0.0..2.0f64, dphi in 0.0..3.0f64, driven in any::<bool>(),
    ) {
        let p = ModelParams::new(1.0, 1.0, lambda, two_j as f64 / 2.0, dphi).unwrap().with_n_max(n_max);
        let ops = build_operators(&p).unwrap();
        let h = ops.generator(driven);
        let b = spectral_bounds(h).unwrap();
        let e = h.to_dense().eigh(UPLO::Lower).unwrap().0;
        let (lo, hi) = (e[0], e[e.len() - 1]);
        prop_assert!(b.e_min <= lo + 1e-12 * (1.0 + lo.abs()));
        prop_assert!(b.e_max >= hi - 1e-12 * (1.0 + hi.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn extra_fock_levels_do_not_change_photon_number(
        two_j in 1u32..=4, lambda in 0.2..1.2f64, ar in -1.5..1.5f64, ai in -1.5..1.5f64, zr in -1.0..1.0f64, zi in -1.0..1.0f64,
    ) {
        let base = ModelParams::new(1.0, 1.0, lambda, two_j as f64 / 2.0, 1.0).unwrap();
        let initial = InitialState::Explicit { alpha: Complex64::new(ar, ai), zeta: Complex64::new(zr, zi) };
        let n = auto_n_max(&initial, &base);
        let run = |n_max: usize| {
            let spec = ProtocolSpec::new(Engine::Quantum, initial, base.with_n_max(n_max));
            run_protocol(&spec).unwrap().series(Observable::MeanPhotonScaled).unwrap()
        };
        let (a, b) = (run(n), run(n + n / 4));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.1 - y.1).abs() < 1e-8, "t = {}: {} vs {}", x.0, x.1, y.1);
        }
    }

    #[test]
    fn identical_specs_give_identical_sweeps(lambda0 in 0.3..1.2f64, dphi in 0.5..2.0f64, quantum in any::<bool>()) {
        let engine = if quantum { Engine::Quantum } else { Engine::MeanField };
        let p = ModelParams::new(1.0, 1.0, lambda0, 1.0, dphi).unwrap().with_n_max(40);
        let spec = ProtocolSpec::new(engine, InitialState::NearlyFock { epsilon: 2.0 }, p)
            .with_observables(&Observable::ALL[..2]);
        let lambdas = [lambda0, lambda0 + 0.1, lambda0 + 0.2];
        let a = sweep_lambda(&spec, &lambdas).unwrap();
        let b = sweep_lambda(&spec, &lambdas).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn driven_and_undriven_runs_share_their_grid(
        lambda in 0.2..1.5f64, dphi in 0.3..3.0f64, n_rev in 1u32..4, quantum in any::<bool>(),
    ) {
        let engine = if quantum { Engine::Quantum } else { Engine::MeanField };
        let p = ModelParams::new(1.0, 1.0, lambda, 1.0, dphi).unwrap().with_n_max(30);
        let spec = ProtocolSpec::new(engine, InitialState::Fock, p).with_revolutions(n_rev);
        let (driven, undriven) = run_pair(&spec).unwrap();
        prop_assert_eq!(driven.times(), undriven.times());
        prop_assert_eq!(*driven.times().last().unwrap(), spec.final_time());
        prop_assert!((spec.final_time() - n_rev as f64 * 2.0 * PI / dphi).abs() < 1e-12 * spec.final_time());
    }

    #[test]
    fn circle_sweep_boundary_matches_rotated_coupling(omega in 0.5..2.0f64, omega0 in 0.5..2.0f64, dphi in 0.2..2.0f64) {
        let lc = rotated_critical_coupling(omega, omega0, dphi).unwrap();
        let step = 0.02;
        let lambdas: Vec<f64> = (0..120).map(|i| 0.1 + step * i as f64).filter(|l| (l - lc).abs() < 0.2).collect();
        let p = ModelParams::new(omega0, omega, lambdas[0], 6.0, dphi).unwrap();
        let spec = ProtocolSpec::new(Engine::MeanField, InitialState::StationaryCircle, p).with_revolutions(2);
        let sweep = sweep_lambda(&spec, &lambdas).unwrap();
        let first_nonzero = sweep.cells.iter().position(|c| c.is_nonzero(0).unwrap()).unwrap();
        prop_assert!(sweep.cells[first_nonzero..].iter().all(|c| c.is_nonzero(0).unwrap()));
        prop_assert!(first_nonzero > 0);
        let boundary = 0.5 * (lambdas[first_nonzero - 1] + lambdas[first_nonzero]);
        prop_assert!((boundary - lc).abs() <= step, "boundary {} vs {}", boundary, lc);
    }
}

#[test]
fn phase_diagram_cells_are_sorted_by_axes() {
    let p = ModelParams::new(1.0, 1.0, 0.5, 6.0, 1.0).unwrap();
    let spec = ProtocolSpec::new(Engine::MeanField, InitialState::StationaryCircle, p);
    let r = phase_diagram(&spec, &[0.4, 0.8, 1.2], &[0.5, 1.5]).unwrap();
    assert_eq!(r.cells.len(), 6);
    let coords: Vec<_> = r.cells.iter().map(|c| (c.coordinates[0], c.coordinates[1])).collect();
    let mut sorted = coords.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(coords, sorted);
}

#[test]
fn quantum_tracks_mean_field_at_strong_coupling() {
    for lambda in [1.0, 1.5] {
        for initial in [InitialState::StationaryDicke, InitialState::StationaryCircle] {
            let base = ModelParams::new(1.0, 1.0, lambda, 12.0, 1.0).unwrap();
            let p = base.with_n_max(auto_n_max(&initial, &base));
            let q = run_protocol(&ProtocolSpec::new(Engine::Quantum, initial, p)).unwrap();
            let m = run_protocol(&ProtocolSpec::new(Engine::MeanField, initial, p)).unwrap();
            let gap = (q.time_average(Observable::MeanPhotonScaled).unwrap()
                - m.time_average(Observable::MeanPhotonScaled).unwrap())
            .abs();
            assert!(gap < 0.1, "{} at lambda = {lambda}: gap {gap}", initial.name());
        }
    }
}

#[test]
fn ground_state_is_vacuum_without_coupling() {
    let p = ModelParams::new(1.0, 1.0, 0.0, 3.0, 1.0).unwrap().with_n_max(10);
    let gs = rotdicke::quantum::ground_state(&p).unwrap();
    let vac = coherent_state(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 3.0, 10).unwrap();
    assert!((gs.inner(&vac).norm() - 1.0).abs() < 1e-12);
}
