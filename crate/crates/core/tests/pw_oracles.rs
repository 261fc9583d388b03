mod common;

use common::{evolve, rng, taylor_expm};
use proptest::prelude::*;
use qtime_core::linalg::{Operator, StateVector};
use qtime_core::pw::{
    condition_on_clock, condition_on_clocks, constraint_residual, dual_constraint_states,
    dual_constraints, history_state, interaction_kernel, local_eom_residuals, physical_states,
    total_hamiltonian, two_clock_history_state, verify_nonlocal_eom, ClockModel, InteractionSpec,
    KinematicalState,
};
use qtime_core::random;

fn qubit_h() -> Operator {
    Operator::diagonal(&[0.0, 1.0])
}

fn plus() -> StateVector {
    StateVector::from_real(&[1.0, 1.0]).normalized().unwrap()
}

fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

#[test]
fn time_states_match_fourier_formula() {
    let clock = ClockModel::ideal(6, 0.7).unwrap();
    let d = clock.dim() as f64;
    for k in 0..clock.dim() {
        let want = StateVector::new(
            clock
                .energies()
                .iter()
                .map(|&e| num_complex::Complex64::from_polar(1.0 / d.sqrt(), -e * clock.times()[k]))
                .collect(),
        );
        assert!(clock.time_state(k).fidelity(&want) > 1.0 - 1e-13);
    }
}

#[test]
fn clock_covariance() {
    for (dim, omega) in [(5, 1.0), (8, 0.5), (16, 2.0)] {
        let clock = ClockModel::ideal(dim, omega).unwrap();
        let step = taylor_expm(clock.hamiltonian(), clock.time_step());
        for k in 0..dim {
            let moved = step.apply(clock.time_state(k));
            assert!(moved.max_abs_diff(clock.time_state((k + 1) % dim)) < 1e-10);
        }
    }
}

#[test]
fn schrodinger_recovery_against_taylor_oracle() {
    let clock = ClockModel::ideal(32, 1.0).unwrap();
    let h_r = qubit_h();
    let psi0 = plus();
    let state = history_state(&clock, &h_r, &psi0).unwrap();
    let h_t = total_hamiltonian(&clock, &h_r, None).unwrap();
    assert!(constraint_residual(&h_t, &state).unwrap() <= 1e-10);
    for (k, &t) in clock.times().iter().enumerate() {
        let conditioned = condition_on_clock(&state, &clock, k).unwrap().normalized().unwrap();
        assert!(conditioned.fidelity(&evolve(&h_r, t, &psi0)) >= 1.0 - 1e-10);
    }
}

#[test]
fn kernel_is_hermitian_for_random_interactions() {
    let mut r = rng(11);
    let clock = ClockModel::ideal(4, 1.0).unwrap();
    for _ in 0..5 {
        let h_int = random::hermitian(&mut r, 8, 0.3);
        let inter = InteractionSpec::new(&clock, 2, h_int, false).unwrap();
        let kernel = interaction_kernel(&clock, &inter).unwrap();
        for k in 0..4 {
            for l in 0..4 {
                assert!(kernel.block(k, l).max_abs_diff(&kernel.block(l, k).dagger()) < 1e-10);
            }
        }
    }
}

#[test]
fn superpositions_of_physical_states_satisfy_the_constraint() {
    let clock = ClockModel::ideal(8, 1.0).unwrap();
    let h_r = Operator::diagonal(&[0.0, 1.0, 2.0]);
    let h_t = total_hamiltonian(&clock, &h_r, None).unwrap();
    let space = history_state(&clock, &h_r, &StateVector::basis(3, 0)).unwrap().space;
    let tol = 1e-10;
    let kernel = physical_states(&h_t, &space, tol).unwrap();
    assert_eq!(kernel.len(), 3);
    let mut r = rng(5);
    for _ in 0..10 {
        let coeffs = random::state(&mut r, kernel.len());
        let mix = kernel
            .iter()
            .zip(coeffs.amplitudes())
            .fold(StateVector::zeros(space.dim()), |acc, (s, &a)| &acc + &s.psi.scale(a));
        let state = KinematicalState::new(space.clone(), mix).unwrap();
        assert!(constraint_residual(&h_t, &state).unwrap() <= tol * 10.0);
    }
}

#[test]
fn nonlocal_eom_converges_at_second_order() {
    let h_r = qubit_h();
    let worst: Vec<f64> = [16, 32, 64]
        .into_iter()
        .map(|d| {
            let clock = ClockModel::ideal(d, 1.0).unwrap();
            let state = history_state(&clock, &h_r, &plus()).unwrap();
            max(&verify_nonlocal_eom(&state, &clock, &h_r, None).unwrap())
        })
        .collect();
    for w in worst.windows(2) {
        assert!(w[0] / w[1] >= 3.5, "ratios {worst:?}");
    }
}

#[test]
fn time_diagonal_interaction_local_and_nonlocal_agree() {
    let clock = ClockModel::ideal(16, 1.0).unwrap();
    let h_r = qubit_h();
    let potentials: Vec<Operator> = (0..16)
        .map(|k| Operator::diagonal(&[0.1 * (k as f64 * 0.4).sin(), -0.05 * k as f64 / 16.0]))
        .collect();
    let inter = InteractionSpec::time_diagonal(&clock, &potentials).unwrap();
    let mut r = rng(3);
    let states = [
        history_state(&clock, &h_r, &plus()).unwrap(),
        KinematicalState::new(
            history_state(&clock, &h_r, &plus()).unwrap().space,
            random::state(&mut r, 32),
        )
        .unwrap(),
    ];
    for state in &states {
        let nonlocal = verify_nonlocal_eom(state, &clock, &h_r, Some(&inter)).unwrap();
        let local = local_eom_residuals(state, &clock, &h_r, &inter).unwrap();
        for (a, b) in nonlocal.iter().zip(&local) {
            assert!((a - b).abs() <= 1e-10);
        }
    }
}

#[test]
fn dual_clock_keldysh_structure() {
    let cf = ClockModel::ideal(8, 1.0).unwrap();
    let cb = ClockModel::ideal(8, 1.0).unwrap();
    let h_r = qubit_h();
    let (hf, hb) = dual_constraints(&cf, &cb, &h_r).unwrap();
    assert!(hf.commutator(&hb).frobenius_norm() <= 1e-10);
    let kernel = dual_constraint_states(&cf, &cb, &h_r, 1e-10).unwrap();
    assert!(!kernel.is_empty());
    for s in &kernel {
        assert!(hf.apply(&s.psi).norm() <= 1e-9);
        assert!(hb.apply(&s.psi).norm() <= 1e-9);
    }

    let psi0 = plus();
    let state = two_clock_history_state(&cf, &cb, &h_r, &psi0).unwrap();
    assert!(hf.apply(&state.psi).norm() <= 1e-10);
    assert!(hb.apply(&state.psi).norm() <= 1e-10);
    for (k, &tk) in cf.times().iter().enumerate() {
        for (l, &tl) in cb.times().iter().enumerate() {
            let got = condition_on_clocks(&state, &cf, &cb, k, l).unwrap().normalized().unwrap();
            let want = evolve(&h_r, tk, &evolve(&h_r, -tl, &psi0));
            assert!(got.fidelity(&want) >= 1.0 - 1e-8);
        }
        let diag = condition_on_clocks(&state, &cf, &cb, k, k).unwrap().normalized().unwrap();
        assert!(diag.fidelity(&psi0) >= 1.0 - 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn recovery_holds_for_random_initial_states(seed in any::<u64>(), d in 4usize..20, levels in 2usize..4) {
        let clock = ClockModel::ideal(d, 1.0).unwrap();
        let h_r = Operator::diagonal(&(0..levels).map(|n| n as f64).collect::<Vec<_>>());
        let psi0 = random::state(&mut rng(seed), levels);
        let state = history_state(&clock, &h_r, &psi0).unwrap();
        for (k, &t) in clock.times().iter().enumerate() {
            let got = condition_on_clock(&state, &clock, k).unwrap().normalized().unwrap();
            prop_assert!(got.fidelity(&evolve(&h_r, t, &psi0)) >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn kernel_hermiticity_property(seed in any::<u64>(), d_c in 2usize..5, d_r in 1usize..3) {
        let clock = ClockModel::ideal(d_c, 1.0).unwrap();
        let h_int = random::hermitian(&mut rng(seed), d_c * d_r, 1.0);
        let kernel = interaction_kernel(&clock, &InteractionSpec::new(&clock, d_r, h_int, false).unwrap()).unwrap();
        for k in 0..d_c {
            for l in 0..d_c {
                prop_assert!(kernel.block(k, l).max_abs_diff(&kernel.block(l, k).dagger()) < 1e-10);
            }
        }
    }
}

#[test]
fn rescaled_clock_still_covariant() {
    let clock = ClockModel::ideal(7, 1.3).unwrap();
    let u = taylor_expm(clock.hamiltonian(), 3.0 * clock.time_step());
    let moved = u.apply(clock.time_state(5));
    assert!(moved.fidelity(clock.time_state(1)) > 1.0 - 1e-12);
    assert!((clock.time_step() - 2.0 * std::f64::consts::PI / (7.0 * 1.3)).abs() < 1e-15);
}
