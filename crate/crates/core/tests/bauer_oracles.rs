mod common;

use common::{fourier_time_operator, fourier_time_state, rng, taylor_expm};
use proptest::prelude::*;
use qtime_core::bauer::{
    commutator_residual, derivative_time_operator, drift_check, extended_hamiltonian,
    fb_projectors, pseudospin_hamiltonian, q_commutator_residual, q_operator, shift_operator,
    time_operator, Branch, EnergyLattice, ExtendedState,
};
use qtime_core::linalg::{c, matexp_hermitian, Operator, StateVector, I};
use rand::Rng;

/// Calibrated bound for `σ = 8δ` packets at `2M = 256`.
const COMMUTATOR_THRESHOLD: f64 = 1e-9;

fn centered_packet(lattice: EnergyLattice, sigma_steps: f64) -> ExtendedState {
    ExtendedState::wavepacket(lattice, 0.0, sigma_steps * lattice.delta()).unwrap()
}

/// `‖(T H − H T − i)ψ‖` from dense products of the Fourier-formula time
/// operator and the diagonal extended Hamiltonian.
fn brute_force_commutator(half_size: usize, delta: f64, psi: &StateVector) -> f64 {
    let t = fourier_time_operator(half_size, delta);
    let energies: Vec<f64> = (0..2 * half_size)
        .map(|i| (i as f64 - half_size as f64) * delta)
        .collect();
    let h = Operator::diagonal(&energies);
    let comm = &(&t * &h) - &(&h * &t);
    (&comm.apply(psi) - &psi.scale(I)).norm()
}

#[test]
fn time_operator_matches_fourier_oracle() {
    for (m, delta) in [(4, 0.5), (16, 1.0), (32, 0.25)] {
        let lattice = EnergyLattice::new(m, delta).unwrap();
        let t = time_operator(lattice);
        assert!(t.operator().max_abs_diff(&fourier_time_operator(m, delta)) < 1e-10);
        let mut values = t.values().to_vec();
        values.sort_by(f64::total_cmp);
        for (k, v) in values.iter().enumerate() {
            let (want, _) = fourier_time_state(m, delta, k as i64 - m as i64);
            assert!((v - want).abs() < 1e-12);
        }
    }
}

#[test]
fn time_eigenbasis_is_complete() {
    let lattice = EnergyLattice::new(32, 1.0).unwrap();
    let t = time_operator(lattice);
    let sum = (0..lattice.dim()).fold(Operator::zeros(64, 64), |acc, n| &acc + &t.eigenstate(n).projector());
    assert!(sum.max_abs_diff(&Operator::identity(64)) < 1e-12);
    for n in 0..lattice.dim() {
        for a in t.eigenstate(n).amplitudes() {
            assert!((a.norm() - 1.0 / 8.0).abs() < 1e-12);
        }
    }
}

#[test]
fn shift_group_on_random_pairs() {
    let lattice = EnergyLattice::new(32, 0.5).unwrap();
    let id = Operator::identity(lattice.dim());
    let mut r = rng(2024);
    assert!(shift_operator(lattice, 0.0).unwrap().max_abs_diff(&id) < 1e-12);
    for _ in 0..20 {
        let m1 = r.random_range(-100i64..100);
        let m2 = r.random_range(-100i64..100);
        let (e1, e2) = (m1 as f64 * 0.5, m2 as f64 * 0.5);
        let d1 = shift_operator(lattice, e1).unwrap();
        let d2 = shift_operator(lattice, e2).unwrap();
        let neg = shift_operator(lattice, -e1).unwrap();
        assert!((&d1 * &d1.dagger()).max_abs_diff(&id) < 1e-12);
        assert!((&d1.dagger() * &d1).max_abs_diff(&id) < 1e-12);
        assert!(d1.dagger().max_abs_diff(&neg) < 1e-12);
        assert!((&d1 * &neg).max_abs_diff(&id) < 1e-12);
        let sum = shift_operator(lattice, e1 + e2).unwrap();
        assert!((&d1 * &d2).max_abs_diff(&sum) < 1e-12);
    }
}

#[test]
fn shift_moves_energy_levels_down() {
    let lattice = EnergyLattice::new(4, 1.0).unwrap();
    let d = shift_operator(lattice, 2.0).unwrap();
    for i in 0..8 {
        let moved = d.apply(&StateVector::basis(8, i));
        assert!((moved.amplitudes()[(i + 6) % 8] - c(1.0, 0.0)).norm() < 1e-15);
    }
    assert!(shift_operator(lattice, 0.3).is_err());
}

#[test]
fn exact_stone_relation_for_every_lattice_shift() {
    let lattice = EnergyLattice::new(32, 1.0).unwrap();
    let t = time_operator(lattice);
    for m in -32i64..32 {
        let eps = m as f64;
        let stone = matexp_hermitian(t.operator(), eps).unwrap();
        assert!(stone.max_abs_diff(&shift_operator(lattice, eps).unwrap()) < 1e-10, "m = {m}");
    }
    let small = EnergyLattice::new(4, 0.5).unwrap();
    let oracle = taylor_expm(time_operator(small).operator(), 1.5);
    assert!(oracle.max_abs_diff(&shift_operator(small, 1.5).unwrap()) < 1e-10);
}

#[test]
fn derivative_form_approximates_spectral_form_on_smooth_packets() {
    let lattice = EnergyLattice::new(128, 1.0).unwrap();
    let t = time_operator(lattice);
    let d = derivative_time_operator(lattice);
    let psi = centered_packet(lattice, 16.0).combined();
    let spectral = t.operator().apply(&psi);
    let finite = d.apply(&psi);
    assert!((&spectral - &finite).norm() < 1e-2 * spectral.norm());
}

#[test]
fn q_algebra() {
    let lattice = EnergyLattice::new(8, 0.5).unwrap();
    let q = q_operator(lattice);
    let h = extended_hamiltonian(lattice);
    let hp = pseudospin_hamiltonian(lattice);
    let id = Operator::identity(16);
    assert!((&q * &q).max_abs_diff(&id) < 1e-15);
    assert!(h.commutator(&q).max_abs() < 1e-15);
    assert!((&h * &q).max_abs_diff(&hp) < 1e-15);
    let (p, pbar) = fb_projectors(lattice);
    assert!((&p * &pbar).max_abs() < 1e-15);
    assert!((&p - &pbar).max_abs_diff(&q) < 1e-15);
    assert!((&p + &pbar).max_abs_diff(&id) < 1e-15);
}

#[test]
fn commutator_matches_brute_force_oracle() {
    for half in [64, 128] {
        let lattice = EnergyLattice::new(half, 1.0).unwrap();
        let psi = centered_packet(lattice, 8.0);
        let fast = commutator_residual(&time_operator(lattice), &psi).unwrap();
        let slow = brute_force_commutator(half, 1.0, &psi.combined());
        assert!((fast - slow).abs() < 1e-11, "{fast:e} vs {slow:e}");
    }
}

#[test]
fn commutator_threshold_at_256() {
    let lattice = EnergyLattice::new(128, 1.0).unwrap();
    let residual = commutator_residual(&time_operator(lattice), &centered_packet(lattice, 8.0)).unwrap();
    assert!(residual <= COMMUTATOR_THRESHOLD, "{residual:e}");
    assert!(residual <= 1e-3);
}

#[test]
fn commutator_fails_at_lattice_edge() {
    let lattice = EnergyLattice::new(32, 1.0).unwrap();
    let edge = ExtendedState::basis(lattice, Branch::Backward, 32).unwrap();
    assert!(commutator_residual(&time_operator(lattice), &edge).unwrap() > 0.1);
}

#[test]
fn q_commutator_holds_away_from_zero_energy() {
    let lattice = EnergyLattice::new(256, 1.0).unwrap();
    let t = time_operator(lattice);
    for center in [128.0, -128.0] {
        let psi = ExtendedState::wavepacket(lattice, center, 8.0).unwrap();
        assert!(q_commutator_residual(&t, &psi).unwrap() <= COMMUTATOR_THRESHOLD);
    }
}

#[test]
fn drift_signs_follow_the_branch() {
    let lattice = EnergyLattice::new(256, 1.0).unwrap();
    let t = time_operator(lattice);
    let dt = 0.01;
    let sigma = 16.0;
    let f = ExtendedState::wavepacket(lattice, 128.0, sigma).unwrap();
    let b = ExtendedState::wavepacket(lattice, -128.0, sigma).unwrap();
    let df = drift_check(&t, &f, dt).unwrap().forward.unwrap();
    let db = drift_check(&t, &b, dt).unwrap().backward.unwrap();
    assert!((df - dt).abs() <= 1e-4 * dt, "{df}");
    assert!((db + dt).abs() <= 1e-4 * dt, "{db}");

    let mixed_vec = &f.combined() + &b.combined();
    let mixed = ExtendedState::from_lattice_vector(lattice, &mixed_vec.normalized().unwrap()).unwrap();
    let q = q_operator(lattice).expectation(&mixed.combined()).re;
    assert!(q.abs() < 1e-12);
    let drift = drift_check(&t, &mixed, dt).unwrap();
    assert!(drift.total.abs() <= 1e-6);
    assert!(drift_check(&t, &f, 10.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn group_composition_property(m1 in -200i64..200, m2 in -200i64..200, half in 2usize..20) {
        let lattice = EnergyLattice::new(half, 0.25).unwrap();
        let d1 = shift_operator(lattice, m1 as f64 * 0.25).unwrap();
        let d2 = shift_operator(lattice, m2 as f64 * 0.25).unwrap();
        let d12 = shift_operator(lattice, (m1 + m2) as f64 * 0.25).unwrap();
        prop_assert!((&d1 * &d2).max_abs_diff(&d12) < 1e-12);
    }

    #[test]
    fn pseudospin_spectrum_is_doubly_degenerate_off_the_edge(half in 2usize..30) {
        let lattice = EnergyLattice::new(half, 1.0).unwrap();
        let hp = pseudospin_hamiltonian(lattice);
        for i in 1..2 * half {
            let j = 2 * half - i;
            if i != j {
                prop_assert!((hp.entry(i, i) - hp.entry(j, j)).norm() < 1e-15);
            }
        }
    }
}
