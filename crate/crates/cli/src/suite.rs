//! Cross-formalism equivalences on seeded random instances. Each check
//! reports the largest discrepancy it saw.

use qtime_core::fpf::{measure_distribution, ContourGrid, FamilySpec};
use qtime_core::histories::{check_decoherence, history_probability, ProjectorFamily, DEFAULT_LABEL_CAP};
use qtime_core::linalg::{eig_hermitian, matexp_hermitian, Operator, StateVector};
use qtime_core::pw::{condition_on_clock, history_state, ClockModel};
use qtime_core::random;
use qtime_core::tsvf::{abl_probability, identity_loop_state, mts_contract, transaction_echo, TwoStateVector};
use qtime_core::Result;
use rand::Rng;

pub fn run_all<R: Rng>(rng: &mut R, instances: usize) -> Result<Vec<(&'static str, f64)>> {
    let mut worst = [0.0_f64; 7];
    for i in 0..instances {
        let dim = 2 + i % 2;
        let checks = [
            born_vs_two_point(rng, dim)?,
            abl_vs_three_point(rng, dim)?,
            four_point_factorization(rng, dim)?,
            loop_vs_trace(rng, dim)?,
            echo_vs_born(rng, dim)?,
            clock_recovery(rng, dim)?,
            energy_histories(rng, dim)?,
        ];
        for (w, d) in worst.iter_mut().zip(checks) {
            *w = w.max(d);
        }
    }
    Ok([
        "born_two_point",
        "abl_three_point",
        "four_point_factorization",
        "mts_closed_loop",
        "transaction_echo",
        "pw_recovery",
        "energy_histories",
    ]
    .into_iter()
    .zip(worst)
    .collect())
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn measures(family: &FamilySpec) -> Result<Vec<f64>> {
    Ok(measure_distribution(family)?.into_iter().map(|(_, m)| m).collect())
}

fn born_vs_two_point<R: Rng>(rng: &mut R, dim: usize) -> Result<f64> {
    let h = random::hermitian(rng, dim, 1.0);
    let psi = random::state(rng, dim);
    let basis = random::basis(rng, dim);
    let t = rng.random_range(0.1..2.0);
    let family = FamilySpec::new(ContourGrid::new(vec![0.0, t])?, vec![vec![psi.clone()], basis.clone()], h.clone())?;
    let evolved = matexp_hermitian(&h, t)?.apply(&psi);
    let born: Vec<f64> = basis.iter().map(|k| k.inner(&evolved).norm_sqr()).collect();
    Ok(max_gap(&measures(&family)?, &born))
}

fn abl_vs_three_point<R: Rng>(rng: &mut R, dim: usize) -> Result<f64> {
    let h = random::hermitian(rng, dim, 1.0);
    let psi = random::state(rng, dim);
    let phi = random::state(rng, dim);
    let basis = random::basis(rng, dim);
    let t2 = rng.random_range(0.5..2.0);
    let t = rng.random_range(0.1..t2 - 0.1);
    let family = FamilySpec::new(
        ContourGrid::new(vec![0.0, t, t2])?,
        vec![vec![psi.clone()], basis.clone(), vec![phi.clone()]],
        h.clone(),
    )?;
    let tsv = TwoStateVector::new(psi, 0.0, phi, t2, h)?;
    Ok(max_gap(&measures(&family)?, &abl_probability(&tsv, &basis, t)?))
}

/// Conditioning a four-point family on its interior outcome `k` against the
/// product of the past three-point and future two-point measures.
fn four_point_factorization<R: Rng>(rng: &mut R, dim: usize) -> Result<f64> {
    let h = random::hermitian(rng, dim, 1.0);
    let psi = random::state(rng, dim);
    let (a, k_basis, b) = (random::basis(rng, dim), random::basis(rng, dim), random::basis(rng, dim));
    let t = [0.0, 0.4, 0.9, 1.5];
    let full = FamilySpec::new(
        ContourGrid::new(t.to_vec())?,
        vec![vec![psi.clone()], a.clone(), k_basis.clone(), b.clone()],
        h.clone(),
    )?;
    let dist = measure_distribution(&full)?;
    let mut worst = 0.0_f64;
    for (k, ks) in k_basis.iter().enumerate() {
        let through: f64 = dist.iter().filter(|(l, _)| l.0[2] == k).map(|(_, m)| m).sum();
        let past = measures(&FamilySpec::new(
            ContourGrid::new(t[..3].to_vec())?,
            vec![vec![psi.clone()], a.clone(), vec![ks.clone()]],
            h.clone(),
        )?)?;
        let future = measures(&FamilySpec::new(
            ContourGrid::new(t[2..].to_vec())?,
            vec![vec![ks.clone()], b.clone()],
            h.clone(),
        )?)?;
        for (label, m) in dist.iter().filter(|(l, _)| l.0[2] == k) {
            let want = past[label.0[1]] * future[label.0[3]];
            worst = worst.max((m / through - want).abs());
        }
    }
    Ok(worst)
}

fn loop_vs_trace<R: Rng>(rng: &mut R, dim: usize) -> Result<f64> {
    let u = random::unitary(rng, dim);
    let z = mts_contract(&identity_loop_state(dim)?, std::slice::from_ref(&u))?;
    Ok((z - u.trace()).norm())
}

fn echo_vs_born<R: Rng>(rng: &mut R, dim: usize) -> Result<f64> {
    let psi = random::state(rng, dim);
    let basis = random::basis(rng, dim);
    let born: Vec<f64> = basis.iter().map(|n| n.inner(&psi).norm_sqr()).collect();
    Ok(max_gap(&transaction_echo(&psi, &basis)?, &born))
}

fn clock_recovery<R: Rng>(rng: &mut R, dim: usize) -> Result<f64> {
    let clock = ClockModel::ideal(16, 1.0)?;
    let h_r = Operator::diagonal(&(0..dim).map(|n| n as f64).collect::<Vec<_>>());
    let psi0 = random::state(rng, dim);
    let state = history_state(&clock, &h_r, &psi0)?;
    let mut worst = 0.0_f64;
    for (k, &t) in clock.times().iter().enumerate() {
        let got = condition_on_clock(&state, &clock, k)?.normalized()?;
        let want = matexp_hermitian(&h_r, t)?.apply(&psi0);
        worst = worst.max(1.0 - got.fidelity(&want));
    }
    Ok(worst)
}

/// Largest of the off-diagonal functional and the gap to the Markov chain of
/// squared overlaps for an energy-basis family.
fn energy_histories<R: Rng>(rng: &mut R, dim: usize) -> Result<f64> {
    let h = random::hermitian(rng, dim, 1.0);
    let psi = random::state(rng, dim);
    let e = eig_hermitian(&h)?;
    let energy: Vec<StateVector> = (0..dim).map(|j| e.vector(j)).collect();
    let family = ProjectorFamily::new(vec![0.0, 0.5, 1.2], vec![energy.clone(), energy.clone()], h, psi.clone())?;
    let mut worst = check_decoherence(&family, 0.0, DEFAULT_LABEL_CAP)?.max_off_diagonal;
    for label in family.labels(DEFAULT_LABEL_CAP)? {
        let (a, b) = (label.0[0], label.0[1]);
        let markov = if a == b { energy[a].inner(&psi).norm_sqr() } else { 0.0 };
        worst = worst.max((history_probability(&family, &label)? - markov).abs());
    }
    Ok(worst)
}
