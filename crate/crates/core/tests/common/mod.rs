#![allow(dead_code)]

use qtime_core::linalg::{c, Operator, StateVector, C64, ZERO};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `e^{−isH}` by scaling and squaring a 30-term Taylor series; shares no code
/// with the eigendecomposition path.
pub fn taylor_expm(h: &Operator, s: f64) -> Operator {
    let n = h.rows();
    let norm = h.frobenius_norm() * s.abs();
    let mut squarings = 0;
    while norm / f64::from(1u32 << squarings) > 0.5 {
        squarings += 1;
    }
    let a = h.scale(c(0.0, -s / f64::from(1u32 << squarings)));
    let mut term = Operator::identity(n);
    let mut sum = Operator::identity(n);
    for k in 1..=30 {
        term = (&term * &a).scale(c(1.0 / k as f64, 0.0));
        sum = &sum + &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `ψ(t) = e^{−iHt}ψ0` by the Taylor oracle.
pub fn evolve(h: &Operator, t: f64, psi0: &StateVector) -> StateVector {
    taylor_expm(h, t).apply(psi0)
}

/// Entrywise Kronecker product written with explicit index arithmetic.
pub fn kron_by_index(a: &Operator, b: &Operator) -> Operator {
    let (br, bc) = (b.rows(), b.cols());
    Operator::from_fn(a.rows() * br, a.cols() * bc, |i, j| {
        a.entry(i / br, j / bc) * b.entry(i % br, j % bc)
    })
}

/// `⟨bra|A|ket⟩` by an explicit double loop.
pub fn bracket(bra: &StateVector, op: &Operator, ket: &StateVector) -> C64 {
    let mut acc = ZERO;
    for i in 0..bra.dim() {
        for j in 0..ket.dim() {
            acc += bra.amplitudes()[i].conj() * op.entry(i, j) * ket.amplitudes()[j];
        }
    }
    acc
}

/// Brute-force ABL: joint weights `|⟨φ|U(t₂−t)|a⟩⟨a|U(t−t₁)|ψ⟩|²` normalized.
pub fn abl_oracle(
    h: &Operator,
    psi: &StateVector,
    t1: f64,
    phi: &StateVector,
    t2: f64,
    basis: &[StateVector],
    t: f64,
) -> Vec<f64> {
    let u1 = taylor_expm(h, t - t1);
    let u2 = taylor_expm(h, t2 - t);
    let raw: Vec<f64> = basis
        .iter()
        .map(|a| (bracket(phi, &u2, a) * bracket(a, &u1, psi)).norm_sqr())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// `t_n = 2πn/(2Mδ)` eigenstates written directly from the Fourier formula.
pub fn fourier_time_state(half_size: usize, delta: f64, n: i64) -> (f64, StateVector) {
    let dim = 2 * half_size;
    let t = 2.0 * std::f64::consts::PI * n as f64 / (dim as f64 * delta);
    let amps = (0..dim)
        .map(|i| {
            let e = (i as i64 - half_size as i64) as f64 * delta;
            C64::from_polar(1.0 / (dim as f64).sqrt(), -e * t)
        })
        .collect();
    (t, StateVector::new(amps))
}

/// Time operator assembled from the Fourier formula as `Σ_n t_n |τ_n⟩⟨τ_n|`.
pub fn fourier_time_operator(half_size: usize, delta: f64) -> Operator {
    let dim = 2 * half_size;
    let mut t_op = Operator::zeros(dim, dim);
    for n in -(half_size as i64)..half_size as i64 {
        let (t, v) = fourier_time_state(half_size, delta, n);
        t_op = &t_op + &v.projector().scale(c(t, 0.0));
    }
    t_op
}

pub fn is_close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol
}
