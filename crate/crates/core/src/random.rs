//! Random draws for sweeps and equivalence suites. Every helper takes the
//! caller's generator so replays follow the caller's seed.

use rand::Rng;

use crate::linalg::{c, matexp_hermitian, Operator, StateVector, C64};

fn entry<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Unit vector with independent uniform real and imaginary parts.
pub fn state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    loop {
        let v = StateVector::new((0..dim).map(|_| entry(rng)).collect());
        if let Ok(n) = v.normalized() {
            return n;
        }
    }
}

/// Hermitian matrix with entries of order `scale`.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> Operator {
    let a = Operator::from_fn(dim, dim, |_, _| entry(rng));
    (&a + &a.dagger()).scale(c(0.5 * scale, 0.0))
}

pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    let h = hermitian(rng, dim, 3.0);
    matexp_hermitian(&h, 1.0).expect("random Hermitian matrix")
}

/// Orthonormal basis given by the columns of a random unitary.
pub fn basis<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<StateVector> {
    let u = unitary(rng, dim);
    (0..dim).map(|j| u.column(j)).collect()
}
