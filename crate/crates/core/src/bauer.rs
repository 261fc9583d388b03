//! Two-branch energy lattice with a Hermitian time operator.
//!
//! The extended spectrum is the lattice `E_j = jδ` for `j ∈ {−M, …, M−1}`.
//! Non-negative levels carry the forward branch and negative levels the
//! backward branch, so the backward state of pseudospin energy `E` sits at
//! lattice energy `−E`. The energy shift group acts as the cyclic shift
//! `j → j − m`, and its Stone generator is the time operator diagonal in the
//! DFT-conjugate basis `⟨E_j|τ_n⟩ = e^{−iE_j t_n}/√(2M)`.
//!
//! On a finite lattice `[t̂, H̃] = i` holds only on smooth wavepackets, so the
//! commutator is exposed as a state-dependent residual.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, matexp_hermitian, Operator, StateVector, C64, I, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyLattice {
    half_size: usize,
    delta: f64,
}

impl EnergyLattice {
    pub fn new(half_size: usize, delta: f64) -> Result<Self> {
        if half_size == 0 {
            return Err(invalid("lattice half-size", "M must be positive"));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(invalid("lattice spacing", format!("need delta > 0, got {delta}")));
        }
        Ok(Self { half_size, delta })
    }

    pub fn half_size(&self) -> usize {
        self.half_size
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of lattice points, `2M`.
    pub fn dim(&self) -> usize {
        2 * self.half_size
    }

    /// Integer level `j` of basis index `i`.
    pub fn level(&self, i: usize) -> i64 {
        i as i64 - self.half_size as i64
    }

    pub fn index_of_level(&self, j: i64) -> Option<usize> {
        let i = j + self.half_size as i64;
        (0..self.dim() as i64).contains(&i).then_some(i as usize)
    }

    pub fn energy(&self, i: usize) -> f64 {
        self.level(i) as f64 * self.delta
    }

    pub fn energies(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.energy(i)).collect()
    }

    pub fn branch(&self, i: usize) -> Branch {
        if self.level(i) >= 0 {
            Branch::Forward
        } else {
            Branch::Backward
        }
    }

    /// Spacing of the conjugate time grid, `2π/(2Mδ)`.
    pub fn time_spacing(&self) -> f64 {
        2.0 * PI / (self.dim() as f64 * self.delta)
    }

    /// `t_n = 2πn/(2Mδ)` for `n ∈ {−M, …, M−1}`.
    pub fn time_values(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.level(i) as f64 * self.time_spacing())
            .collect()
    }

    fn shift_steps(&self, eps: f64) -> Result<i64> {
        let m = (eps / self.delta).round();
        if (eps - m * self.delta).abs() > 1e-12 * eps.abs().max(1.0) {
            return Err(invalid(
                "shift",
                format!("{eps} is not a multiple of the lattice spacing {}", self.delta),
            ));
        }
        Ok(m as i64)
    }
}

/// Spinor over the lattice: forward amplitudes live on `j ≥ 0`, backward
/// amplitudes on `j < 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedState {
    lattice: EnergyLattice,
    forward: StateVector,
    backward: StateVector,
}

impl ExtendedState {
    pub fn new(lattice: EnergyLattice, forward: StateVector, backward: StateVector) -> Result<Self> {
        for (name, v, branch) in [
            ("forward component", &forward, Branch::Forward),
            ("backward component", &backward, Branch::Backward),
        ] {
            if v.dim() != lattice.dim() {
                return Err(Error::DimensionMismatch {
                    context: name,
                    expected: lattice.dim(),
                    found: v.dim(),
                });
            }
            let stray = v
                .amplitudes()
                .iter()
                .enumerate()
                .any(|(i, a)| lattice.branch(i) != branch && *a != ZERO);
            if stray {
                return Err(invalid(name, "amplitude outside its half of the lattice"));
            }
        }
        Ok(Self {
            lattice,
            forward,
            backward,
        })
    }

    /// Splits a lattice vector into `(Pψ, P̄ψ)`.
    pub fn from_lattice_vector(lattice: EnergyLattice, psi: &StateVector) -> Result<Self> {
        if psi.dim() != lattice.dim() {
            return Err(Error::DimensionMismatch {
                context: "lattice vector",
                expected: lattice.dim(),
                found: psi.dim(),
            });
        }
        let part = |b: Branch| {
            StateVector::new(
                psi.amplitudes()
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| if lattice.branch(i) == b { a } else { ZERO })
                    .collect(),
            )
        };
        Ok(Self {
            lattice,
            forward: part(Branch::Forward),
            backward: part(Branch::Backward),
        })
    }

    /// Pseudospin eigenstate `|E, α⟩` with `E = level·δ`; forward levels run
    /// over `0..M`, backward levels over `1..=M`.
    pub fn basis(lattice: EnergyLattice, branch: Branch, level: usize) -> Result<Self> {
        let j = match branch {
            Branch::Forward => level as i64,
            Branch::Backward => -(level as i64),
        };
        let i = lattice
            .index_of_level(j)
            .filter(|&i| lattice.branch(i) == branch)
            .ok_or_else(|| invalid("pseudospin level", format!("{level} not on {branch:?} branch")))?;
        Self::from_lattice_vector(lattice, &StateVector::basis(lattice.dim(), i))
    }

    /// Normalized Gaussian with amplitude `exp(−(E−center)²/(4σ²))` in lattice
    /// energy.
    pub fn wavepacket(lattice: EnergyLattice, center: f64, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid("wavepacket width", format!("need sigma > 0, got {sigma}")));
        }
        let amps: Vec<f64> = lattice
            .energies()
            .iter()
            .map(|e| (-(e - center).powi(2) / (4.0 * sigma * sigma)).exp())
            .collect();
        Self::from_lattice_vector(lattice, &StateVector::from_real(&amps).normalized()?)
    }

    /// Keeps one branch and renormalizes.
    pub fn restricted(&self, branch: Branch) -> Result<Self> {
        let v = match branch {
            Branch::Forward => &self.forward,
            Branch::Backward => &self.backward,
        };
        Self::from_lattice_vector(self.lattice, &v.normalized()?)
    }

    pub fn lattice(&self) -> EnergyLattice {
        self.lattice
    }

    pub fn forward(&self) -> &StateVector {
        &self.forward
    }

    pub fn backward(&self) -> &StateVector {
        &self.backward
    }

    pub fn combined(&self) -> StateVector {
        &self.forward + &self.backward
    }

    pub fn norm_sqr(&self) -> f64 {
        self.forward.norm_sqr() + self.backward.norm_sqr()
    }
}

/// `H̃ = diag(E_j)`: `+E` on forward states, `−E` on backward states.
pub fn extended_hamiltonian(lattice: EnergyLattice) -> Operator {
    Operator::diagonal(&lattice.energies())
}

/// `H′ = H̃Q = diag(|E_j|)`.
pub fn pseudospin_hamiltonian(lattice: EnergyLattice) -> Operator {
    let e: Vec<f64> = lattice.energies().iter().map(|e| e.abs()).collect();
    Operator::diagonal(&e)
}

fn branch_signs(lattice: EnergyLattice) -> Vec<f64> {
    (0..lattice.dim())
        .map(|i| match lattice.branch(i) {
            Branch::Forward => 1.0,
            Branch::Backward => -1.0,
        })
        .collect()
}

pub fn q_operator(lattice: EnergyLattice) -> Operator {
    Operator::diagonal(&branch_signs(lattice))
}

/// `(P, P̄)` onto the forward and backward halves.
pub fn fb_projectors(lattice: EnergyLattice) -> (Operator, Operator) {
    let signs = branch_signs(lattice);
    let p: Vec<f64> = signs.iter().map(|&s| if s > 0.0 { 1.0 } else { 0.0 }).collect();
    let pbar: Vec<f64> = p.iter().map(|x| 1.0 - x).collect();
    (Operator::diagonal(&p), Operator::diagonal(&pbar))
}

/// `D̃(ε)|E_j⟩ = |E_{j−m}⟩` with `ε = mδ`, indices mod `2M`.
pub fn shift_operator(lattice: EnergyLattice, eps: f64) -> Result<Operator> {
    let m = lattice.shift_steps(eps)?;
    let n = lattice.dim() as i64;
    Ok(Operator::from_fn(lattice.dim(), lattice.dim(), |row, col| {
        if row as i64 == (col as i64 - m).rem_euclid(n) {
            ONE
        } else {
            ZERO
        }
    }))
}

#[derive(Clone, Debug)]
pub struct TimeOperator {
    lattice: EnergyLattice,
    values: Vec<f64>,
    eigenbasis: Operator,
    operator: Operator,
}

pub fn time_operator(lattice: EnergyLattice) -> TimeOperator {
    TimeOperator::new(lattice)
}

impl TimeOperator {
    pub fn new(lattice: EnergyLattice) -> Self {
        let n = lattice.dim();
        let amp = 1.0 / (n as f64).sqrt();
        let eigenbasis = Operator::from_fn(n, n, |i, k| {
            let r = (lattice.level(i) * lattice.level(k)).rem_euclid(n as i64);
            C64::from_polar(amp, -2.0 * PI * r as f64 / n as f64)
        });
        let values = lattice.time_values();
        let phases: Vec<C64> = values.iter().map(|&t| c(t, 0.0)).collect();
        let operator = &(&eigenbasis * &Operator::diagonal_complex(&phases)) * &eigenbasis.dagger();
        Self {
            lattice,
            values,
            eigenbasis,
            operator,
        }
    }

    pub fn lattice(&self) -> EnergyLattice {
        self.lattice
    }

    pub fn operator(&self) -> &Operator {
        &self.operator
    }

    /// `t_n` in basis order, `n = −M, …, M−1`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Columns are `|τ_n⟩` in the energy basis.
    pub fn eigenbasis(&self) -> &Operator {
        &self.eigenbasis
    }

    pub fn eigenstate(&self, index: usize) -> StateVector {
        self.eigenbasis.column(index)
    }

    /// `⟨t̂⟩` of the normalized ray of `v`; `None` for the zero vector.
    pub fn expectation(&self, v: &StateVector) -> Option<f64> {
        let n2 = v.norm_sqr();
        (n2 > 0.0).then(|| self.operator.expectation(v).re / n2)
    }
}

/// Central difference `i(D̃(δ) − D̃(−δ))/(2δ)` of the shift group at zero.
pub fn derivative_time_operator(lattice: EnergyLattice) -> Operator {
    let d = lattice.delta();
    let up = shift_operator(lattice, d).expect("lattice step");
    let down = shift_operator(lattice, -d).expect("lattice step");
    (&up - &down).scale(I / (2.0 * d))
}

fn diagonal_apply(diag: &[f64], v: &StateVector) -> StateVector {
    StateVector::new(
        v.amplitudes()
            .iter()
            .zip(diag)
            .map(|(a, &e)| a * e)
            .collect(),
    )
}

/// `‖([t̂, H̃] − i)ψ‖` for a normalized spinor.
pub fn commutator_residual(time: &TimeOperator, psi: &ExtendedState) -> Result<f64> {
    let v = prepared(time, psi)?;
    let energies = time.lattice.energies();
    let t = time.operator();
    let tv = t.apply(&v);
    let comm = &t.apply(&diagonal_apply(&energies, &v)) - &diagonal_apply(&energies, &tv);
    Ok((&comm - &v.scale(I)).norm())
}

/// `‖([t̂, H′] − iQ)ψ‖` for a normalized spinor.
pub fn q_commutator_residual(time: &TimeOperator, psi: &ExtendedState) -> Result<f64> {
    let v = prepared(time, psi)?;
    let lattice = time.lattice;
    let pseudo: Vec<f64> = lattice.energies().iter().map(|e| e.abs()).collect();
    let t = time.operator();
    let tv = t.apply(&v);
    let comm = &t.apply(&diagonal_apply(&pseudo, &v)) - &diagonal_apply(&pseudo, &tv);
    let qv = diagonal_apply(&branch_signs(lattice), &v).scale(I);
    Ok((&comm - &qv).norm())
}

fn prepared(time: &TimeOperator, psi: &ExtendedState) -> Result<StateVector> {
    if psi.lattice != time.lattice {
        return Err(invalid("spinor", "lattice differs from the time operator's"));
    }
    let norm = psi.norm_sqr().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    Ok(psi.combined())
}

/// Change of `⟨t̂⟩` over one step of `e^{−iH′dt}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Drift {
    /// Normalized forward component; `None` when it vanishes.
    pub forward: Option<f64>,
    /// Normalized backward component; `None` when it vanishes.
    pub backward: Option<f64>,
    /// Whole spinor.
    pub total: f64,
}

/// Evolves by the pseudospin Hamiltonian, which advances the forward
/// branch's clock and rewinds the backward one.
pub fn drift_check(time: &TimeOperator, psi: &ExtendedState, dt: f64) -> Result<Drift> {
    let v = prepared(time, psi)?;
    if !(dt.is_finite() && dt.abs() <= time.lattice.time_spacing()) {
        return Err(invalid(
            "drift step",
            format!("|dt| must not exceed the time spacing {}", time.lattice.time_spacing()),
        ));
    }
    let u = matexp_hermitian(&pseudospin_hamiltonian(time.lattice), dt)?;
    let change = |a: &StateVector| -> Option<f64> {
        let before = time.expectation(a)?;
        let after = time.expectation(&u.apply(a))?;
        Some(after - before)
    };
    Ok(Drift {
        forward: change(psi.forward()),
        backward: change(psi.backward()),
        total: change(&v).unwrap_or(0.0),
    })
}
