//! Relational time on a finite ideal clock.
//!
//! The clock ladder is centred, `E_n = ω·n` for `n ∈ {−⌊d/2⌋, …, ⌈d/2⌉−1}`,
//! so clock energies can cancel system energies of either sign. Time states
//! are the DFT of the energy basis and `e^{−iH_C Δt}` steps them cyclically.
//!
//! A system Hamiltonian is *commensurate* with a clock when every eigenvalue
//! is `ω·m` with `−m` on the ladder; the history state is then an exact null
//! vector of the total constraint.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    c, eig_hermitian, matexp_hermitian, null_space, partial_project, Operator, ProductSpace,
    StateVector, C64, I, ZERO,
};

pub const CLOCK: &str = "C";
pub const BACKWARD_CLOCK: &str = "Cb";
pub const SYSTEM: &str = "R";

#[derive(Clone, Debug)]
pub struct ClockModel {
    omega: f64,
    levels: Vec<i64>,
    energies: Vec<f64>,
    times: Vec<f64>,
    hamiltonian: Operator,
    time_states: Vec<StateVector>,
    time_operator: Operator,
}

pub fn build_ideal_clock(dim: usize, omega: f64) -> Result<ClockModel> {
    ClockModel::ideal(dim, omega)
}

impl ClockModel {
    pub fn ideal(dim: usize, omega: f64) -> Result<Self> {
        if dim < 2 {
            return Err(invalid("clock dimension", format!("need d_C >= 2, got {dim}")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(invalid("clock omega", format!("need omega > 0, got {omega}")));
        }
        let d = dim as i64;
        let levels: Vec<i64> = (-(d / 2)..(d - d / 2)).collect();
        let energies: Vec<f64> = levels.iter().map(|&n| omega * n as f64).collect();
        let times: Vec<f64> = (0..dim)
            .map(|k| 2.0 * PI * k as f64 / (dim as f64 * omega))
            .collect();
        let amp = 1.0 / (dim as f64).sqrt();
        let time_states: Vec<StateVector> = (0..d)
            .map(|k| {
                StateVector::new(
                    levels
                        .iter()
                        .map(|&n| {
                            let r = (n * k).rem_euclid(d);
                            C64::from_polar(amp, -2.0 * PI * r as f64 / dim as f64)
                        })
                        .collect(),
                )
            })
            .collect();
        let mut time_operator = Operator::zeros(dim, dim);
        for (t, s) in times.iter().zip(&time_states) {
            time_operator = &time_operator + &s.projector().scale(c(*t, 0.0));
        }
        Ok(Self {
            omega,
            hamiltonian: Operator::diagonal(&energies),
            levels,
            energies,
            times,
            time_states,
            time_operator,
        })
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Integer ladder labels `n` with `E_n = ω·n`, in basis order.
    pub fn levels(&self) -> &[i64] {
        &self.levels
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time_step(&self) -> f64 {
        2.0 * PI / (self.dim() as f64 * self.omega)
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn time_state(&self, k: usize) -> &StateVector {
        &self.time_states[k]
    }

    pub fn time_states(&self) -> &[StateVector] {
        &self.time_states
    }

    pub fn time_operator(&self) -> &Operator {
        &self.time_operator
    }

    /// Basis index of the ladder level `n`, if it lies on the ladder.
    pub fn level_index(&self, n: i64) -> Option<usize> {
        let lo = self.levels[0];
        (n >= lo && n < lo + self.dim() as i64).then(|| (n - lo) as usize)
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.dim() {
            return Err(invalid(
                "clock reading",
                format!("index {k} outside 0..{}", self.dim()),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct KinematicalState {
    pub space: ProductSpace,
    pub psi: StateVector,
}

impl KinematicalState {
    pub fn new(space: ProductSpace, psi: StateVector) -> Result<Self> {
        if psi.dim() != space.dim() {
            return Err(Error::DimensionMismatch {
                context: "kinematical state",
                expected: space.dim(),
                found: psi.dim(),
            });
        }
        Ok(Self { space, psi })
    }

    pub fn normalized(&self) -> Result<Self> {
        Ok(Self {
            space: self.space.clone(),
            psi: self.psi.normalized()?,
        })
    }
}

fn clock_system_space(clock: &ClockModel, system_dim: usize) -> ProductSpace {
    ProductSpace::new([(CLOCK, clock.dim()), (SYSTEM, system_dim)]).expect("distinct labels")
}

fn system_dim_of(h_r: &Operator) -> Result<usize> {
    h_r.require_hermitian()?;
    Ok(h_r.rows())
}

#[derive(Clone, Debug)]
pub struct InteractionSpec {
    operator: Operator,
    time_diagonal: bool,
}

impl InteractionSpec {
    /// Validates Hermiticity, dimensions and, when claimed, time-diagonality.
    pub fn new(
        clock: &ClockModel,
        system_dim: usize,
        operator: Operator,
        time_diagonal: bool,
    ) -> Result<Self> {
        let dim = clock.dim() * system_dim;
        if operator.rows() != dim || operator.cols() != dim {
            return Err(Error::DimensionMismatch {
                context: "interaction operator",
                expected: dim,
                found: operator.rows().max(operator.cols()),
            });
        }
        operator.require_hermitian()?;
        let spec = Self {
            operator,
            time_diagonal,
        };
        if time_diagonal {
            let kernel = interaction_kernel(clock, &spec)?;
            let worst = kernel.max_off_diagonal();
            if worst > 1e-10 {
                return Err(invalid(
                    "interaction time_diagonal flag",
                    format!("off-diagonal kernel block of size {worst:e}"),
                ));
            }
        }
        Ok(spec)
    }

    /// `Σ_k |t_k⟩⟨t_k| ⊗ V_k`.
    pub fn time_diagonal(clock: &ClockModel, potentials: &[Operator]) -> Result<Self> {
        if potentials.len() != clock.dim() {
            return Err(Error::DimensionMismatch {
                context: "time-diagonal potentials",
                expected: clock.dim(),
                found: potentials.len(),
            });
        }
        let d_r = potentials[0].rows();
        let mut op = Operator::zeros(clock.dim() * d_r, clock.dim() * d_r);
        for (k, v) in potentials.iter().enumerate() {
            v.require_hermitian()?;
            op = &op + &clock.time_state(k).projector().tensor(v);
        }
        Self::new(clock, d_r, op, true)
    }

    pub fn operator(&self) -> &Operator {
        &self.operator
    }

    pub fn is_time_diagonal(&self) -> bool {
        self.time_diagonal
    }
}

pub fn total_hamiltonian(
    clock: &ClockModel,
    h_r: &Operator,
    inter: Option<&InteractionSpec>,
) -> Result<Operator> {
    let d_r = system_dim_of(h_r)?;
    let mut h = &clock.hamiltonian.tensor(&Operator::identity(d_r))
        + &Operator::identity(clock.dim()).tensor(h_r);
    if let Some(inter) = inter {
        if inter.operator.rows() != h.rows() {
            return Err(Error::DimensionMismatch {
                context: "interaction operator",
                expected: h.rows(),
                found: inter.operator.rows(),
            });
        }
        h = &h + &inter.operator;
    }
    Ok(h)
}

/// `(1/√d) Σ_k |t_k⟩ ⊗ e^{−iH_R t_k}|ψ0⟩`.
pub fn history_state(
    clock: &ClockModel,
    h_r: &Operator,
    psi0: &StateVector,
) -> Result<KinematicalState> {
    let d_r = system_dim_of(h_r)?;
    if psi0.dim() != d_r {
        return Err(Error::DimensionMismatch {
            context: "initial state",
            expected: d_r,
            found: psi0.dim(),
        });
    }
    psi0.require_normalized(1e-10)?;
    let mut psi = StateVector::zeros(clock.dim() * d_r);
    for (k, &t) in clock.times.iter().enumerate() {
        let u = matexp_hermitian(h_r, t)?;
        psi = &psi + &clock.time_state(k).tensor(&u.apply(psi0));
    }
    let psi = psi.scale(c(1.0 / (clock.dim() as f64).sqrt(), 0.0));
    KinematicalState::new(clock_system_space(clock, d_r), psi)?.normalized()
}

/// `‖H_T Ψ‖ / ‖Ψ‖`.
pub fn constraint_residual(h_t: &Operator, state: &KinematicalState) -> Result<f64> {
    if h_t.cols() != state.psi.dim() {
        return Err(Error::DimensionMismatch {
            context: "constraint operator",
            expected: state.psi.dim(),
            found: h_t.cols(),
        });
    }
    let n = state.psi.norm();
    if n == 0.0 {
        return Err(Error::ZeroState);
    }
    Ok(h_t.apply(&state.psi).norm() / n)
}

pub fn physical_states(
    h_t: &Operator,
    space: &ProductSpace,
    tol: f64,
) -> Result<Vec<KinematicalState>> {
    h_t.require_hermitian()?;
    if h_t.rows() != space.dim() {
        return Err(Error::DimensionMismatch {
            context: "constraint operator",
            expected: space.dim(),
            found: h_t.rows(),
        });
    }
    null_space(h_t, tol)?
        .into_iter()
        .map(|v| KinematicalState::new(space.clone(), v))
        .collect()
}

/// `(⟨t_k| ⊗ I)|Ψ⟩`, left unnormalized.
pub fn condition_on_clock(
    state: &KinematicalState,
    clock: &ClockModel,
    k: usize,
) -> Result<StateVector> {
    clock.check_index(k)?;
    partial_project(clock.time_state(k), &state.space, CLOCK, &state.psi)
}

/// Blocks `K[k][l] = (⟨t_k|⊗I) H_int (|t_l⟩⊗I)` on the system space.
#[derive(Clone, Debug)]
pub struct InteractionKernel {
    clock_dim: usize,
    system_dim: usize,
    in_time_basis: Operator,
}

impl InteractionKernel {
    pub fn block(&self, k: usize, l: usize) -> Operator {
        let d = self.system_dim;
        Operator::from_fn(d, d, |i, j| self.in_time_basis.entry(k * d + i, l * d + j))
    }

    pub fn clock_dim(&self) -> usize {
        self.clock_dim
    }

    /// `Σ_l K[k][l] ψ_l`.
    pub fn apply_row(&self, k: usize, trajectory: &[StateVector]) -> StateVector {
        let d = self.system_dim;
        let mut out = vec![ZERO; d];
        for (l, psi) in trajectory.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                for (j, a) in psi.amplitudes().iter().enumerate() {
                    *o += self.in_time_basis.entry(k * d + i, l * d + j) * a;
                }
            }
        }
        StateVector::new(out)
    }

    fn max_off_diagonal(&self) -> f64 {
        let mut worst = 0.0_f64;
        for k in 0..self.clock_dim {
            for l in 0..self.clock_dim {
                if k != l {
                    worst = worst.max(self.block(k, l).max_abs());
                }
            }
        }
        worst
    }
}

pub fn interaction_kernel(clock: &ClockModel, inter: &InteractionSpec) -> Result<InteractionKernel> {
    let d_c = clock.dim();
    if inter.operator.rows() % d_c != 0 {
        return Err(Error::DimensionMismatch {
            context: "interaction operator",
            expected: d_c,
            found: inter.operator.rows(),
        });
    }
    let d_r = inter.operator.rows() / d_c;
    let w = Operator::from_columns(clock.time_states()).tensor(&Operator::identity(d_r));
    Ok(InteractionKernel {
        clock_dim: d_c,
        system_dim: d_r,
        in_time_basis: &(&w.dagger() * &inter.operator) * &w,
    })
}

fn trajectory(state: &KinematicalState, clock: &ClockModel) -> Result<Vec<StateVector>> {
    (0..clock.dim())
        .map(|k| condition_on_clock(state, clock, k))
        .collect()
}

/// `i·(ψ_{k+1} − ψ_{k−1})/(2Δt)` on the periodic grid.
fn central_derivative(traj: &[StateVector], k: usize, dt: f64) -> StateVector {
    let n = traj.len();
    let diff = &traj[(k + 1) % n] - &traj[(k + n - 1) % n];
    diff.scale(I / (2.0 * dt))
}

/// Residuals of the time-nonlocal evolution equation at every clock reading.
///
/// The Kronecker-normalized kernel equals `Δt` times the delta-normalized
/// kernel density, so the `Δt` quadrature weight multiplies `K/Δt`.
pub fn verify_nonlocal_eom(
    state: &KinematicalState,
    clock: &ClockModel,
    h_r: &Operator,
    inter: Option<&InteractionSpec>,
) -> Result<Vec<f64>> {
    system_dim_of(h_r)?;
    let traj = trajectory(state, clock)?;
    let kernel = inter.map(|i| interaction_kernel(clock, i)).transpose()?;
    let dt = clock.time_step();
    Ok((0..clock.dim())
        .map(|k| {
            let mut r = &central_derivative(&traj, k, dt) - &h_r.apply(&traj[k]);
            if let Some(kernel) = &kernel {
                let density = kernel.apply_row(k, &traj).scale(c(1.0 / dt, 0.0));
                r = &r - &density.scale(c(dt, 0.0));
            }
            r.norm()
        })
        .collect())
}

/// Residuals of the local equation `i∂ψ = (H_R + V_k)ψ` for a time-diagonal
/// interaction with `V_k = K[k][k]`.
pub fn local_eom_residuals(
    state: &KinematicalState,
    clock: &ClockModel,
    h_r: &Operator,
    inter: &InteractionSpec,
) -> Result<Vec<f64>> {
    if !inter.time_diagonal {
        return Err(invalid(
            "interaction",
            "the local equation needs a time-diagonal interaction",
        ));
    }
    system_dim_of(h_r)?;
    let traj = trajectory(state, clock)?;
    let kernel = interaction_kernel(clock, inter)?;
    let dt = clock.time_step();
    Ok((0..clock.dim())
        .map(|k| {
            let local = h_r + &kernel.block(k, k);
            (&central_derivative(&traj, k, dt) - &local.apply(&traj[k])).norm()
        })
        .collect())
}

fn dual_space(clock_f: &ClockModel, clock_b: &ClockModel, d_r: usize) -> ProductSpace {
    ProductSpace::new([
        (CLOCK, clock_f.dim()),
        (BACKWARD_CLOCK, clock_b.dim()),
        (SYSTEM, d_r),
    ])
    .expect("distinct labels")
}

/// Forward and backward constraints on `C ⊗ Cb ⊗ R`:
/// `H_C⊗I⊗I + I⊗I⊗H_R` and `I⊗H_Cb⊗I − I⊗I⊗H_R`.
pub fn dual_constraints(
    clock_f: &ClockModel,
    clock_b: &ClockModel,
    h_r: &Operator,
) -> Result<(Operator, Operator)> {
    let d_r = system_dim_of(h_r)?;
    let id_f = Operator::identity(clock_f.dim());
    let id_b = Operator::identity(clock_b.dim());
    let id_r = Operator::identity(d_r);
    let system = id_f.tensor(&id_b).tensor(h_r);
    let forward = &clock_f.hamiltonian.tensor(&id_b).tensor(&id_r) + &system;
    let backward = &id_f.tensor(&clock_b.hamiltonian).tensor(&id_r) - &system;
    Ok((forward, backward))
}

fn spectral_norm(h: &Operator) -> Result<f64> {
    let e = eig_hermitian(h)?;
    Ok(e.values.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// Orthonormal basis of the joint kernel of both constraints.
pub fn dual_constraint_states(
    clock_f: &ClockModel,
    clock_b: &ClockModel,
    h_r: &Operator,
    tol: f64,
) -> Result<Vec<KinematicalState>> {
    let (forward, backward) = dual_constraints(clock_f, clock_b, h_r)?;
    let comm = forward.commutator(&backward).frobenius_norm();
    if comm > 1e-10 {
        return Err(Error::InvariantBreach(format!(
            "forward and backward constraints fail to commute (norm {comm:e})"
        )));
    }
    let combined = &(&forward * &forward) + &(&backward * &backward);
    let eig = eig_hermitian(&combined)?;
    let bound_f = tol * spectral_norm(&forward)?;
    let bound_b = tol * spectral_norm(&backward)?;
    let space = dual_space(clock_f, clock_b, h_r.rows());
    (0..combined.rows())
        .map(|j| eig.vector(j))
        .filter(|v| forward.apply(v).norm() <= bound_f && backward.apply(v).norm() <= bound_b)
        .map(|v| KinematicalState::new(space.clone(), v))
        .collect()
}

/// `(1/d) Σ_{k,l} |t_k⟩ ⊗ |t_l⟩ ⊗ e^{−iH_R t_k} e^{iH_R t_l}|ψ0⟩`, normalized.
pub fn two_clock_history_state(
    clock_f: &ClockModel,
    clock_b: &ClockModel,
    h_r: &Operator,
    psi0: &StateVector,
) -> Result<KinematicalState> {
    let d_r = system_dim_of(h_r)?;
    psi0.require_normalized(1e-10)?;
    let mut psi = StateVector::zeros(clock_f.dim() * clock_b.dim() * d_r);
    for (k, &tk) in clock_f.times.iter().enumerate() {
        let uk = matexp_hermitian(h_r, tk)?;
        for (l, &tl) in clock_b.times.iter().enumerate() {
            let ul = matexp_hermitian(h_r, -tl)?;
            let branch = uk.apply(&ul.apply(psi0));
            psi = &psi + &clock_f.time_state(k).tensor(clock_b.time_state(l)).tensor(&branch);
        }
    }
    KinematicalState::new(dual_space(clock_f, clock_b, d_r), psi)?.normalized()
}

/// `(⟨t_k| ⊗ ⟨t_l| ⊗ I)|Ψ⟩` on the two-clock space, unnormalized.
pub fn condition_on_clocks(
    state: &KinematicalState,
    clock_f: &ClockModel,
    clock_b: &ClockModel,
    k: usize,
    l: usize,
) -> Result<StateVector> {
    clock_f.check_index(k)?;
    clock_b.check_index(l)?;
    let partial = partial_project(clock_f.time_state(k), &state.space, CLOCK, &state.psi)?;
    let rest = state.space.without(CLOCK)?;
    partial_project(clock_b.time_state(l), &rest, BACKWARD_CLOCK, &partial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_z};

    fn qubit_h() -> Operator {
        Operator::diagonal(&[0.0, 1.0])
    }

    #[test]
    fn two_level_clock_by_hand() {
        let clock = build_ideal_clock(2, 1.0).unwrap();
        assert_eq!(clock.energies(), &[-1.0, 0.0]);
        assert!((clock.times()[0]).abs() < 1e-15 && (clock.times()[1] - PI).abs() < 1e-15);
        assert!(build_ideal_clock(1, 1.0).is_err());
        assert!(build_ideal_clock(4, 0.0).is_err());
    }

    #[test]
    fn time_states_are_orthonormal() {
        for d in [2, 3, 7, 16] {
            let clock = build_ideal_clock(d, 0.7).unwrap();
            let w = Operator::from_columns(clock.time_states());
            assert!(w.unitarity_deviation() < 1e-12);
            assert!(clock.time_state(0).inner(clock.time_state(1)).norm() < 1e-10);
        }
    }

    #[test]
    fn free_constraint_is_clock_hamiltonian() {
        let clock = build_ideal_clock(3, 1.0).unwrap();
        let h_t = total_hamiltonian(&clock, &Operator::zeros(2, 2), None).unwrap();
        let expected = clock.hamiltonian().tensor(&Operator::identity(2));
        assert!(h_t.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn two_level_constraint_diagonal() {
        let clock = build_ideal_clock(2, 1.0).unwrap();
        let h_t = total_hamiltonian(&clock, &qubit_h(), None).unwrap();
        assert!(h_t.max_abs_diff(&Operator::diagonal(&[-1.0, 0.0, 0.0, 1.0])) < 1e-15);
        let space = clock_system_space(&clock, 2);
        let kernel = physical_states(&h_t, &space, 1e-10).unwrap();
        assert_eq!(kernel.len(), 2);
    }

    #[test]
    fn total_hamiltonian_rejects_bad_interaction() {
        let clock = build_ideal_clock(2, 1.0).unwrap();
        assert!(InteractionSpec::new(&clock, 2, Operator::identity(3), false).is_err());
        let not_diag = Operator::identity(2).tensor(&pauli_x());
        assert!(InteractionSpec::new(&clock, 2, not_diag.clone(), false).is_ok());
        let clock_coupled = pauli_z().tensor(&pauli_z());
        assert!(InteractionSpec::new(&clock, 2, clock_coupled, true).is_err());
    }

    #[test]
    fn free_history_state_is_a_product() {
        let clock = build_ideal_clock(5, 1.0).unwrap();
        let psi0 = StateVector::from_real(&[0.6, 0.8]);
        let hs = history_state(&clock, &Operator::zeros(2, 2), &psi0).unwrap();
        for k in 0..5 {
            let got = condition_on_clock(&hs, &clock, k).unwrap();
            let want = psi0.scale(c(1.0 / 5f64.sqrt(), 0.0));
            assert!(got.max_abs_diff(&want) < 1e-14);
        }
    }

    #[test]
    fn conditioning_orthogonal_reading_vanishes() {
        let clock = build_ideal_clock(4, 1.0).unwrap();
        let phi = StateVector::from_real(&[1.0, 0.0]);
        let psi = clock.time_state(1).tensor(&phi);
        let state = KinematicalState::new(clock_system_space(&clock, 2), psi).unwrap();
        assert!(condition_on_clock(&state, &clock, 0).unwrap().norm() < 1e-14);
        assert!(condition_on_clock(&state, &clock, 9).is_err());
    }

    #[test]
    fn eigenvector_residual_is_eigenvalue() {
        let clock = build_ideal_clock(2, 1.0).unwrap();
        let h_t = total_hamiltonian(&clock, &qubit_h(), None).unwrap();
        let v = StateVector::basis(4, 3);
        let state = KinematicalState::new(clock_system_space(&clock, 2), v).unwrap();
        assert!((constraint_residual(&h_t, &state).unwrap() - 1.0).abs() < 1e-15);
        let zero = KinematicalState::new(clock_system_space(&clock, 2), StateVector::zeros(4));
        assert_eq!(constraint_residual(&h_t, &zero.unwrap()), Err(Error::ZeroState));
    }

    #[test]
    fn zero_interaction_kernel() {
        let clock = build_ideal_clock(4, 1.0).unwrap();
        let inter = InteractionSpec::new(&clock, 2, Operator::zeros(8, 8), true).unwrap();
        let k = interaction_kernel(&clock, &inter).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert!(k.block(a, b).max_abs() < 1e-15);
            }
        }
    }

    #[test]
    fn free_dual_constraint_contains_product_sector() {
        let clock = build_ideal_clock(4, 1.0).unwrap();
        let states = dual_constraint_states(&clock, &clock, &Operator::zeros(3, 3), 1e-10).unwrap();
        assert!(states.len() >= 3);
    }
}
