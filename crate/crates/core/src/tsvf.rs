//! Pre- and post-selected states, multi-time states and the transaction echo.

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, matexp_hermitian, Operator, StateVector, C64, ONE};

/// Smallest denominator accepted by the ABL rule and the weak value.
pub const SELECTION_FLOOR: f64 = 1e-14;

/// `⟨φ(t₂)| ⊗ |ψ(t₁)⟩` with the Hamiltonian that propagates between them.
#[derive(Clone, Debug)]
pub struct TwoStateVector {
    pre: StateVector,
    pre_time: f64,
    post: StateVector,
    post_time: f64,
    hamiltonian: Operator,
}

impl TwoStateVector {
    pub fn new(
        pre: StateVector,
        pre_time: f64,
        post: StateVector,
        post_time: f64,
        hamiltonian: Operator,
    ) -> Result<Self> {
        if pre_time >= post_time {
            return Err(invalid("selection times", "pre-selection must precede post-selection"));
        }
        hamiltonian.require_hermitian()?;
        for (context, v) in [("pre-selected state", &pre), ("post-selected state", &post)] {
            if v.dim() != hamiltonian.rows() {
                return Err(Error::DimensionMismatch {
                    context,
                    expected: hamiltonian.rows(),
                    found: v.dim(),
                });
            }
            v.require_normalized(1e-10)?;
        }
        Ok(Self {
            pre,
            pre_time,
            post,
            post_time,
            hamiltonian,
        })
    }

    pub fn pre(&self) -> &StateVector {
        &self.pre
    }

    pub fn post(&self) -> &StateVector {
        &self.post
    }

    pub fn times(&self) -> (f64, f64) {
        (self.pre_time, self.post_time)
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    /// The same pair described in reversed time: `φ` becomes the
    /// pre-selection at `−t₂`, `ψ` the post-selection at `−t₁`, and the
    /// generator flips sign so each propagator becomes its adjoint.
    pub fn time_reversed(&self) -> Self {
        Self {
            pre: self.post.clone(),
            pre_time: -self.post_time,
            post: self.pre.clone(),
            post_time: -self.pre_time,
            hamiltonian: self.hamiltonian.scale(c(-1.0, 0.0)),
        }
    }

    /// `(U(t, t₁)|ψ⟩, U†(t₂, t)|φ⟩)`.
    fn propagated(&self, t: f64) -> Result<(StateVector, StateVector)> {
        if !(self.pre_time..=self.post_time).contains(&t) {
            return Err(invalid(
                "intermediate time",
                format!("{t} lies outside [{}, {}]", self.pre_time, self.post_time),
            ));
        }
        let forward = matexp_hermitian(&self.hamiltonian, t - self.pre_time)?.apply(&self.pre);
        let backward = matexp_hermitian(&self.hamiltonian, t - self.post_time)?.apply(&self.post);
        Ok((forward, backward))
    }
}

pub fn abl_probability(tsv: &TwoStateVector, basis: &[StateVector], t: f64) -> Result<Vec<f64>> {
    let (forward, backward) = tsv.propagated(t)?;
    if let Some(v) = basis.iter().find(|v| v.dim() != forward.dim()) {
        return Err(Error::DimensionMismatch {
            context: "measurement basis",
            expected: forward.dim(),
            found: v.dim(),
        });
    }
    let numerators: Vec<f64> = basis
        .iter()
        .map(|n| (backward.inner(n) * n.inner(&forward)).norm_sqr())
        .collect();
    let total: f64 = numerators.iter().sum();
    if total <= SELECTION_FLOOR {
        return Err(Error::ContradictorySelection(format!(
            "ABL denominator {total:e} vanishes for this basis"
        )));
    }
    Ok(numerators.into_iter().map(|x| x / total).collect())
}

/// `⟨φ|U(t₂,t) O U(t,t₁)|ψ⟩ / ⟨φ|U(t₂,t₁)|ψ⟩`.
pub fn weak_value(tsv: &TwoStateVector, observable: &Operator, t: f64) -> Result<C64> {
    let (forward, backward) = tsv.propagated(t)?;
    if observable.rows() != forward.dim() || !observable.is_square() {
        return Err(Error::DimensionMismatch {
            context: "observable",
            expected: forward.dim(),
            found: observable.rows(),
        });
    }
    let den = backward.inner(&forward);
    if den.norm() <= SELECTION_FLOOR {
        return Err(Error::ContradictorySelection(
            "pre- and post-selected states are orthogonal; the weak value is undefined".into(),
        ));
    }
    Ok(backward.inner(&observable.apply(&forward)) / den)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Ket,
    Bra,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Slot {
    pub time: f64,
    pub orientation: Orientation,
    pub dim: usize,
}

/// One product term; a bra slot stores the ket whose dual it is.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coefficient: C64,
    pub factors: Vec<StateVector>,
}

/// Sum of products over chronologically ordered slots.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiTimeState {
    slots: Vec<Slot>,
    terms: Vec<Term>,
}

impl MultiTimeState {
    pub fn new(slots: Vec<Slot>, terms: Vec<Term>) -> Result<Self> {
        if slots.windows(2).any(|w| w[1].time <= w[0].time) {
            return Err(invalid("slots", "slot times must increase strictly"));
        }
        for term in &terms {
            if term.factors.len() != slots.len() {
                return Err(Error::DimensionMismatch {
                    context: "term factors",
                    expected: slots.len(),
                    found: term.factors.len(),
                });
            }
            for (slot, v) in slots.iter().zip(&term.factors) {
                if slot.dim != v.dim() {
                    return Err(Error::DimensionMismatch {
                        context: "slot factor",
                        expected: slot.dim,
                        found: v.dim(),
                    });
                }
            }
        }
        Ok(Self { slots, terms })
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }
}

/// `Σ_i ⟨i(t₂)| ⊗ |i(t₁)⟩` with `t₁ = 0`, `t₂ = 1`.
pub fn identity_loop_state(dim: usize) -> Result<MultiTimeState> {
    if dim == 0 {
        return Err(invalid("loop dimension", "need d >= 1"));
    }
    loop_state(dim, 1)
}

/// `Σ_i ⟨i(t₄)| ⊗ |i(t₃)⟩ ⊗ ⟨i(t₂)| ⊗ |i(t₁)⟩` at times `0, 1, 2, 3`.
pub fn entangled_four_time_state(dim: usize) -> Result<MultiTimeState> {
    if dim == 0 {
        return Err(invalid("state dimension", "need d >= 1"));
    }
    loop_state(dim, 2)
}

fn loop_state(dim: usize, pairs: usize) -> Result<MultiTimeState> {
    let slots = (0..2 * pairs)
        .map(|s| Slot {
            time: s as f64,
            orientation: if s % 2 == 0 { Orientation::Ket } else { Orientation::Bra },
            dim,
        })
        .collect();
    let terms = (0..dim)
        .map(|i| Term {
            coefficient: ONE,
            factors: vec![StateVector::basis(dim, i); 2 * pairs],
        })
        .collect();
    MultiTimeState::new(slots, terms)
}

/// Contracts each ket slot with the bra slot that follows it through the
/// matching process: `Σ_terms c · Π_m ⟨bra_m|P_m|ket_m⟩`.
pub fn mts_contract(mts: &MultiTimeState, processes: &[Operator]) -> Result<C64> {
    let slots = &mts.slots;
    if slots.len() % 2 != 0 {
        return Err(invalid("orientation pattern", "an odd slot count leaves a slot unpaired"));
    }
    for (m, pair) in slots.chunks(2).enumerate() {
        if pair[0].orientation != Orientation::Ket || pair[1].orientation != Orientation::Bra {
            return Err(invalid(
                "orientation pattern",
                format!("gap {m} must run from a ket slot to a bra slot"),
            ));
        }
    }
    if processes.len() != slots.len() / 2 {
        return Err(Error::DimensionMismatch {
            context: "processes",
            expected: slots.len() / 2,
            found: processes.len(),
        });
    }
    for (pair, p) in slots.chunks(2).zip(processes) {
        if p.cols() != pair[0].dim || p.rows() != pair[1].dim {
            return Err(Error::DimensionMismatch {
                context: "process shape",
                expected: pair[0].dim,
                found: p.cols(),
            });
        }
    }
    Ok(mts
        .terms
        .iter()
        .map(|term| {
            term.factors
                .chunks(2)
                .zip(processes)
                .fold(term.coefficient, |acc, (pair, p)| {
                    acc * pair[1].inner(&p.apply(&pair[0]))
                })
        })
        .sum())
}

/// Offer times confirmation, `⟨ψ_n|Ψ⟩⟨Ψ|ψ_n⟩`, per basis vector.
pub fn transaction_echo(psi: &StateVector, basis: &[StateVector]) -> Result<Vec<f64>> {
    psi.require_normalized(1e-10)?;
    basis
        .iter()
        .map(|n| {
            if n.dim() != psi.dim() {
                return Err(Error::DimensionMismatch {
                    context: "echo basis",
                    expected: psi.dim(),
                    found: n.dim(),
                });
            }
            Ok((n.inner(psi) * psi.inner(n)).re)
        })
        .collect()
}
