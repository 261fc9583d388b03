//! Fixed points and contour histories on a discrete two-branch contour.
//!
//! A fixed point holds one state; its doubled form `⟦ψ⟧ = |ψ⟩_b ⊗ |ψ⟩_f`
//! is built on demand so the two branch copies can never disagree. A segment
//! between consecutive fixed points carries the forward amplitude
//! `a_f = ⟨s_j|U(t_j − t_i)|s_i⟩` and the backward amplitude `a_b = conj(a_f)`;
//! a history's weight is the product of `a_f·a_b` over its segments, and its
//! measure of existence is that weight normalized over the family.

use nalgebra::DMatrix;

use crate::bauer::{time_operator, EnergyLattice, TimeOperator};
use crate::error::{invalid, Error, Result};
use crate::histories::{check_basis, enumerate_labels, HistoryLabel, DEFAULT_LABEL_CAP};
use crate::linalg::{c, matexp_hermitian, Operator, StateVector, C64, ONE};

/// Branch regularization of the pinched contour; zero in the finite model.
pub const ETA: f64 = 0.0;

/// Largest doubled-space dimension for which dense operators are built.
pub const MAX_DENSE_DIM: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct ContourGrid {
    times: Vec<f64>,
}

impl ContourGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(invalid("contour times", "histories need at least two fixed points"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("contour times", "times must increase strictly"));
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn eta(&self) -> f64 {
        ETA
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPoint {
    time: f64,
    state: StateVector,
}

impl FixedPoint {
    pub fn new(time: f64, state: StateVector) -> Result<Self> {
        state.require_normalized(1e-10)?;
        Ok(Self { time, state })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    /// `|ψ⟩_b ⊗ |ψ⟩_f`.
    pub fn doubled(&self) -> StateVector {
        self.state.tensor(&self.state)
    }
}

/// `(a_f, a_b)` for the segment from `from` to `to`.
pub fn segment_amplitude(from: &FixedPoint, to: &FixedPoint, h: &Operator) -> Result<(C64, C64)> {
    if from.time >= to.time {
        return Err(invalid("segment", "fixed points must be in chronological order"));
    }
    let u = matexp_hermitian(h, to.time - from.time)?;
    let a_f = to.state.inner(&u.apply(&from.state));
    Ok((a_f, a_f.conj()))
}

fn check_dims(h: &Operator, states: impl IntoIterator<Item = usize>) -> Result<()> {
    h.require_hermitian()?;
    for d in states {
        if d != h.rows() {
            return Err(Error::DimensionMismatch {
                context: "fixed point state",
                expected: h.rows(),
                found: d,
            });
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ContourHistory {
    grid: ContourGrid,
    points: Vec<FixedPoint>,
    hamiltonian: Operator,
}

impl ContourHistory {
    /// One state per grid time.
    pub fn new(grid: ContourGrid, states: Vec<StateVector>, hamiltonian: Operator) -> Result<Self> {
        if states.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                context: "fixed points per grid",
                expected: grid.len(),
                found: states.len(),
            });
        }
        check_dims(&hamiltonian, states.iter().map(StateVector::dim))?;
        let points = grid
            .times
            .iter()
            .zip(states)
            .map(|(&t, s)| FixedPoint::new(t, s))
            .collect::<Result<_>>()?;
        Ok(Self {
            grid,
            points,
            hamiltonian,
        })
    }

    pub fn grid(&self) -> &ContourGrid {
        &self.grid
    }

    pub fn points(&self) -> &[FixedPoint] {
        &self.points
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    /// `⊗_i ⟦s_i⟧`.
    pub fn doubled(&self) -> StateVector {
        let mut v = StateVector::new(vec![ONE]);
        for p in &self.points {
            v = v.tensor(&p.doubled());
        }
        v
    }
}

/// `Π_i a_f·a_b = Π_i |⟨s_{i+1}|U|s_i⟩|²`.
pub fn history_weight(h: &ContourHistory) -> Result<f64> {
    h.points.windows(2).try_fold(1.0, |acc, w| {
        let (a_f, a_b) = segment_amplitude(&w[0], &w[1], &h.hamiltonian)?;
        Ok(acc * (a_f * a_b).re)
    })
}

/// `Π_i ⟨a_i|b_i⟩_f · conj⟨a_i|b_i⟩_b`; the backward copy carries
/// anti-chronological, conjugated amplitudes.
pub fn history_overlap(h1: &ContourHistory, h2: &ContourHistory) -> Result<C64> {
    if h1.grid != h2.grid {
        return Err(invalid("histories", "contour grids differ"));
    }
    h1.points
        .iter()
        .zip(&h2.points)
        .try_fold(ONE, |acc, (a, b)| {
            if a.state.dim() != b.state.dim() {
                return Err(Error::DimensionMismatch {
                    context: "history overlap",
                    expected: a.state.dim(),
                    found: b.state.dim(),
                });
            }
            let f = a.state.inner(&b.state);
            Ok(acc * f * f.conj())
        })
}

/// Outcome sets per contour time; the first and last may be singletons that
/// fix the boundary states, interior sets must be complete bases.
#[derive(Clone, Debug)]
pub struct FamilySpec {
    grid: ContourGrid,
    bases: Vec<Vec<StateVector>>,
    hamiltonian: Operator,
    propagators: Vec<Operator>,
}

impl FamilySpec {
    pub fn new(grid: ContourGrid, bases: Vec<Vec<StateVector>>, hamiltonian: Operator) -> Result<Self> {
        if bases.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                context: "outcome sets per grid",
                expected: grid.len(),
                found: bases.len(),
            });
        }
        check_dims(&hamiltonian, std::iter::empty())?;
        let dim = hamiltonian.rows();
        let last = bases.len() - 1;
        for (i, basis) in bases.iter().enumerate() {
            let interior = i != 0 && i != last;
            check_basis(basis, dim, interior, 1e-10)?;
        }
        let propagators = grid
            .times
            .windows(2)
            .map(|w| matexp_hermitian(&hamiltonian, w[1] - w[0]))
            .collect::<Result<_>>()?;
        Ok(Self {
            grid,
            bases,
            hamiltonian,
            propagators,
        })
    }

    pub fn grid(&self) -> &ContourGrid {
        &self.grid
    }

    pub fn bases(&self) -> &[Vec<StateVector>] {
        &self.bases
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    /// Labels index every time, boundary singletons included.
    pub fn labels(&self, cap: usize) -> Result<Vec<HistoryLabel>> {
        let sizes: Vec<usize> = self.bases.iter().map(Vec::len).collect();
        enumerate_labels(&sizes, cap)
    }

    fn check_label(&self, label: &HistoryLabel) -> Result<()> {
        if label.0.len() != self.bases.len() {
            return Err(Error::DimensionMismatch {
                context: "history label",
                expected: self.bases.len(),
                found: label.0.len(),
            });
        }
        if label.0.iter().zip(&self.bases).any(|(&k, b)| k >= b.len()) {
            return Err(invalid("history label", "outcome index exceeds its set"));
        }
        Ok(())
    }

    pub fn history(&self, label: &HistoryLabel) -> Result<ContourHistory> {
        self.check_label(label)?;
        let states = label
            .0
            .iter()
            .zip(&self.bases)
            .map(|(&k, b)| b[k].clone())
            .collect();
        ContourHistory::new(self.grid.clone(), states, self.hamiltonian.clone())
    }

    /// `|⟨b|U_i|a⟩|²` for every pair of outcomes across gap `i`.
    fn segment_weights(&self) -> Vec<Vec<Vec<f64>>> {
        self.propagators
            .iter()
            .enumerate()
            .map(|(i, u)| {
                self.bases[i]
                    .iter()
                    .map(|a| {
                        let ua = u.apply(a);
                        self.bases[i + 1].iter().map(|b| b.inner(&ua).norm_sqr()).collect()
                    })
                    .collect()
            })
            .collect()
    }
}

fn label_weight(weights: &[Vec<Vec<f64>>], label: &HistoryLabel) -> f64 {
    label
        .0
        .windows(2)
        .zip(weights)
        .map(|(k, w)| w[k[0]][k[1]])
        .product()
}

/// Measures of every label of the family, in enumeration order.
pub fn measure_distribution(family: &FamilySpec) -> Result<Vec<(HistoryLabel, f64)>> {
    let labels = family.labels(DEFAULT_LABEL_CAP)?;
    let weights = family.segment_weights();
    let raw: Vec<f64> = labels.iter().map(|l| label_weight(&weights, l)).collect();
    let total: f64 = raw.iter().sum();
    if total <= crate::tsvf::SELECTION_FLOOR {
        return Err(Error::ContradictorySelection(format!(
            "family weight {total:e} vanishes; the boundary fixed points are incompatible"
        )));
    }
    Ok(labels.into_iter().zip(raw).map(|(l, w)| (l, w / total)).collect())
}

pub fn measure_of_existence(family: &FamilySpec, label: &HistoryLabel) -> Result<f64> {
    family.check_label(label)?;
    let distribution = measure_distribution(family)?;
    Ok(distribution
        .into_iter()
        .find(|(l, _)| l == label)
        .map(|(_, m)| m)
        .expect("label drawn from the family"))
}

/// `⊗_i Σ_k ⟦k_i⟧⟦k_i⟧†` with its label enumeration.
#[derive(Clone, Debug)]
pub struct FamilyProjector {
    bases: Vec<Vec<StateVector>>,
    per_time: Vec<Operator>,
    labels: Vec<HistoryLabel>,
}

pub fn family_projector(family: &FamilySpec) -> Result<FamilyProjector> {
    let per_time = family
        .bases
        .iter()
        .map(|basis| {
            let d = basis[0].dim();
            basis.iter().fold(Operator::zeros(d * d, d * d), |acc, k| {
                &acc + &k.tensor(k).projector()
            })
        })
        .collect();
    Ok(FamilyProjector {
        bases: family.bases.clone(),
        per_time,
        labels: family.labels(DEFAULT_LABEL_CAP)?,
    })
}

impl FamilyProjector {
    /// Per-time factors on `H_b ⊗ H_f`.
    pub fn per_time(&self) -> &[Operator] {
        &self.per_time
    }

    pub fn labels(&self) -> &[HistoryLabel] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.per_time.iter().map(Operator::rows).product()
    }

    /// Dense tensor product of the per-time factors.
    pub fn operator(&self) -> Result<Operator> {
        if self.dim() > MAX_DENSE_DIM {
            return Err(invalid(
                "family projector",
                format!("dimension {} exceeds the dense limit {MAX_DENSE_DIM}", self.dim()),
            ));
        }
        Ok(self
            .per_time
            .iter()
            .fold(Operator::identity(1), |acc, p| acc.tensor(p)))
    }

    /// `⊗_i ⟦k_i⟧`.
    pub fn history_vector(&self, label: &HistoryLabel) -> StateVector {
        label
            .0
            .iter()
            .zip(&self.bases)
            .fold(StateVector::new(vec![ONE]), |acc, (&k, basis)| {
                acc.tensor(&basis[k].tensor(&basis[k]))
            })
    }

    /// Coefficients `Π_i c^b_{k_i} c^f_{k_i}` of each history in the image of
    /// the universal product state with per-time factors `(Ψ^b_i, Ψ^f_i)`.
    pub fn history_coefficients(
        &self,
        universal: &[(StateVector, StateVector)],
    ) -> Result<Vec<(HistoryLabel, C64)>> {
        if universal.len() != self.bases.len() {
            return Err(Error::DimensionMismatch {
                context: "universal state factors",
                expected: self.bases.len(),
                found: universal.len(),
            });
        }
        let amplitudes: Vec<Vec<C64>> = universal
            .iter()
            .zip(&self.bases)
            .map(|((b, f), basis)| {
                if b.dim() != basis[0].dim() || f.dim() != basis[0].dim() {
                    return Err(Error::DimensionMismatch {
                        context: "universal state factor",
                        expected: basis[0].dim(),
                        found: b.dim().max(f.dim()),
                    });
                }
                Ok(basis.iter().map(|k| k.inner(b) * k.inner(f)).collect())
            })
            .collect::<Result<_>>()?;
        Ok(self
            .labels
            .iter()
            .map(|l| {
                let coeff = l
                    .0
                    .iter()
                    .zip(&amplitudes)
                    .fold(ONE, |acc, (&k, a)| acc * a[k]);
                (l.clone(), coeff)
            })
            .collect())
    }
}

/// `(t̂ ⊗ I + I ⊗ t̂)/2` on the doubled time lattice `H_b ⊗ H_f`.
#[derive(Clone, Debug)]
pub struct FixedPointTimeOperator {
    time: TimeOperator,
}

pub fn fp_time_operator(lattice: EnergyLattice) -> FixedPointTimeOperator {
    FixedPointTimeOperator {
        time: time_operator(lattice),
    }
}

impl FixedPointTimeOperator {
    pub fn single_branch(&self) -> &TimeOperator {
        &self.time
    }

    pub fn dim(&self) -> usize {
        let n = self.time.lattice().dim();
        n * n
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        let n = self.time.lattice().dim();
        assert_eq!(v.dim(), n * n, "doubled lattice vector has the wrong length");
        let x = DMatrix::from_row_slice(n, n, v.amplitudes());
        let t = self.time.operator().matrix();
        let y = (t * &x + &x * t.transpose()) * c(0.5, 0.0);
        StateVector::new(y.transpose().iter().copied().collect())
    }

    /// Dense form; refused above the dense limit.
    pub fn to_operator(&self) -> Result<Operator> {
        if self.dim() > MAX_DENSE_DIM {
            return Err(invalid(
                "fixed-point time operator",
                format!("dimension {} exceeds the dense limit {MAX_DENSE_DIM}", self.dim()),
            ));
        }
        let t = self.time.operator();
        let id = Operator::identity(t.rows());
        Ok((&t.tensor(&id) + &id.tensor(t)).scale(c(0.5, 0.0)))
    }

    /// `⟦τ_n⟧ = |τ_n⟩_b ⊗ |τ_n⟩_f` for time index `n` in basis order.
    pub fn lattice_fixed_point(&self, n: usize) -> StateVector {
        let tau = self.time.eigenstate(n);
        tau.tensor(&tau)
    }

    /// `‖t̂^FP ⟦τ_n⟧ − t_n ⟦τ_n⟧‖`.
    pub fn eigen_residual(&self, n: usize) -> f64 {
        let v = self.lattice_fixed_point(n);
        let tn = self.time.values()[n];
        (&self.apply(&v) - &v.scale(c(tn, 0.0))).norm()
    }

    /// `⟨t̂^FP⟩` on the normalized ray of `v`; `None` for the zero vector.
    pub fn expectation(&self, v: &StateVector) -> Option<f64> {
        let n2 = v.norm_sqr();
        (n2 > 0.0).then(|| v.inner(&self.apply(v)).re / n2)
    }
}
