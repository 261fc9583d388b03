//! Decoherent histories with a pure initial state and rank-1 outcomes.
//!
//! Outcome vectors are rotated once into the Heisenberg picture at
//! construction, `|α(t_k)⟩ = U†(t_k − t_1)|α⟩`, so class operators, record
//! states and the decoherence functional reduce to chains of overlaps.

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, matexp_hermitian, Operator, StateVector, C64};

pub const DEFAULT_LABEL_CAP: usize = 1_000_000;

/// One outcome index per time after the first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HistoryLabel(pub Vec<usize>);

impl HistoryLabel {
    pub fn outcomes(&self) -> &[usize] {
        &self.0
    }
}

/// Every label of a product of outcome sets, first slot most significant.
pub(crate) fn enumerate_labels(sizes: &[usize], cap: usize) -> Result<Vec<HistoryLabel>> {
    let count = sizes.iter().map(|&s| s as u128).product::<u128>();
    if count > cap as u128 {
        return Err(Error::TooManyLabels { count, cap });
    }
    let mut labels = Vec::with_capacity(count as usize);
    let mut current = vec![0usize; sizes.len()];
    if count == 0 {
        return Ok(labels);
    }
    loop {
        labels.push(HistoryLabel(current.clone()));
        let mut slot = sizes.len();
        loop {
            if slot == 0 {
                return Ok(labels);
            }
            slot -= 1;
            current[slot] += 1;
            if current[slot] < sizes[slot] {
                break;
            }
            current[slot] = 0;
        }
    }
}

/// Checks that `basis` is orthonormal and, if `complete`, resolves the identity.
pub(crate) fn check_basis(basis: &[StateVector], dim: usize, complete: bool, tol: f64) -> Result<()> {
    if basis.is_empty() {
        return Err(invalid("basis", "empty outcome set"));
    }
    if let Some(v) = basis.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch {
            context: "basis vector",
            expected: dim,
            found: v.dim(),
        });
    }
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate().skip(i) {
            let want = if i == j { 1.0 } else { 0.0 };
            let got = a.inner(b);
            if (got - c(want, 0.0)).norm() > tol {
                return Err(invalid(
                    "basis",
                    format!("vectors {i} and {j} have overlap {got}, expected {want}"),
                ));
            }
        }
    }
    if complete && basis.len() != dim {
        return Err(invalid(
            "basis",
            format!("{} vectors cannot resolve the identity in dimension {dim}", basis.len()),
        ));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ProjectorFamily {
    times: Vec<f64>,
    bases: Vec<Vec<StateVector>>,
    hamiltonian: Operator,
    initial: StateVector,
    rotated: Vec<Vec<StateVector>>,
}

impl ProjectorFamily {
    /// `bases[k]` is the outcome basis at `times[k + 1]`.
    pub fn new(
        times: Vec<f64>,
        bases: Vec<Vec<StateVector>>,
        hamiltonian: Operator,
        initial: StateVector,
    ) -> Result<Self> {
        if times.len() < 2 {
            return Err(invalid("times", "a family needs at least two times"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("times", "times must increase strictly"));
        }
        if bases.len() != times.len() - 1 {
            return Err(Error::DimensionMismatch {
                context: "bases per time",
                expected: times.len() - 1,
                found: bases.len(),
            });
        }
        hamiltonian.require_hermitian()?;
        let dim = hamiltonian.rows();
        if initial.dim() != dim {
            return Err(Error::DimensionMismatch {
                context: "initial state",
                expected: dim,
                found: initial.dim(),
            });
        }
        initial.require_normalized(1e-10)?;
        for basis in &bases {
            check_basis(basis, dim, true, 1e-10)?;
        }
        let rotated = times[1..]
            .iter()
            .zip(&bases)
            .map(|(&t, basis)| {
                let u_dag = matexp_hermitian(&hamiltonian, t - times[0])?.dagger();
                Ok(basis.iter().map(|v| u_dag.apply(v)).collect())
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            times,
            bases,
            hamiltonian,
            initial,
            rotated,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn bases(&self) -> &[Vec<StateVector>] {
        &self.bases
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn initial(&self) -> &StateVector {
        &self.initial
    }

    pub fn label_count(&self) -> u128 {
        self.bases.iter().map(|b| b.len() as u128).product()
    }

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
        for (k, (&a, basis)) in label.0.iter().zip(&self.bases).enumerate() {
            if a >= basis.len() {
                return Err(invalid(
                    "history label",
                    format!("outcome {a} at slot {k} exceeds basis size {}", basis.len()),
                ));
            }
        }
        Ok(())
    }

    /// Heisenberg-picture outcome vector at time index `k ≥ 1`.
    pub fn rotated_outcome(&self, k: usize, outcome: usize) -> Result<&StateVector> {
        if k == 0 || k >= self.times.len() {
            return Err(invalid("time index", format!("{k} has no outcome basis")));
        }
        self.rotated[k - 1]
            .get(outcome)
            .ok_or_else(|| invalid("outcome", format!("{outcome} exceeds basis size at time {k}")))
    }
}

/// `U†(t_k, t_1)|v⟩⟨v|U(t_k, t_1)` for an arbitrary vector and offset.
pub fn heisenberg_projector_at(h: &Operator, offset: f64, v: &StateVector) -> Result<Operator> {
    let u_dag = matexp_hermitian(h, offset)?.dagger();
    Ok(u_dag.apply(v).projector())
}

/// Projector onto outcome `outcome` at time index `k ≥ 1`.
pub fn heisenberg_projector(family: &ProjectorFamily, k: usize, outcome: usize) -> Result<Operator> {
    Ok(family.rotated_outcome(k, outcome)?.projector())
}

/// `P_{α_N}(t_N) ··· P_{α_2}(t_2)`.
pub fn class_operator(family: &ProjectorFamily, label: &HistoryLabel) -> Result<Operator> {
    family.check_label(label)?;
    let dim = family.hamiltonian.rows();
    let mut op = Operator::identity(dim);
    for (k, &a) in label.0.iter().enumerate() {
        op = &family.rotated[k][a].projector() * &op;
    }
    Ok(op)
}

/// `C_α|ψ_1⟩`, unnormalized.
pub fn record_state(family: &ProjectorFamily, label: &HistoryLabel) -> Result<StateVector> {
    family.check_label(label)?;
    Ok(chain(family, label.0.iter().map(std::slice::from_ref)))
}

fn chain<'a>(family: &ProjectorFamily, sets: impl Iterator<Item = &'a [usize]>) -> StateVector {
    let mut v = family.initial.clone();
    for (k, set) in sets.enumerate() {
        let mut next = StateVector::zeros(v.dim());
        for &a in set {
            let r = &family.rotated[k][a];
            next = &next + &r.scale(r.inner(&v));
        }
        v = next;
    }
    v
}

/// `‖C_α ψ_1‖²`, cross-checked against the product of consecutive overlaps.
pub fn history_probability(family: &ProjectorFamily, label: &HistoryLabel) -> Result<f64> {
    let p = record_state(family, label)?.norm_sqr();
    let mut amplitude = c(1.0, 0.0);
    let mut previous = &family.initial;
    for (k, &a) in label.0.iter().enumerate() {
        let r = &family.rotated[k][a];
        amplitude *= previous.inner(r);
        previous = r;
    }
    let overlap_form = amplitude.norm_sqr();
    if (p - overlap_form).abs() > 1e-10 {
        return Err(Error::InvariantBreach(format!(
            "history probability {p} disagrees with overlap chain {overlap_form}"
        )));
    }
    Ok(p)
}

/// `⟨ψ_1|C_α† C_β|ψ_1⟩`.
pub fn decoherence_functional(
    family: &ProjectorFamily,
    alpha: &HistoryLabel,
    beta: &HistoryLabel,
) -> Result<C64> {
    Ok(record_state(family, alpha)?.inner(&record_state(family, beta)?))
}

/// Probability of a coarse-grained history whose outcome at each time is a
/// set of fine outcomes.
pub fn coarse_grained_probability(family: &ProjectorFamily, sets: &[Vec<usize>]) -> Result<f64> {
    if sets.len() != family.bases.len() {
        return Err(Error::DimensionMismatch {
            context: "coarse-grained label",
            expected: family.bases.len(),
            found: sets.len(),
        });
    }
    for (k, set) in sets.iter().enumerate() {
        let mut seen = set.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != set.len() || seen.last().is_some_and(|&a| a >= family.bases[k].len()) {
            return Err(invalid("coarse-grained label", format!("bad outcome set at slot {k}")));
        }
    }
    Ok(chain(family, sets.iter().map(Vec::as_slice)).norm_sqr())
}

/// All labels with the full decoherence functional, `matrix[a][b] = 𝔇(a, b)`.
pub fn decoherence_matrix(
    family: &ProjectorFamily,
    cap: usize,
) -> Result<(Vec<HistoryLabel>, Vec<Vec<C64>>)> {
    let labels = family.labels(cap)?;
    let records: Vec<StateVector> = labels
        .iter()
        .map(|l| record_state(family, l))
        .collect::<Result<_>>()?;
    let matrix = records
        .iter()
        .map(|a| records.iter().map(|b| a.inner(b)).collect())
        .collect();
    Ok((labels, matrix))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoherenceReport {
    pub decoherent: bool,
    pub max_off_diagonal: f64,
}

pub fn check_decoherence(family: &ProjectorFamily, tol: f64, cap: usize) -> Result<DecoherenceReport> {
    let (_, matrix) = decoherence_matrix(family, cap)?;
    let mut worst = 0.0_f64;
    for (a, row) in matrix.iter().enumerate() {
        for (b, z) in row.iter().enumerate() {
            if a != b {
                worst = worst.max(z.norm());
            }
        }
    }
    Ok(DecoherenceReport {
        decoherent: worst <= tol,
        max_off_diagonal: worst,
    })
}
