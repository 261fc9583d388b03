//! Dense complex vectors and operators over finite Hilbert spaces.
//!
//! Tensor products follow the Kronecker convention in which the left factor
//! carries the most significant index, so `|a⟩ ⊗ |b⟩` has amplitude
//! `a[i]·b[j]` at position `i·dim(b) + j`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// Tolerance for algebraic identities that hold exactly in exact arithmetic.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Relative entrywise tolerance used to accept a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(DVector<C64>);

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        Self(DVector::from_vec(amplitudes))
    }

    pub fn from_real(amplitudes: &[f64]) -> Self {
        Self(DVector::from_iterator(
            amplitudes.len(),
            amplitudes.iter().map(|&x| c(x, 0.0)),
        ))
    }

    pub fn from_vector(v: DVector<C64>) -> Self {
        Self(v)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut v = DVector::zeros(dim);
        v[index] = ONE;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<C64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroState);
        }
        Ok(Self(&self.0 / c(n, 0.0)))
    }

    pub fn require_normalized(&self, tol: f64) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > tol {
            return Err(Error::NotNormalized { norm: n });
        }
        Ok(())
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dims differ");
        self.0.dotc(&other.0)
    }

    /// `|⟨a|b⟩|² / (‖a‖²‖b‖²)`; zero when either vector vanishes.
    pub fn fidelity(&self, other: &Self) -> f64 {
        let den = self.norm_sqr() * other.norm_sqr();
        if den == 0.0 {
            return 0.0;
        }
        self.inner(other).norm_sqr() / den
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    /// `|self⟩⟨other|`
    pub fn outer(&self, other: &Self) -> Operator {
        Operator(&self.0 * other.0.adjoint())
    }

    pub fn projector(&self) -> Operator {
        self.outer(self)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "compared vectors differ in dim");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &StateVector {
    type Output = StateVector;
    fn add(self, rhs: &StateVector) -> StateVector {
        StateVector(&self.0 + &rhs.0)
    }
}

impl Sub for &StateVector {
    type Output = StateVector;
    fn sub(self, rhs: &StateVector) -> StateVector {
        StateVector(&self.0 - &rhs.0)
    }
}

impl Neg for &StateVector {
    type Output = StateVector;
    fn neg(self) -> StateVector {
        StateVector(-&self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl Operator {
    pub fn from_matrix(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds from row-major nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != cols) {
            return Err(Error::DimensionMismatch {
                context: "matrix row",
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(Self::from_fn(r, cols, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| c(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Operator whose columns are the given vectors.
    pub fn from_columns(columns: &[StateVector]) -> Self {
        let rows = columns.first().map_or(0, StateVector::dim);
        Self::from_fn(rows, columns.len(), |i, j| columns[j].0[i])
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { ZERO })
    }

    pub fn diagonal_complex(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn column(&self, col: usize) -> StateVector {
        StateVector(self.0.column(col).into_owned())
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn apply(&self, psi: &StateVector) -> StateVector {
        assert_eq!(self.cols(), psi.dim(), "operator/state dims differ");
        StateVector(&self.0 * &psi.0)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `⟨ψ|A|ψ⟩` without normalization.
    pub fn expectation(&self, psi: &StateVector) -> C64 {
        psi.inner(&self.apply(psi))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape(), "compared operators differ in shape");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise `|A − A†|`; infinite for non-square matrices.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut dev = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol * self.max_abs().max(1.0)
    }

    /// Largest entrywise `|U†U − I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (self.dagger() * self).max_abs_diff(&Operator::identity(self.rows()))
    }

    pub(crate) fn require_hermitian(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                context: "Hermitian operator columns",
                expected: self.rows(),
                found: self.cols(),
            });
        }
        let deviation = self.hermiticity_deviation();
        if deviation > HERMITIAN_TOL * self.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.cols(), rhs.rows(), "operator product dims differ");
        Operator(&self.0 * &rhs.0)
    }
}

impl Mul<&Operator> for Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        &self * rhs
    }
}

impl Mul<&StateVector> for &Operator {
    type Output = StateVector;
    fn mul(self, rhs: &StateVector) -> StateVector {
        self.apply(rhs)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

/// Kronecker product shared by states and operators.
pub trait Tensor: Sized {
    fn kron(&self, other: &Self) -> Self;
}

impl Tensor for StateVector {
    fn kron(&self, other: &Self) -> Self {
        self.tensor(other)
    }
}

impl Tensor for Operator {
    fn kron(&self, other: &Self) -> Self {
        self.tensor(other)
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.kron(b)
}

pub fn dagger(a: &Operator) -> Operator {
    a.dagger()
}

#[derive(Clone, Debug)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, ordered like `values`.
    pub vectors: Operator,
}

impl Eigen {
    pub fn vector(&self, j: usize) -> StateVector {
        self.vectors.column(j)
    }
}

pub fn eig_hermitian(h: &Operator) -> Result<Eigen> {
    h.require_hermitian()?;
    let n = h.rows();
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: Operator::zeros(0, 0),
        });
    }
    let symmetric = (&h.0 + h.0.adjoint()) * c(0.5, 0.0);
    let eig = symmetric.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = Operator::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Eigen { values, vectors })
}

/// `e^{−isH}` through the spectral decomposition of `H`.
pub fn matexp_hermitian(h: &Operator, s: f64) -> Result<Operator> {
    let eig = eig_hermitian(h)?;
    let phases: Vec<C64> = eig.values.iter().map(|&l| (-I * (s * l)).exp()).collect();
    let v = &eig.vectors.0;
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * phases[j]);
    Ok(Operator(scaled * v.adjoint()))
}

/// Orthonormal basis of the approximate kernel of a square `A`.
///
/// Eigenvectors of `A†A` are screened by their direct residual, keeping those
/// with `‖Av‖ ≤ tol·‖A‖` where `‖A‖` is the spectral norm.
pub fn null_space(a: &Operator, tol: f64) -> Result<Vec<StateVector>> {
    if !a.is_square() {
        return Err(invalid(
            "null_space operand",
            format!("expected a square matrix, got {}x{}", a.rows(), a.cols()),
        ));
    }
    if a.rows() == 0 {
        return Ok(Vec::new());
    }
    let gram = a.dagger() * a;
    let eig = eig_hermitian(&gram)?;
    let spectral_norm = eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt();
    let bound = tol * spectral_norm;
    Ok((0..a.rows())
        .map(|j| eig.vector(j))
        .filter(|v| a.apply(v).norm() <= bound)
        .collect())
}

/// Unitary DFT with `F[k][n] = e^{−2πi·kn/d}/√d`.
pub fn dft_matrix(d: usize) -> Operator {
    let scale = 1.0 / (d as f64).sqrt();
    Operator::from_fn(d, d, |k, n| {
        let r = (k * n) % d;
        C64::from_polar(scale, -2.0 * std::f64::consts::PI * r as f64 / d as f64)
    })
}

pub fn computational_basis(dim: usize) -> Vec<StateVector> {
    (0..dim).map(|i| StateVector::basis(dim, i)).collect()
}

pub fn pauli_x() -> Operator {
    Operator::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO })
}

pub fn pauli_y() -> Operator {
    Operator::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => -I,
        (1, 0) => I,
        _ => ZERO,
    })
}

pub fn pauli_z() -> Operator {
    Operator::diagonal(&[1.0, -1.0])
}

/// Labelled tensor factors, most significant first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductSpace {
    factors: Vec<(String, usize)>,
}

impl ProductSpace {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let factors: Vec<(String, usize)> =
            factors.into_iter().map(|(l, d)| (l.into(), d)).collect();
        for (i, (label, dim)) in factors.iter().enumerate() {
            if *dim == 0 {
                return Err(invalid("factor dimension", format!("factor {label:?} has dim 0")));
            }
            if factors[..i].iter().any(|(other, _)| other == label) {
                return Err(invalid("factor label", format!("{label:?} appears twice")));
            }
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[(String, usize)] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|(_, d)| d).product()
    }

    pub fn factor_dim(&self, label: &str) -> Result<usize> {
        self.position(label).map(|i| self.factors[i].1)
    }

    fn position(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownFactor(label.to_owned()))
    }

    pub fn without(&self, label: &str) -> Result<Self> {
        let i = self.position(label)?;
        let mut factors = self.factors.clone();
        factors.remove(i);
        Ok(Self { factors })
    }
}

/// Contracts factor `slot` of `psi` with `⟨bra|`.
pub fn partial_project(
    bra: &StateVector,
    space: &ProductSpace,
    slot: &str,
    psi: &StateVector,
) -> Result<StateVector> {
    if psi.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            context: "partial_project state",
            expected: space.dim(),
            found: psi.dim(),
        });
    }
    let pos = space.position(slot)?;
    let mid = space.factors[pos].1;
    if bra.dim() != mid {
        return Err(Error::DimensionMismatch {
            context: "partial_project bra",
            expected: mid,
            found: bra.dim(),
        });
    }
    let left: usize = space.factors[..pos].iter().map(|(_, d)| d).product();
    let right: usize = space.factors[pos + 1..].iter().map(|(_, d)| d).product();
    let b = bra.amplitudes();
    let p = psi.amplitudes();
    let mut out = vec![ZERO; left * right];
    for l in 0..left {
        for (m, bm) in b.iter().enumerate() {
            let w = bm.conj();
            if w == ZERO {
                continue;
            }
            let base = (l * mid + m) * right;
            for r in 0..right {
                out[l * right + r] += w * p[base + r];
            }
        }
    }
    Ok(StateVector::new(out))
}
