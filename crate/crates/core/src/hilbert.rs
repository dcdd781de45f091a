//! Finite-dimensional complex Hilbert spaces: states, operators, projector
//! families, tensor products, unitary evolution, Born probabilities and the
//! Lüders collapse.
//!
//! Natural units throughout (ħ = 1). Everything here is immutable after
//! construction and every sum runs left to right, so results do not depend
//! on how independent calls are scheduled.

use alloc::format;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fmath;
use crate::tolerance::Tolerances;
use crate::C64;

const TOL: Tolerances = Tolerances::DEFAULT;

/// A ket |ψ⟩. Not necessarily normalized; see [`StateVector::is_normalized`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: DVector<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::validation("state.dim", "must be at least 1"));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::validation("state.amplitudes", "must be finite"));
        }
        Ok(Self { amps: DVector::from_vec(amplitudes) })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    /// The computational basis vector |k⟩ of a `dim`-dimensional space.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::validation("basis.index", format!("{k} is out of range for dim {dim}")));
        }
        let mut amps = alloc::vec![C64::new(0.0, 0.0); dim];
        amps[k] = C64::new(1.0, 0.0);
        Self::new(amps)
    }

    pub(crate) fn from_dvector(amps: DVector<C64>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amps.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().fold(0.0, |acc, a| acc + a.norm_sqr())
    }

    pub fn norm(&self) -> f64 {
        fmath::sqrt(self.norm_sqr())
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        fmath::abs(self.norm_sqr() - 1.0) <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::validation("state", "cannot normalize the zero vector"));
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.amps
            .iter()
            .zip(other.amps.iter())
            .fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { amps: self.amps.map(|a| a * c) }
    }

    /// |self⟩⟨self|.
    pub fn projector(&self) -> LinearOperator {
        LinearOperator::outer(self, self)
    }

    /// Max-norm distance to `other` after removing the best global phase.
    pub fn phase_invariant_distance(&self, other: &StateVector) -> f64 {
        let overlap = self.inner(other);
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max)
    }
}

/// A square complex matrix acting on a `dim`-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOperator {
    m: DMatrix<C64>,
}

impl LinearOperator {
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::validation("operator", "matrix must be square"));
        }
        if m.nrows() == 0 {
            return Err(Error::validation("operator.dim", "must be at least 1"));
        }
        Ok(Self { m })
    }

    /// Builds from row-major entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Self::from_matrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self { m: DMatrix::from_fn(dim, dim, f) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: DMatrix::zeros(dim, dim) }
    }

    /// Real diagonal operator.
    pub fn diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        Self::from_fn(dim, |i, j| if i == j { C64::new(diag[i], 0.0) } else { C64::new(0.0, 0.0) })
    }

    /// |ket⟩⟨bra|.
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Self {
        Self { m: ket.as_dvector() * bra.as_dvector().adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { m: self.m.map(|a| a * c) }
    }

    pub fn apply(&self, psi: &StateVector) -> StateVector {
        StateVector::from_dvector(&self.m * psi.as_dvector())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).fold(C64::new(0.0, 0.0), |acc, i| acc + self.m[(i, i)])
    }

    /// Tr(self · other) without forming the product.
    pub fn trace_of_product(&self, other: &LinearOperator) -> C64 {
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                acc += self.m[(j, k)] * other.m[(k, j)];
            }
        }
        acc
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn commutator(&self, other: &LinearOperator) -> LinearOperator {
        &(self * other) - &(other * self)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// max |(U U† − I)_ij|.
    pub fn unitarity_residual(&self) -> f64 {
        (&(self * &self.adjoint()) - &LinearOperator::identity(self.dim())).max_abs()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    /// max |(P² − P)_ij| combined with the hermiticity residual.
    pub fn projector_residual(&self) -> f64 {
        (&(self * self) - self).max_abs().max(self.hermiticity_residual())
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        self.projector_residual() <= tol
    }
}

impl Mul for &LinearOperator {
    type Output = LinearOperator;
    fn mul(self, rhs: &LinearOperator) -> LinearOperator {
        LinearOperator { m: &self.m * &rhs.m }
    }
}

impl Add for &LinearOperator {
    type Output = LinearOperator;
    fn add(self, rhs: &LinearOperator) -> LinearOperator {
        LinearOperator { m: &self.m + &rhs.m }
    }
}

impl Sub for &LinearOperator {
    type Output = LinearOperator;
    fn sub(self, rhs: &LinearOperator) -> LinearOperator {
        LinearOperator { m: &self.m - &rhs.m }
    }
}

/// A complete set of mutually orthogonal projectors, each tagged with the
/// real outcome value it represents. Labels may repeat (degenerate outcomes
/// kept apart by their projectors).
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorFamily {
    members: Vec<LinearOperator>,
    labels: Vec<f64>,
}

impl ProjectorFamily {
    pub fn new(members: Vec<LinearOperator>, labels: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(members, labels, TOL.structural)
    }

    pub fn with_tolerance(members: Vec<LinearOperator>, labels: Vec<f64>, tol: f64) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::validation("family.members", "must be nonempty"));
        }
        if members.len() != labels.len() {
            return Err(Error::validation(
                "family.labels",
                format!("{} labels for {} members", labels.len(), members.len()),
            ));
        }
        let dim = members[0].dim();
        for (i, p) in members.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
            }
            let r = p.projector_residual();
            if r > tol {
                return Err(Error::validation(
                    format!("family.members[{i}]"),
                    format!("not a projector (residual {r:e} > {tol:e})"),
                ));
            }
        }
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                let r = (&members[i] * &members[j]).max_abs();
                if r > tol {
                    return Err(Error::validation(
                        format!("family.members[{i}],[{j}]"),
                        format!("not orthogonal (residual {r:e} > {tol:e})"),
                    ));
                }
            }
        }
        let mut sum = LinearOperator::zeros(dim);
        for p in &members {
            sum = &sum + p;
        }
        let r = (&sum - &LinearOperator::identity(dim)).max_abs();
        if r > tol {
            return Err(Error::validation("family", format!("incomplete (residual {r:e} > {tol:e})")));
        }
        Ok(Self { members, labels })
    }

    /// Rank-1 family {|b_i⟩⟨b_i|} from an orthonormal basis.
    pub fn from_basis(basis: &[StateVector], labels: Vec<f64>) -> Result<Self> {
        Self::new(basis.iter().map(StateVector::projector).collect(), labels)
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[LinearOperator] {
        &self.members
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LinearOperator, f64)> {
        self.members.iter().zip(self.labels.iter().copied())
    }
}

/// Kronecker product with the left operand's index major.
pub trait TensorProduct: Sized {
    fn dimension(&self) -> usize;
    fn kron_unchecked(&self, other: &Self) -> Self;
}

impl TensorProduct for StateVector {
    fn dimension(&self) -> usize {
        self.dim()
    }
    fn kron_unchecked(&self, other: &Self) -> Self {
        StateVector::from_dvector(self.amps.kronecker(&other.amps))
    }
}

impl TensorProduct for LinearOperator {
    fn dimension(&self) -> usize {
        self.dim()
    }
    fn kron_unchecked(&self, other: &Self) -> Self {
        LinearOperator { m: self.m.kronecker(&other.m) }
    }
}

/// a ⊗ b, refusing products larger than the default dimension cap.
pub fn tensor_product<T: TensorProduct>(a: &T, b: &T) -> Result<T> {
    tensor_product_capped(a, b, TOL.max_dim)
}

pub fn tensor_product_capped<T: TensorProduct>(a: &T, b: &T, cap: usize) -> Result<T> {
    let requested = a.dimension() as u128 * b.dimension() as u128;
    if requested > cap as u128 {
        return Err(Error::Capacity { requested, cap });
    }
    Ok(a.kron_unchecked(b))
}

/// Eigendecomposition H = V diag(E) V† of a Hermitian Hamiltonian, used to
/// build e^{−iHt} for any t.
#[derive(Clone, Debug)]
pub struct Propagator {
    energies: Vec<f64>,
    vectors: DMatrix<C64>,
}

impl Propagator {
    pub fn new(hamiltonian: &LinearOperator) -> Result<Self> {
        let r = hamiltonian.hermiticity_residual();
        if r > TOL.scalar {
            return Err(Error::validation("hamiltonian", format!("not Hermitian (residual {r:e})")));
        }
        let eig = SymmetricEigen::new(hamiltonian.matrix().clone());
        Ok(Self { energies: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    fn phases(&self, t: f64) -> DVector<C64> {
        DVector::from_iterator(
            self.dim(),
            self.energies.iter().map(|&e| C64::new(0.0, -e * t).exp()),
        )
    }

    /// e^{−iHt}.
    pub fn unitary(&self, t: f64) -> LinearOperator {
        let phases = self.phases(t);
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        LinearOperator { m: scaled * self.vectors.adjoint() }
    }

    /// e^{−iHt}|ψ⟩.
    pub fn evolve(&self, t: f64, psi: &StateVector) -> StateVector {
        let coeffs = self.vectors.adjoint() * psi.as_dvector();
        let rotated = coeffs.component_mul(&self.phases(t));
        StateVector::from_dvector(&self.vectors * rotated)
    }
}

/// e^{−iHt}|ψ⟩ via the eigendecomposition of `h`.
pub fn evolve(h: &LinearOperator, t: f64, psi: &StateVector) -> Result<StateVector> {
    if h.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: psi.dim() });
    }
    Ok(Propagator::new(h)?.evolve(t, psi))
}

fn check_projector(p: &LinearOperator, field: &str) -> Result<()> {
    let r = p.projector_residual();
    if r > TOL.structural {
        return Err(Error::validation(field, format!("not a projector (residual {r:e})")));
    }
    Ok(())
}

/// ⟨ψ|P|ψ⟩ for a normalized ψ and a projector P.
pub fn born_probability(psi: &StateVector, p: &LinearOperator) -> Result<f64> {
    if p.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: psi.dim() });
    }
    if !psi.is_normalized(TOL.scalar) {
        return Err(Error::validation("psi", format!("not normalized (norm² = {})", psi.norm_sqr())));
    }
    check_projector(p, "projector")?;
    born_unchecked(psi, p)
}

pub(crate) fn born_unchecked(psi: &StateVector, p: &LinearOperator) -> Result<f64> {
    let value = psi.inner(&p.apply(psi));
    if fmath::abs(value.im) > TOL.scalar {
        return Err(Error::validation("projector", format!("expectation has imaginary part {:e}", value.im)));
    }
    let mut prob = value.re;
    if (-TOL.scalar..0.0).contains(&prob) {
        prob = 0.0;
    } else if prob > 1.0 && prob <= 1.0 + TOL.scalar {
        prob = 1.0;
    }
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::validation("projector", format!("expectation {prob} outside [0, 1]")));
    }
    Ok(prob)
}

/// N·P|ψ⟩ with N fixing unit norm.
pub fn luders_collapse(psi: &StateVector, p: &LinearOperator) -> Result<StateVector> {
    luders_collapse_with(psi, p, TOL.collapse)
}

pub fn luders_collapse_with(psi: &StateVector, p: &LinearOperator, threshold: f64) -> Result<StateVector> {
    let prob = born_probability(psi, p)?;
    collapse_unchecked(psi, p, prob, threshold)
}

pub(crate) fn collapse_unchecked(
    psi: &StateVector,
    p: &LinearOperator,
    prob: f64,
    threshold: f64,
) -> Result<StateVector> {
    if prob <= threshold {
        return Err(Error::ZeroProbabilityBranch { probability: prob });
    }
    p.apply(psi).normalized()
}
