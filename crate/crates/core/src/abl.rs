//! The ABL rule: probabilities of an intermediate measurement outcome given
//! both a pre-selected initial state and a post-selected final outcome.
//!
//! Three forms are provided, each a special case of the next:
//!
//! - [`abl_basic`]: non-degenerate basis, no dynamics,
//!   `|⟨c|b_i⟩⟨b_i|a⟩|² / Σ_j |⟨c|b_j⟩⟨b_j|a⟩|²`.
//! - [`abl_projective`]: arbitrary projector families,
//!   `Tr(P_c P_i P_a P_i) / Σ_j Tr(P_c P_j P_a P_j)`.
//! - [`abl_evolved`]: the projective form with unitary evolution between
//!   preparation, intermediate measurement (time t) and final measurement
//!   (time T).
//!
//! [`oracle_joint_distribution`] simulates the literal measurement sequence
//! (evolve, Born + Lüders collapse, evolve, Born) and is the reference the
//! closed forms are checked against.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath;
use crate::hilbert::{born_unchecked, collapse_unchecked, LinearOperator, ProjectorFamily, Propagator, StateVector};
use crate::tolerance::Tolerances;

const TOL: Tolerances = Tolerances::DEFAULT;

/// Probabilities over labelled outcomes, summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalDistribution {
    labels: Vec<f64>,
    probabilities: Vec<f64>,
}

impl ConditionalDistribution {
    pub fn new(labels: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        if labels.len() != probabilities.len() {
            return Err(Error::validation(
                "distribution",
                format!("{} labels for {} probabilities", labels.len(), probabilities.len()),
            ));
        }
        if labels.is_empty() {
            return Err(Error::validation("distribution", "must have at least one outcome"));
        }
        for (i, &p) in probabilities.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::validation(format!("distribution.probabilities[{i}]"), format!("{p} outside [0, 1]")));
            }
        }
        let total: f64 = probabilities.iter().sum();
        if fmath::abs(total - 1.0) > TOL.structural {
            return Err(Error::validation("distribution", format!("probabilities sum to {total}")));
        }
        Ok(Self { labels, probabilities })
    }

    /// Normalizes nonnegative weights; fails when their sum is below the
    /// impossibility threshold.
    pub fn from_weights(labels: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let denominator = weights.iter().fold(0.0, |acc, w| acc + w);
        if !(denominator >= TOL.impossibility) {
            return Err(Error::ImpossiblePostSelection { denominator });
        }
        let probabilities = weights.iter().map(|w| (w / denominator).clamp(0.0, 1.0)).collect();
        Self::new(labels, probabilities)
    }

    /// All probability on outcome `index`.
    pub fn point_mass(labels: Vec<f64>, index: usize) -> Result<Self> {
        let mut probabilities = alloc::vec![0.0; labels.len()];
        *probabilities
            .get_mut(index)
            .ok_or_else(|| Error::validation("distribution", "point-mass index out of range"))? = 1.0;
        Self::new(labels, probabilities)
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Merges outcomes with identical labels, keeping first-appearance order.
    pub fn by_label(&self) -> Self {
        let mut labels: Vec<f64> = Vec::new();
        let mut probabilities: Vec<f64> = Vec::new();
        for (&l, &p) in self.labels.iter().zip(&self.probabilities) {
            match labels.iter().position(|&x| x == l) {
                Some(k) => probabilities[k] += p,
                None => {
                    labels.push(l);
                    probabilities.push(p);
                }
            }
        }
        Self { labels, probabilities }
    }

    /// Total probability of outcomes carrying `label`.
    pub fn probability_of(&self, label: f64) -> f64 {
        self.labels
            .iter()
            .zip(&self.probabilities)
            .filter(|(&l, _)| l == label)
            .map(|(_, &p)| p)
            .sum()
    }

    pub fn expectation(&self) -> f64 {
        abl_expectation(self)
    }
}

/// Σ_i label_i · Pr_i.
pub fn abl_expectation(d: &ConditionalDistribution) -> f64 {
    d.labels.iter().zip(&d.probabilities).fold(0.0, |acc, (l, p)| acc + l * p)
}

/// The (|a⟩, {P_i}, P_c, H, t, T) data of the time-evolved ABL rule.
/// Preparation happens at time 0.
#[derive(Clone, Debug)]
pub struct PrePostScenario {
    initial: StateVector,
    intermediate: ProjectorFamily,
    final_projector: LinearOperator,
    hamiltonian: LinearOperator,
    t_mid: f64,
    t_final: f64,
}

impl PrePostScenario {
    pub fn new(
        initial: StateVector,
        intermediate: ProjectorFamily,
        final_projector: LinearOperator,
        hamiltonian: LinearOperator,
        t_mid: f64,
        t_final: f64,
    ) -> Result<Self> {
        let dim = initial.dim();
        for found in [intermediate.dim(), final_projector.dim(), hamiltonian.dim()] {
            if found != dim {
                return Err(Error::DimensionMismatch { expected: dim, found });
            }
        }
        if !(t_mid.is_finite() && t_final.is_finite() && 0.0 <= t_mid && t_mid <= t_final) {
            return Err(Error::validation("scenario.times", format!("need 0 ≤ t ({t_mid}) ≤ T ({t_final})")));
        }
        if !initial.is_normalized(TOL.scalar) {
            return Err(Error::validation("scenario.initial", "not normalized"));
        }
        let r = final_projector.projector_residual();
        if r > TOL.structural {
            return Err(Error::validation("scenario.final", format!("not a projector (residual {r:e})")));
        }
        let r = hamiltonian.hermiticity_residual();
        if r > TOL.scalar {
            return Err(Error::validation("scenario.hamiltonian", format!("not Hermitian (residual {r:e})")));
        }
        Ok(Self { initial, intermediate, final_projector, hamiltonian, t_mid, t_final })
    }

    pub fn initial(&self) -> &StateVector {
        &self.initial
    }

    pub fn intermediate(&self) -> &ProjectorFamily {
        &self.intermediate
    }

    pub fn final_projector(&self) -> &LinearOperator {
        &self.final_projector
    }

    pub fn hamiltonian(&self) -> &LinearOperator {
        &self.hamiltonian
    }

    pub fn t_mid(&self) -> f64 {
        self.t_mid
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }

    /// Same scenario with a different post-selection projector.
    pub fn with_final_projector(&self, final_projector: LinearOperator) -> Result<Self> {
        Self::new(
            self.initial.clone(),
            self.intermediate.clone(),
            final_projector,
            self.hamiltonian.clone(),
            self.t_mid,
            self.t_final,
        )
    }
}

/// ABL rule for an orthonormal basis {|b_i⟩} with H = 0. Outcome labels are
/// the basis indices.
pub fn abl_basic(a: &StateVector, b_basis: &[StateVector], c: &StateVector) -> Result<ConditionalDistribution> {
    let dim = a.dim();
    if c.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: c.dim() });
    }
    if b_basis.len() != dim {
        return Err(Error::validation("b_basis", format!("{} vectors do not span dimension {dim}", b_basis.len())));
    }
    for (i, bi) in b_basis.iter().enumerate() {
        if bi.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: bi.dim() });
        }
        for (j, bj) in b_basis.iter().enumerate().skip(i) {
            let expected = if i == j { 1.0 } else { 0.0 };
            let r = (bi.inner(bj) - crate::C64::new(expected, 0.0)).norm();
            if r > TOL.structural {
                return Err(Error::validation("b_basis", format!("not orthonormal at ({i}, {j}): residual {r:e}")));
            }
        }
    }
    if !a.is_normalized(TOL.scalar) || !c.is_normalized(TOL.scalar) {
        return Err(Error::validation("a/c", "states must be normalized"));
    }
    let weights = b_basis.iter().map(|b| (c.inner(b) * b.inner(a)).norm_sqr()).collect();
    ConditionalDistribution::from_weights((0..dim).map(|i| i as f64).collect(), weights)
}

/// Tr(C P_i A P_i) for each family member, with fixed summation order.
fn sandwich_weights(c: &LinearOperator, family: &ProjectorFamily, a: &LinearOperator) -> Vec<f64> {
    family
        .members()
        .iter()
        .map(|p| {
            let left = c * p;
            let right = a * p;
            left.trace_of_product(&right).re.max(0.0)
        })
        .collect()
}

/// Degenerate-projective ABL rule with H = 0.
pub fn abl_projective(
    p_a: &LinearOperator,
    family: &ProjectorFamily,
    p_c: &LinearOperator,
) -> Result<ConditionalDistribution> {
    let dim = family.dim();
    for found in [p_a.dim(), p_c.dim()] {
        if found != dim {
            return Err(Error::DimensionMismatch { expected: dim, found });
        }
    }
    for (op, field) in [(p_a, "p_a"), (p_c, "p_c")] {
        let r = op.projector_residual();
        if r > TOL.structural {
            return Err(Error::validation(field, format!("not a projector (residual {r:e})")));
        }
    }
    let rank = p_a.trace().re;
    if fmath::abs(rank - 1.0) > TOL.structural {
        return Err(Error::validation("p_a", format!("must be rank 1 (trace {rank})")));
    }
    let weights = sandwich_weights(p_c, family, p_a);
    ConditionalDistribution::from_weights(family.labels().to_vec(), weights)
}

/// Time-evolved ABL rule.
pub fn abl_evolved(s: &PrePostScenario) -> Result<ConditionalDistribution> {
    let propagator = Propagator::new(s.hamiltonian())?;
    abl_evolved_with(s, &propagator)
}

/// [`abl_evolved`] reusing a precomputed eigendecomposition of `s`'s
/// Hamiltonian.
pub fn abl_evolved_with(s: &PrePostScenario, propagator: &Propagator) -> Result<ConditionalDistribution> {
    if propagator.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: propagator.dim() });
    }
    let to_mid = propagator.unitary(s.t_mid());
    let to_final = propagator.unitary(s.t_final() - s.t_mid());
    // e^{iH(T−t)} P_c e^{−iH(T−t)}
    let c_back = &(&to_final.adjoint() * s.final_projector()) * &to_final;
    // e^{−iHt} P_a e^{iHt}
    let a_fwd = (to_mid.apply(s.initial())).projector();
    let weights = sandwich_weights(&c_back, s.intermediate(), &a_fwd);
    ConditionalDistribution::from_weights(s.intermediate().labels().to_vec(), weights)
}

/// Exact joint distribution Pr(b_i, c_k | a), intermediate outcomes as rows
/// and final outcomes as columns.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    intermediate_labels: Vec<f64>,
    final_labels: Vec<f64>,
    table: Vec<f64>,
    post_selected: usize,
}

impl JointDistribution {
    pub fn rows(&self) -> usize {
        self.intermediate_labels.len()
    }

    pub fn cols(&self) -> usize {
        self.final_labels.len()
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.table[i * self.cols() + k]
    }

    pub fn intermediate_labels(&self) -> &[f64] {
        &self.intermediate_labels
    }

    pub fn final_labels(&self) -> &[f64] {
        &self.final_labels
    }

    /// Column of the final family that equals the scenario's P_c.
    pub fn post_selected_column(&self) -> usize {
        self.post_selected
    }

    pub fn total(&self) -> f64 {
        self.table.iter().sum()
    }

    /// Σ_k Pr(b_i, c_k | a).
    pub fn intermediate_marginal(&self) -> Vec<f64> {
        (0..self.rows()).map(|i| (0..self.cols()).map(|k| self.get(i, k)).sum()).collect()
    }

    /// Pr(b_i | c_k, a).
    pub fn condition_on_final(&self, k: usize) -> Result<ConditionalDistribution> {
        if k >= self.cols() {
            return Err(Error::validation("final outcome", format!("{k} out of range")));
        }
        let weights = (0..self.rows()).map(|i| self.get(i, k)).collect();
        ConditionalDistribution::from_weights(self.intermediate_labels.clone(), weights)
    }

    /// Conditioned on the scenario's own post-selection.
    pub fn conditioned(&self) -> Result<ConditionalDistribution> {
        self.condition_on_final(self.post_selected)
    }
}

/// Runs the measurement sequence literally: evolve to t, measure the
/// intermediate family (Born weight + Lüders collapse per outcome), evolve
/// to T, measure `final_family`. `final_family` must contain the scenario's
/// P_c as one of its members.
pub fn oracle_joint_distribution(s: &PrePostScenario, final_family: &ProjectorFamily) -> Result<JointDistribution> {
    if final_family.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: final_family.dim() });
    }
    let post_selected = final_family
        .members()
        .iter()
        .position(|q| (q - s.final_projector()).max_abs() <= TOL.structural)
        .ok_or_else(|| Error::validation("final_family", "does not contain the scenario's final projector"))?;

    let propagator = Propagator::new(s.hamiltonian())?;
    let at_mid = propagator.evolve(s.t_mid(), s.initial());
    let rest = s.t_final() - s.t_mid();
    let cols = final_family.len();
    let mut table = Vec::with_capacity(s.intermediate().len() * cols);
    for p in s.intermediate().members() {
        let prob = born_unchecked(&at_mid, p)?;
        if prob <= TOL.collapse {
            table.extend(core::iter::repeat_n(0.0, cols));
            continue;
        }
        let collapsed = collapse_unchecked(&at_mid, p, prob, TOL.collapse)?;
        let at_final = propagator.evolve(rest, &collapsed);
        for q in final_family.members() {
            table.push(prob * born_unchecked(&at_final, q)?);
        }
    }
    Ok(JointDistribution {
        intermediate_labels: s.intermediate().labels().to_vec(),
        final_labels: final_family.labels().to_vec(),
        table,
        post_selected,
    })
}
