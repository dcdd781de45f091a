//! The flat-field result for whole-system post-selection.
//!
//! When the late-time boundary condition carries no information about which
//! particle went where — every intermediate outcome j leaves the same
//! Pr(c | b_j) — the ABL distribution of the mass found at x is
//! Σ_{j : m_j = M} 1/N at every point of spacetime, whatever ψ₀ looked like.
//!
//! The engineered scenario here has non-interacting particles sharing one
//! orbital φ, a single-particle Hamiltonian h, and a boundary condition that
//! every particle ends up inside a fixed region R. All operators involved
//! are then tensor products, so each ABL weight factorizes exactly:
//!
//! Tr(C P_j A P_j) = ⟨a|p c p|a⟩ · Π_{l≠j} ⟨a_l|q c q|a_l⟩
//!
//! with p = |x⟩⟨x|, q = 1 − p, a_l = e^{−iht}φ_l and c = e^{iht'} Q_R
//! e^{−iht'} (t' = T − t). That keeps a 20-site lattice cheap; the dense
//! [`CatastropheScenario::dense_scenario`] is available for cross-checks on
//! small lattices.

use alloc::vec::Vec;

use super::{decode, lattice_dim};
use crate::abl::{abl_evolved, ConditionalDistribution, PrePostScenario};
use crate::error::{Error, Result};
use crate::field::GridSpec;
use crate::hilbert::{LinearOperator, ProjectorFamily, Propagator, StateVector};
use crate::nonrel::same_mass;
use crate::{par, C64};

#[derive(Clone, Debug)]
pub struct CatastropheScenario {
    hamiltonian: LinearOperator,
    propagator: Propagator,
    orbitals: Vec<StateVector>,
    masses: Vec<f64>,
    region: Vec<usize>,
    t_final: f64,
}

impl CatastropheScenario {
    /// `hamiltonian` acts on one particle (dimension = number of sites);
    /// `orbitals[j]` is particle j's initial wavefunction; `region` lists
    /// the sites every particle must occupy at `t_final`.
    pub fn new(
        hamiltonian: LinearOperator,
        orbitals: Vec<StateVector>,
        masses: Vec<f64>,
        region: Vec<usize>,
        t_final: f64,
    ) -> Result<Self> {
        let sites = hamiltonian.dim();
        if masses.is_empty() || masses.len() != orbitals.len() {
            return Err(Error::validation("catastrophe.masses", "one mass per orbital, at least one particle"));
        }
        if masses.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::validation("catastrophe.masses", "must be positive"));
        }
        for o in &orbitals {
            if o.dim() != sites {
                return Err(Error::DimensionMismatch { expected: sites, found: o.dim() });
            }
        }
        let orbitals = orbitals.iter().map(StateVector::normalized).collect::<Result<Vec<_>>>()?;
        if region.is_empty() || region.iter().any(|&x| x >= sites) {
            return Err(Error::validation("catastrophe.region", "nonempty list of in-range sites"));
        }
        if !(t_final.is_finite() && t_final >= 0.0) {
            return Err(Error::validation("catastrophe.t_final", "must be a nonnegative time"));
        }
        let propagator = Propagator::new(&hamiltonian)?;
        Ok(Self { hamiltonian, propagator, orbitals, masses, region, t_final })
    }

    /// All particles share `orbital`.
    pub fn shared_orbital(
        hamiltonian: LinearOperator,
        orbital: StateVector,
        masses: Vec<f64>,
        region: Vec<usize>,
        t_final: f64,
    ) -> Result<Self> {
        let orbitals = alloc::vec![orbital; masses.len()];
        Self::new(hamiltonian, orbitals, masses, region, t_final)
    }

    pub fn sites(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn n_particles(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// Whether the boundary condition is blind to particle identity, which
    /// here means all orbitals agree up to a global phase.
    pub fn is_uncorrelated(&self, tol: f64) -> bool {
        self.orbitals.windows(2).all(|w| w[0].phase_invariant_distance(&w[1]) <= tol)
    }

    /// Σ_{j : m_j = M} 1/N for each distinct mass M, in first-appearance order.
    pub fn predicted(&self) -> Result<ConditionalDistribution> {
        let n = self.masses.len() as f64;
        ConditionalDistribution::new(self.masses.clone(), alloc::vec![1.0 / n; self.masses.len()]).map(|d| d.by_label())
    }

    fn region_projector(&self) -> LinearOperator {
        let diag: Vec<f64> = (0..self.sites()).map(|x| if self.region.contains(&x) { 1.0 } else { 0.0 }).collect();
        LinearOperator::diagonal(&diag)
    }

    fn check_point(&self, x: usize, t: f64) -> Result<()> {
        if x >= self.sites() {
            return Err(Error::validation("site", alloc::format!("{x} out of range")));
        }
        if !(t.is_finite() && (0.0..=self.t_final).contains(&t)) {
            return Err(Error::validation("t", alloc::format!("{t} outside [0, {}]", self.t_final)));
        }
        Ok(())
    }

    /// ABL distribution over the mass found alone at `x` at time `t`,
    /// conditioned on some particle being found there.
    pub fn distribution_at(&self, x: usize, t: f64) -> Result<ConditionalDistribution> {
        self.check_point(x, t)?;
        let to_mid = self.propagator.unitary(t);
        let to_final = self.propagator.unitary(self.t_final - t);
        let c = &(&to_final.adjoint() * &self.region_projector()) * &to_final;
        let evolved: Vec<StateVector> = self.orbitals.iter().map(|o| to_mid.apply(o)).collect();
        // ⟨v|c|v⟩ with v = a restricted to x (hit) or with x removed (miss).
        let sandwich = |a: &StateVector, hit: bool| -> f64 {
            let keep = |y: usize| (y == x) == hit;
            let amps = a.amplitudes();
            let mut acc = C64::new(0.0, 0.0);
            for y in (0..amps.len()).filter(|&y| keep(y)) {
                for z in (0..amps.len()).filter(|&z| keep(z)) {
                    acc += amps[y].conj() * c.entry(y, z) * amps[z];
                }
            }
            acc.re.max(0.0)
        };
        let hits: Vec<f64> = evolved.iter().map(|a| sandwich(a, true)).collect();
        let misses: Vec<f64> = evolved.iter().map(|a| sandwich(a, false)).collect();
        let weights = (0..self.n_particles())
            .map(|j| (0..self.n_particles()).map(|l| if l == j { hits[l] } else { misses[l] }).product())
            .collect();
        Ok(ConditionalDistribution::from_weights(self.masses.clone(), weights)?.by_label())
    }

    /// The same scenario on the full L^N product space: intermediate family
    /// "particle j alone at x" (label m_j) plus a complement labelled 0.
    pub fn dense_scenario(&self, x: usize, t: f64) -> Result<PrePostScenario> {
        self.check_point(x, t)?;
        let (sites, n) = (self.sites(), self.n_particles());
        let dim = lattice_dim(sites, n)?;
        let configs: Vec<Vec<usize>> = (0..dim).map(|k| decode(k, sites, n)).collect();
        let hamiltonian = LinearOperator::from_fn(dim, |r, col| {
            let (cr, cc) = (&configs[r], &configs[col]);
            let mut differing = (0..n).filter(|&i| cr[i] != cc[i]);
            match (differing.next(), differing.next()) {
                (None, _) => (0..n).map(|i| self.hamiltonian.entry(cr[i], cc[i])).sum(),
                (Some(i), None) => self.hamiltonian.entry(cr[i], cc[i]),
                _ => C64::new(0.0, 0.0),
            }
        });
        let initial = StateVector::new(
            configs
                .iter()
                .map(|c| c.iter().zip(&self.orbitals).fold(C64::new(1.0, 0.0), |acc, (&y, o)| acc * o.amplitudes()[y]))
                .collect(),
        )?;
        let mut members = Vec::with_capacity(n + 1);
        let mut complement = LinearOperator::identity(dim);
        for j in 0..n {
            let diag: Vec<f64> = configs
                .iter()
                .map(|c| if c[j] == x && (0..n).all(|l| l == j || c[l] != x) { 1.0 } else { 0.0 })
                .collect();
            let p = LinearOperator::diagonal(&diag);
            complement = &complement - &p;
            members.push(p);
        }
        members.push(complement);
        let mut labels = self.masses.clone();
        labels.push(0.0);
        let family = ProjectorFamily::new(members, labels)?;
        let final_diag: Vec<f64> =
            configs.iter().map(|c| if c.iter().all(|y| self.region.contains(y)) { 1.0 } else { 0.0 }).collect();
        PrePostScenario::new(initial, family, LinearOperator::diagonal(&final_diag), hamiltonian, t, self.t_final)
    }

    /// [`Self::distribution_at`] computed with the generic dense ABL rule.
    pub fn dense_distribution_at(&self, x: usize, t: f64) -> Result<ConditionalDistribution> {
        let d = abl_evolved(&self.dense_scenario(x, t)?)?;
        let n = self.n_particles();
        ConditionalDistribution::from_weights(self.masses.clone(), d.probabilities()[..n].to_vec()).map(|d| d.by_label())
    }
}

/// Per-point mass distributions over all sites × `nt` times.
#[derive(Clone, Debug)]
pub struct CatastropheResult {
    grid: GridSpec,
    distributions: Vec<ConditionalDistribution>,
    predicted: ConditionalDistribution,
}

impl CatastropheResult {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// t-major, like [`crate::field::BeableField`].
    pub fn distributions(&self) -> &[ConditionalDistribution] {
        &self.distributions
    }

    pub fn predicted(&self) -> &ConditionalDistribution {
        &self.predicted
    }

    /// Largest |Pr(M) − count(M)/N| over the grid and the mass spectrum.
    pub fn max_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for d in &self.distributions {
            for (&m, &p) in self.predicted.labels().iter().zip(self.predicted.probabilities()) {
                let got: f64 =
                    d.labels().iter().zip(d.probabilities()).filter(|(&l, _)| same_mass(l, m)).map(|(_, &q)| q).sum();
                worst = worst.max((got - p).abs());
            }
        }
        worst
    }
}

/// Evaluates the engineered scenario on every site and at the `nt` times
/// t_j = j·T/nt. The grid stops one step short of T: at T itself the
/// boundary condition is the measurement, and finding a particle outside R
/// there is impossible. Site spacing is taken as 1.
pub fn catastrophe_demo(scenario: &CatastropheScenario, nt: usize) -> Result<CatastropheResult> {
    if !scenario.is_uncorrelated(1e-10) {
        return Err(Error::validation("catastrophe.orbitals", "particles must share one orbital"));
    }
    if nt == 0 {
        return Err(Error::validation("catastrophe.nt", "need at least one time"));
    }
    let sites = scenario.sites();
    let t_last = scenario.t_final() * (nt - 1) as f64 / nt as f64;
    let grid = GridSpec::new(0.0, (sites - 1) as f64, sites, 0.0, t_last, nt)?;
    let distributions = par::map_indices(grid.len(), |k| scenario.distribution_at(k % sites, grid.t(k / sites)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(CatastropheResult { grid, distributions, predicted: scenario.predicted()? })
}
