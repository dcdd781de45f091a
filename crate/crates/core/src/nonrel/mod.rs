//! N particles on a one-dimensional lattice: mass-density beables from the
//! ABL rule, for the whole-system model and for the interacting-classes
//! (bosons B / fermions F) model with cross-class post-selection.
//!
//! The continuum formulas transcribe directly: position eigenstates become
//! lattice sites, δ-functions become Kronecker deltas and integrals become
//! site sums. The product basis |x_0, …, x_{N−1}⟩ is ordered with particle 0
//! as the most significant digit, matching [`crate::hilbert::tensor_product`].
//!
//! Particle indices are zero-based.

mod builders;
mod catastrophe;
mod density;
mod projectors;

use alloc::format;
use alloc::vec::Vec;

pub use builders::{hopping_contact_hamiltonian, product_state, symmetrize, symmetrize_all_labels, Boundary, HamiltonianSpec};
pub use catastrophe::{catastrophe_demo, CatastropheResult, CatastropheScenario};
pub use density::{
    abl_mass_distribution, abl_mass_field, born_mass_field, class_mass_density, final_configuration_distribution,
    mass_distribution, sample_final_configuration, scope_is_labelled, FinalConfiguration, MassDistribution,
};
pub use projectors::{
    combined_mass_family_at, final_boundary_projector, mass_family_at, mass_projector_anywhere, mass_projector_at,
    position_projector, species_position_projector,
};

use crate::error::{Error, Result};
use crate::fmath;
use crate::hilbert::{LinearOperator, Propagator, StateVector};
use crate::tolerance::Tolerances;

const TOL: Tolerances = Tolerances::DEFAULT;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statistics {
    Distinguishable,
    Boson,
    Fermion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    B,
    F,
}

impl Class {
    pub fn other(self) -> Class {
        match self {
            Class::B => Class::F,
            Class::F => Class::B,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParticleSpec {
    pub mass: f64,
    pub statistics: Statistics,
    pub class: Class,
}

impl ParticleSpec {
    pub fn new(mass: f64, statistics: Statistics, class: Class) -> Self {
        Self { mass, statistics, class }
    }

    pub fn distinguishable(mass: f64, class: Class) -> Self {
        Self::new(mass, Statistics::Distinguishable, class)
    }

    pub fn boson(mass: f64) -> Self {
        Self::new(mass, Statistics::Boson, Class::B)
    }

    pub fn fermion(mass: f64) -> Self {
        Self::new(mass, Statistics::Fermion, Class::F)
    }
}

/// Which particles an observable or a post-selection refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    All,
    Class(Class),
}

impl Scope {
    pub fn contains(self, p: &ParticleSpec) -> bool {
        match self {
            Scope::All => true,
            Scope::Class(c) => p.class == c,
        }
    }
}

/// Distinct single-particle masses attainable in one site measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct MassSpectrum {
    values: Vec<f64>,
}

impl MassSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn contains(&self, mass: f64) -> bool {
        self.values.iter().any(|&m| same_mass(m, mass))
    }
}

pub(crate) fn same_mass(a: f64, b: f64) -> bool {
    fmath::abs(a - b) <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Checks particle-list invariants shared by the model and the builders.
pub(crate) fn validate_particles(particles: &[ParticleSpec]) -> Result<()> {
    if particles.is_empty() {
        return Err(Error::validation("particles", "need at least one particle"));
    }
    let mut boson_mass = None;
    let mut fermion_mass = None;
    for (i, p) in particles.iter().enumerate() {
        if !(p.mass.is_finite() && p.mass > 0.0) {
            return Err(Error::validation(format!("particles[{i}].mass"), "must be positive"));
        }
        let shared = match p.statistics {
            Statistics::Boson => Some((&mut boson_mass, Class::B, "bosons")),
            Statistics::Fermion => Some((&mut fermion_mass, Class::F, "fermions")),
            Statistics::Distinguishable => None,
        };
        if let Some((slot, class, name)) = shared {
            if p.class != class {
                return Err(Error::validation(format!("particles[{i}].class"), format!("{name} belong to class {class:?}")));
            }
            match *slot {
                None => *slot = Some(p.mass),
                Some(m) if !same_mass(m, p.mass) => {
                    return Err(Error::validation(format!("particles[{i}].mass"), format!("all {name} share one mass")));
                }
                Some(_) => {}
            }
        }
    }
    Ok(())
}

pub(crate) fn lattice_dim(sites: usize, n: usize) -> Result<usize> {
    let mut dim: u128 = 1;
    for _ in 0..n {
        dim *= sites as u128;
        if dim > TOL.max_dim as u128 {
            return Err(Error::Capacity { requested: dim, cap: TOL.max_dim });
        }
    }
    Ok(dim as usize)
}

/// Site of each particle in basis configuration `index`.
pub(crate) fn decode(index: usize, sites: usize, n: usize) -> Vec<usize> {
    let mut out = alloc::vec![0; n];
    let mut rest = index;
    for slot in out.iter_mut().rev() {
        *slot = rest % sites;
        rest /= sites;
    }
    out
}

pub(crate) fn encode(config: &[usize], sites: usize) -> usize {
    config.iter().fold(0, |acc, &x| acc * sites + x)
}

/// Basis permutation exchanging the positions of particles `i` and `j`.
pub(crate) fn swap_operator(sites: usize, n: usize, i: usize, j: usize) -> LinearOperator {
    let dim = sites.pow(n as u32);
    let target: Vec<usize> = (0..dim)
        .map(|k| {
            let mut c = decode(k, sites, n);
            c.swap(i, j);
            encode(&c, sites)
        })
        .collect();
    LinearOperator::from_fn(dim, |r, c| {
        if target[c] == r {
            crate::C64::new(1.0, 0.0)
        } else {
            crate::C64::new(0.0, 0.0)
        }
    })
}

/// Label pairs that exchange statistics constrains, with the required sign.
pub(crate) fn identical_pairs(particles: &[ParticleSpec]) -> Vec<(usize, usize, f64)> {
    let mut pairs = Vec::new();
    for i in 0..particles.len() {
        for j in (i + 1)..particles.len() {
            let (a, b) = (particles[i].statistics, particles[j].statistics);
            if a == b && a != Statistics::Distinguishable {
                pairs.push((i, j, if a == Statistics::Fermion { -1.0 } else { 1.0 }));
            }
        }
    }
    pairs
}

/// Max-norm violation of the exchange symmetry required by `particles`.
pub fn exchange_residual(sites: usize, particles: &[ParticleSpec], psi: &StateVector) -> f64 {
    let n = particles.len();
    let amps = psi.amplitudes();
    let mut worst = 0.0f64;
    for (i, j, sign) in identical_pairs(particles) {
        for (k, a) in amps.iter().enumerate() {
            let mut c = decode(k, sites, n);
            c.swap(i, j);
            let swapped = amps[encode(&c, sites)];
            worst = worst.max((swapped - a * sign).norm());
        }
    }
    worst
}

/// A lattice model: sites, particles, Hamiltonian, initial state and the
/// late time T at which the final boundary condition is taken.
#[derive(Clone, Debug)]
pub struct LatticeModel {
    sites: usize,
    spacing: f64,
    particles: Vec<ParticleSpec>,
    hamiltonian: LinearOperator,
    initial: StateVector,
    t_final: f64,
    propagator: Propagator,
}

impl LatticeModel {
    pub fn new(
        sites: usize,
        spacing: f64,
        particles: Vec<ParticleSpec>,
        hamiltonian: LinearOperator,
        initial: StateVector,
        t_final: f64,
    ) -> Result<Self> {
        if sites == 0 {
            return Err(Error::validation("lattice.sites", "must be at least 1"));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::validation("lattice.spacing", "must be positive"));
        }
        if !(t_final.is_finite() && t_final >= 0.0) {
            return Err(Error::validation("lattice.t_final", "must be a nonnegative time"));
        }
        validate_particles(&particles)?;
        let dim = lattice_dim(sites, particles.len())?;
        for found in [hamiltonian.dim(), initial.dim()] {
            if found != dim {
                return Err(Error::DimensionMismatch { expected: dim, found });
            }
        }
        if !initial.is_normalized(TOL.scalar) {
            return Err(Error::validation("lattice.initial", "must be normalized"));
        }
        let r = exchange_residual(sites, &particles, &initial);
        if r > TOL.structural {
            return Err(Error::validation("lattice.initial", format!("violates exchange statistics (residual {r:e})")));
        }
        let propagator = Propagator::new(&hamiltonian)?;
        Ok(Self { sites, spacing, particles, hamiltonian, initial, t_final, propagator })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn particles(&self) -> &[ParticleSpec] {
        &self.particles
    }

    pub fn n_particles(&self) -> usize {
        self.particles.len()
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }

    pub fn hamiltonian(&self) -> &LinearOperator {
        &self.hamiltonian
    }

    pub fn initial(&self) -> &StateVector {
        &self.initial
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    /// e^{−iHt}|ψ₀⟩.
    pub fn state_at(&self, t: f64) -> StateVector {
        self.propagator.evolve(t, &self.initial)
    }

    /// Labels of the particles in `scope`, ascending.
    pub fn labels_in(&self, scope: Scope) -> Vec<usize> {
        (0..self.particles.len()).filter(|&i| scope.contains(&self.particles[i])).collect()
    }

    pub fn mass_spectrum(&self, scope: Scope) -> MassSpectrum {
        let mut values: Vec<f64> = Vec::new();
        for i in self.labels_in(scope) {
            let m = self.particles[i].mass;
            if !values.iter().any(|&v| same_mass(v, m)) {
                values.push(m);
            }
        }
        values.sort_by(f64::total_cmp);
        MassSpectrum { values }
    }

    /// Total mass of the particles in `scope`.
    pub fn scope_mass(&self, scope: Scope) -> f64 {
        self.labels_in(scope).iter().map(|&i| self.particles[i].mass).sum()
    }

    /// Site of each particle in basis configuration `index`.
    pub fn configuration(&self, index: usize) -> Vec<usize> {
        decode(index, self.sites, self.particles.len())
    }

    pub fn configuration_index(&self, sites: &[usize]) -> Result<usize> {
        if sites.len() != self.particles.len() || sites.iter().any(|&x| x >= self.sites) {
            return Err(Error::validation("configuration", "one in-range site per particle required"));
        }
        Ok(encode(sites, self.sites))
    }

    /// Permutation operator exchanging particles `i` and `j`.
    pub fn swap_operator(&self, i: usize, j: usize) -> LinearOperator {
        swap_operator(self.sites, self.particles.len(), i, j)
    }

    /// Physical coordinate of site `x`.
    pub fn coordinate(&self, x: usize) -> f64 {
        x as f64 * self.spacing
    }

    pub(crate) fn check_site(&self, x: usize) -> Result<()> {
        if x >= self.sites {
            return Err(Error::validation("site", format!("{x} is out of range for {} sites", self.sites)));
        }
        Ok(())
    }
}
