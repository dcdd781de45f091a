//! Default Hamiltonian and initial-state constructors for lattice models.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{decode, encode, lattice_dim, validate_particles, Class, ParticleSpec, Statistics};
use crate::error::{Error, Result};
use crate::hilbert::{LinearOperator, StateVector};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

/// Nearest-neighbour hopping plus an on-site boson–fermion contact term:
///
/// H = −Σ_i J_i Σ_⟨x,y⟩ (|x⟩⟨y| + |y⟩⟨x|)_i + U Σ_{b∈B, f∈F} δ(x_b, x_f)
///
/// with J_i = `hopping`, or `hopping / m_i` when `mass_scaled` is set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianSpec {
    pub hopping: f64,
    pub contact: f64,
    pub boundary: Boundary,
    pub mass_scaled: bool,
}

impl HamiltonianSpec {
    pub fn hopping(hopping: f64) -> Self {
        Self { hopping, contact: 0.0, boundary: Boundary::Open, mass_scaled: false }
    }

    pub fn with_contact(mut self, contact: f64) -> Self {
        self.contact = contact;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn mass_scaled(mut self, on: bool) -> Self {
        self.mass_scaled = on;
        self
    }
}

fn bonds(sites: usize, boundary: Boundary) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = (0..sites.saturating_sub(1)).map(|x| (x, x + 1)).collect();
    // A two-site ring would repeat its only bond.
    if boundary == Boundary::Periodic && sites > 2 {
        out.push((sites - 1, 0));
    }
    out
}

pub fn hopping_contact_hamiltonian(sites: usize, particles: &[ParticleSpec], spec: &HamiltonianSpec) -> Result<LinearOperator> {
    if sites == 0 {
        return Err(Error::validation("lattice.sites", "must be at least 1"));
    }
    if !spec.hopping.is_finite() || !spec.contact.is_finite() {
        return Err(Error::validation("hamiltonian", "hopping and contact must be finite"));
    }
    validate_particles(particles)?;
    let n = particles.len();
    let dim = lattice_dim(sites, n)?;
    let bonds = bonds(sites, spec.boundary);
    let amplitude: Vec<f64> =
        particles.iter().map(|p| if spec.mass_scaled { spec.hopping / p.mass } else { spec.hopping }).collect();
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for k in 0..dim {
        let c = decode(k, sites, n);
        let mut contact = 0usize;
        for b in (0..n).filter(|&i| particles[i].class == Class::B) {
            contact += (0..n).filter(|&f| particles[f].class == Class::F && c[f] == c[b]).count();
        }
        h[(k, k)] += C64::new(spec.contact * contact as f64, 0.0);
        for i in 0..n {
            for &(x, y) in &bonds {
                if c[i] == x {
                    let mut moved = c.clone();
                    moved[i] = y;
                    let k2 = encode(&moved, sites);
                    h[(k2, k)] -= C64::new(amplitude[i], 0.0);
                    h[(k, k2)] -= C64::new(amplitude[i], 0.0);
                }
            }
        }
    }
    LinearOperator::from_matrix(h)
}

/// ⊗_i φ_i for per-particle orbitals of length `sites`, each normalized first.
pub fn product_state(sites: usize, orbitals: &[Vec<C64>]) -> Result<StateVector> {
    if orbitals.is_empty() {
        return Err(Error::validation("orbitals", "need at least one orbital"));
    }
    let n = orbitals.len();
    let dim = lattice_dim(sites, n)?;
    let mut normalized = Vec::with_capacity(n);
    for (i, phi) in orbitals.iter().enumerate() {
        if phi.len() != sites {
            return Err(Error::validation(alloc::format!("orbitals[{i}]"), "needs one amplitude per site"));
        }
        let v = StateVector::new(phi.clone())?
            .normalized()
            .map_err(|_| Error::validation(alloc::format!("orbitals[{i}]"), "must be nonzero"))?;
        normalized.push(v);
    }
    let amps = (0..dim)
        .map(|k| {
            decode(k, sites, n)
                .iter()
                .zip(&normalized)
                .fold(C64::new(1.0, 0.0), |acc, (&x, phi)| acc * phi.amplitudes()[x])
        })
        .collect();
    StateVector::new(amps)
}

fn permutations(items: &[usize]) -> Vec<(Vec<usize>, f64)> {
    if items.len() <= 1 {
        return alloc::vec![(items.to_vec(), 1.0)];
    }
    let mut out = Vec::new();
    for (pos, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(pos);
        let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
        for (mut tail, s) in permutations(&rest) {
            tail.insert(0, first);
            out.push((tail, sign * s));
        }
    }
    out
}

/// Averages `amps` over permutations of `group`'s positions, with signs when
/// `antisymmetric`.
fn project_group(amps: &[C64], sites: usize, n: usize, group: &[usize], antisymmetric: bool) -> Vec<C64> {
    let perms = permutations(group);
    let weight = 1.0 / perms.len() as f64;
    (0..amps.len())
        .map(|k| {
            let c = decode(k, sites, n);
            let mut acc = C64::new(0.0, 0.0);
            for (perm, sign) in &perms {
                let mut moved = c.clone();
                for (&from, &to) in group.iter().zip(perm) {
                    moved[to] = c[from];
                }
                let s = if antisymmetric { *sign } else { 1.0 };
                acc += amps[encode(&moved, sites)] * s;
            }
            acc * weight
        })
        .collect()
}

/// Projects `psi` onto the states obeying the particles' exchange statistics
/// and renormalizes. Fails when nothing survives (e.g. two fermions in one
/// orbital).
pub fn symmetrize(sites: usize, particles: &[ParticleSpec], psi: &StateVector) -> Result<StateVector> {
    let n = particles.len();
    let dim = lattice_dim(sites, n)?;
    if psi.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: psi.dim() });
    }
    let mut amps = psi.amplitudes().to_vec();
    for stats in [Statistics::Boson, Statistics::Fermion] {
        let group: Vec<usize> = (0..n).filter(|&i| particles[i].statistics == stats).collect();
        if group.len() > 1 {
            amps = project_group(&amps, sites, n, &group, stats == Statistics::Fermion);
        }
    }
    StateVector::new(amps)?
        .normalized()
        .map_err(|_| Error::validation("initial", "vanishes under exchange (anti)symmetrization"))
}

/// Symmetrizes over every label permutation, regardless of statistics.
pub fn symmetrize_all_labels(sites: usize, n: usize, psi: &StateVector) -> Result<StateVector> {
    let dim = lattice_dim(sites, n)?;
    if psi.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: psi.dim() });
    }
    let all: Vec<usize> = (0..n).collect();
    StateVector::new(project_group(psi.amplitudes(), sites, n, &all, false))?.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn permutation_signs() {
        let p = permutations(&[0, 1, 2]);
        assert_eq!(p.len(), 6);
        assert_eq!(p.iter().map(|(_, s)| s).sum::<f64>(), 0.0);
        let swap = p.iter().find(|(v, _)| v == &vec![1, 0, 2]).unwrap();
        assert_eq!(swap.1, -1.0);
    }

    #[test]
    fn two_site_ring_has_single_bond() {
        assert_eq!(bonds(2, Boundary::Periodic), vec![(0, 1)]);
        assert_eq!(bonds(3, Boundary::Periodic).len(), 3);
        assert_eq!(bonds(1, Boundary::Open), vec![]);
    }

    #[test]
    fn single_particle_hopping_matrix() {
        let h = hopping_contact_hamiltonian(3, &[ParticleSpec::distinguishable(2.0, Class::B)], &HamiltonianSpec::hopping(1.0).mass_scaled(true))
            .unwrap();
        assert_eq!(h.entry(0, 1), C64::new(-0.5, 0.0));
        assert_eq!(h.entry(0, 2), C64::new(0.0, 0.0));
        assert_eq!(h.entry(1, 1), C64::new(0.0, 0.0));
    }

    #[test]
    fn contact_energy_on_diagonal() {
        let particles = [ParticleSpec::boson(1.0), ParticleSpec::fermion(1.0)];
        let h = hopping_contact_hamiltonian(2, &particles, &HamiltonianSpec::hopping(0.0).with_contact(3.0)).unwrap();
        assert_eq!(h, LinearOperator::diagonal(&[3.0, 0.0, 0.0, 3.0]));
    }

    #[test]
    fn pauli_exclusion() {
        let particles = [ParticleSpec::fermion(1.0), ParticleSpec::fermion(1.0)];
        let phi = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let psi = product_state(2, &[phi.clone(), phi]).unwrap();
        assert!(symmetrize(2, &particles, &psi).is_err());
    }

    #[test]
    fn antisymmetrized_pair() {
        let particles = [ParticleSpec::fermion(1.0), ParticleSpec::fermion(1.0)];
        let psi = StateVector::basis(4, 1).unwrap(); // |0,1⟩
        let s = symmetrize(2, &particles, &psi).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[1] - C64::new(h, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[2] + C64::new(h, 0.0)).norm() < 1e-15);
    }
}
