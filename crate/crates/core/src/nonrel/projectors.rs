//! Position, mass and final-boundary projectors on the lattice product space.
//! All of them are diagonal in the configuration basis, which is why they
//! commute pairwise.

use alloc::format;
use alloc::vec::Vec;

use super::{same_mass, FinalConfiguration, LatticeModel, Scope, Statistics};
use crate::error::{Error, Result};
use crate::hilbert::{LinearOperator, ProjectorFamily};

fn diagonal_where(model: &LatticeModel, mut weight: impl FnMut(&[usize]) -> f64) -> LinearOperator {
    let diag: Vec<f64> = (0..model.dim()).map(|k| weight(&model.configuration(k))).collect();
    LinearOperator::diagonal(&diag)
}

fn check_particle(model: &LatticeModel, i: usize) -> Result<()> {
    if i >= model.n_particles() {
        return Err(Error::validation("particle", format!("{i} is out of range for {} particles", model.n_particles())));
    }
    Ok(())
}

/// Labels sharing particle `i`'s exchange group (just `i` when distinguishable).
pub(crate) fn exchange_group(model: &LatticeModel, i: usize) -> Vec<usize> {
    let stats = model.particles()[i].statistics;
    if stats == Statistics::Distinguishable {
        return alloc::vec![i];
    }
    (0..model.n_particles()).filter(|&j| model.particles()[j].statistics == stats).collect()
}

/// Single-label projector without the indistinguishability guard.
pub(crate) fn label_projector(model: &LatticeModel, i: usize, x: usize) -> LinearOperator {
    diagonal_where(model, |c| if c[i] == x { 1.0 } else { 0.0 })
}

/// P_i^x: particle `i` sits at site `x`, other particles anywhere.
///
/// A single boson or fermion label carries no physical meaning once its
/// group has two or more members; such requests are rejected in favour of
/// [`species_position_projector`].
pub fn position_projector(model: &LatticeModel, i: usize, x: usize) -> Result<LinearOperator> {
    check_particle(model, i)?;
    model.check_site(x)?;
    if exchange_group(model, i).len() > 1 {
        return Err(Error::validation(
            "particle",
            format!("{i} is one of several identical particles; use the species projector"),
        ));
    }
    Ok(label_projector(model, i, x))
}

/// Σ_{j ~ i} P_j^x over the identical-particle group of `i`: the occupation
/// number of that species at `x`. Equals [`position_projector`] for a
/// distinguishable particle.
pub fn species_position_projector(model: &LatticeModel, i: usize, x: usize) -> Result<LinearOperator> {
    check_particle(model, i)?;
    model.check_site(x)?;
    let group = exchange_group(model, i);
    Ok(diagonal_where(model, |c| group.iter().filter(|&&j| c[j] == x).count() as f64))
}

fn check_mass(model: &LatticeModel, scope: Scope, mass: f64) -> Result<()> {
    if !model.mass_spectrum(scope).contains(mass) {
        return Err(Error::validation("mass", format!("{mass} is not a particle mass in scope {scope:?}")));
    }
    Ok(())
}

/// Exactly one in-scope particle occupies `x`, and it has mass `mass`.
/// Particles outside `scope` are unconstrained.
pub fn mass_projector_at(model: &LatticeModel, scope: Scope, mass: f64, x: usize) -> Result<LinearOperator> {
    model.check_site(x)?;
    check_mass(model, scope, mass)?;
    let labels = model.labels_in(scope);
    let particles = model.particles();
    Ok(diagonal_where(model, |c| {
        let mut here = labels.iter().filter(|&&j| c[j] == x);
        match (here.next(), here.next()) {
            (Some(&j), None) if same_mass(particles[j].mass, mass) => 1.0,
            _ => 0.0,
        }
    }))
}

/// Σ_x of [`mass_projector_at`]: a particle of mass `mass` sits alone
/// somewhere, counted once per such site.
pub fn mass_projector_anywhere(model: &LatticeModel, scope: Scope, mass: f64) -> Result<LinearOperator> {
    check_mass(model, scope, mass)?;
    let mut total = LinearOperator::zeros(model.dim());
    for x in 0..model.sites() {
        total = &total + &mass_projector_at(model, scope, mass, x)?;
    }
    Ok(total)
}

/// The intermediate mass measurement at `x`: one member per attainable mass
/// (ascending), then the complement — zero or several in-scope particles at
/// `x` — labelled 0.
pub fn mass_family_at(model: &LatticeModel, scope: Scope, x: usize) -> Result<ProjectorFamily> {
    model.check_site(x)?;
    let spectrum = model.mass_spectrum(scope);
    let mut members = Vec::with_capacity(spectrum.values().len() + 1);
    let mut labels = Vec::with_capacity(spectrum.values().len() + 1);
    let mut complement = LinearOperator::identity(model.dim());
    for &m in spectrum.values() {
        let p = mass_projector_at(model, scope, m, x)?;
        complement = &complement - &p;
        members.push(p);
        labels.push(m);
    }
    members.push(complement);
    labels.push(0.0);
    ProjectorFamily::new(members, labels)
}

/// Measurement of the total in-scope mass found at `x`, allowing several
/// particles to share the site. One member per distinct attainable total,
/// ascending, including the empty total 0.
pub fn combined_mass_family_at(model: &LatticeModel, scope: Scope, x: usize) -> Result<ProjectorFamily> {
    model.check_site(x)?;
    let labels_in = model.labels_in(scope);
    let particles = model.particles();
    let totals: Vec<f64> = (0..model.dim())
        .map(|k| {
            let c = model.configuration(k);
            labels_in.iter().filter(|&&j| c[j] == x).map(|&j| particles[j].mass).sum()
        })
        .collect();
    let mut distinct: Vec<f64> = Vec::new();
    for &m in &totals {
        if !distinct.iter().any(|&d| same_mass(d, m)) {
            distinct.push(m);
        }
    }
    distinct.sort_by(f64::total_cmp);
    let members = distinct
        .iter()
        .map(|&m| {
            let diag: Vec<f64> = totals.iter().map(|&t| if same_mass(t, m) { 1.0 } else { 0.0 }).collect();
            LinearOperator::diagonal(&diag)
        })
        .collect();
    ProjectorFamily::new(members, distinct)
}

/// The late-time boundary condition on the particles of `config.scope()`:
/// they occupy the assigned sites, with identical particles matched as a
/// multiset (the product of position projectors, symmetrized over each
/// exchange group). Particles outside the scope are unconstrained, so an
/// empty scope yields the identity.
pub fn final_boundary_projector(model: &LatticeModel, config: &FinalConfiguration) -> Result<LinearOperator> {
    config.check_against(model)?;
    let groups = config.groups(model);
    Ok(diagonal_where(model, |c| {
        let ok = groups.iter().all(|(labels, wanted)| {
            let mut have: Vec<usize> = labels.iter().map(|&j| c[j]).collect();
            have.sort_unstable();
            &have == wanted
        });
        if ok {
            1.0
        } else {
            0.0
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::super::{Class, ParticleSpec};
    use super::*;
    use crate::hilbert::StateVector;
    use alloc::vec;

    fn model(sites: usize, particles: Vec<ParticleSpec>) -> LatticeModel {
        let dim = sites.pow(particles.len() as u32);
        let initial = StateVector::basis(dim, 0).unwrap();
        LatticeModel::new(sites, 1.0, particles, LinearOperator::zeros(dim), initial, 1.0).unwrap()
    }

    #[test]
    fn single_particle_reductions() {
        let m = model(2, vec![ParticleSpec::distinguishable(1.5, Class::B)]);
        let p = position_projector(&m, 0, 0).unwrap();
        assert_eq!(p, LinearOperator::diagonal(&[1.0, 0.0]));
        assert_eq!(mass_projector_at(&m, Scope::All, 1.5, 0).unwrap(), p);
    }

    #[test]
    fn out_of_range_rejected() {
        let m = model(2, vec![ParticleSpec::distinguishable(1.0, Class::B)]);
        assert!(position_projector(&m, 1, 0).is_err());
        assert!(position_projector(&m, 0, 2).is_err());
        assert!(mass_projector_at(&m, Scope::All, 2.0, 0).is_err());
    }

    #[test]
    fn identical_labels_are_guarded() {
        let m = model(2, vec![ParticleSpec::boson(1.0), ParticleSpec::boson(1.0)]);
        assert!(position_projector(&m, 0, 0).is_err());
        // Occupation number at site 0: |00⟩ → 2, |01⟩,|10⟩ → 1, |11⟩ → 0.
        let n = species_position_projector(&m, 0, 0).unwrap();
        assert_eq!(n, LinearOperator::diagonal(&[2.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn empty_scope_boundary_is_identity() {
        let m = model(3, vec![ParticleSpec::distinguishable(1.0, Class::B)]);
        let fc = FinalConfiguration::new(&m, Scope::Class(Class::F), vec![]).unwrap();
        assert_eq!(final_boundary_projector(&m, &fc).unwrap(), LinearOperator::identity(3));
    }

    #[test]
    fn mass_family_is_complete() {
        let m = model(3, vec![ParticleSpec::boson(1.0), ParticleSpec::boson(1.0), ParticleSpec::fermion(2.0)]);
        for scope in [Scope::All, Scope::Class(Class::B), Scope::Class(Class::F)] {
            for x in 0..3 {
                mass_family_at(&m, scope, x).unwrap();
                combined_mass_family_at(&m, scope, x).unwrap();
            }
        }
    }
}
