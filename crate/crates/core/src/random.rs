//! Random operators and scenarios for property tests and oracle sweeps.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;

use crate::abl::PrePostScenario;
use crate::error::Result;
use crate::hilbert::{LinearOperator, ProjectorFamily, StateVector};
use crate::C64;

fn entry<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// (M + M†)/2 with entries of M uniform in the unit square times `scale`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> LinearOperator {
    let m = DMatrix::from_fn(dim, dim, |_, _| entry(rng) * scale);
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    LinearOperator::from_matrix(h).expect("square")
}

/// Q factor of a random complex matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> LinearOperator {
    let m = DMatrix::from_fn(dim, dim, |_, _| entry(rng));
    LinearOperator::from_matrix(m.qr().q()).expect("square")
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    loop {
        let v = StateVector::new((0..dim).map(|_| entry(rng)).collect()).expect("dim > 0");
        if v.norm() > 1e-3 {
            return v.normalized().expect("nonzero");
        }
    }
}

/// Columns of `u` as states.
fn columns(u: &LinearOperator) -> Vec<StateVector> {
    u.matrix()
        .column_iter()
        .map(|c| StateVector::new(c.iter().copied().collect()).expect("dim > 0"))
        .collect()
}

/// Random orthonormal basis split into `outcomes` nonempty groups; each group
/// sums to one projector. Labels are 0, 1, ….
pub fn random_family<R: Rng + ?Sized>(rng: &mut R, dim: usize, outcomes: usize) -> ProjectorFamily {
    let outcomes = outcomes.clamp(1, dim);
    let basis = columns(&random_unitary(rng, dim));
    // First `outcomes` vectors seed the groups; the rest land anywhere.
    let mut group_of: Vec<usize> = (0..outcomes).collect();
    group_of.extend((outcomes..dim).map(|_| rng.gen_range(0..outcomes)));
    let mut members = alloc::vec![LinearOperator::zeros(dim); outcomes];
    for (v, &g) in basis.iter().zip(&group_of) {
        members[g] = &members[g] + &v.projector();
    }
    ProjectorFamily::new(members, (0..outcomes).map(|i| i as f64).collect()).expect("complete family")
}

/// A random scenario of dimension 2..=`max_dim` together with a complete
/// final family containing its post-selection projector. Post-selections are
/// rank 1 about half the time and degenerate otherwise.
pub fn random_scenario<R: Rng + ?Sized>(rng: &mut R, max_dim: usize) -> Result<(PrePostScenario, ProjectorFamily)> {
    let dim = rng.gen_range(2..=max_dim.max(2));
    let outcomes = rng.gen_range(2..=dim);
    let intermediate = random_family(rng, dim, outcomes);
    let final_outcomes = if rng.gen_bool(0.5) { dim } else { rng.gen_range(2..=dim) };
    let final_family = random_family(rng, dim, final_outcomes);
    let post = rng.gen_range(0..final_family.len());
    let scale = rng.gen_range(0.1..3.0);
    let hamiltonian = random_hermitian(rng, dim, scale);
    let t_final = rng.gen_range(0.0..5.0);
    let t_mid = rng.gen_range(0.0..=t_final);
    let scenario = PrePostScenario::new(
        random_state(rng, dim),
        intermediate,
        final_family.members()[post].clone(),
        hamiltonian,
        t_mid,
        t_final,
    )?;
    Ok((scenario, final_family))
}
