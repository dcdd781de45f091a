//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls the library's evolution or ABL code; every helper works
//! directly on nalgebra matrices so a bug in the crate cannot hide behind the
//! same bug in its oracle.

#![allow(dead_code)]

use beables_core::hilbert::{LinearOperator, StateVector};
use beables_core::C64;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// e^{−iHt} by scaling and squaring a truncated Taylor series.
pub fn taylor_expm(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let n = h.nrows();
    let a = h * c(0.0, -t);
    let norm = a.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = a * c(scale, 0.0);
    let mut term = DMatrix::<C64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=24 {
        term = &term * &a * c(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn taylor_evolve(h: &LinearOperator, t: f64, psi: &StateVector) -> DVector<C64> {
    taylor_expm(h.matrix(), t) * psi.as_dvector()
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff_vec(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Kronecker product of single-particle diagonal operators, particle 0 the
/// most significant factor.
pub fn kron_diagonal(factors: &[Vec<f64>]) -> Vec<f64> {
    factors.iter().fold(vec![1.0], |acc, f| acc.iter().flat_map(|a| f.iter().map(move |b| a * b)).collect())
}

/// Indicator vector of site `x` on `sites` sites.
pub fn site_indicator(sites: usize, x: usize) -> Vec<f64> {
    (0..sites).map(|y| if y == x { 1.0 } else { 0.0 }).collect()
}

/// Site tuple of basis index `k` with particle 0 most significant.
pub fn digits(k: usize, sites: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    let mut rest = k;
    for i in (0..n).rev() {
        out[i] = rest % sites;
        rest /= sites;
    }
    out
}

/// ABL weights Σ|⟨c|U_rest P_i U_mid|a⟩|² by matrix products, for a rank-1
/// or general final projector: weight_i = ‖P_c U_rest P_i U_mid a‖².
pub fn weights_by_amplitudes(
    a: &DVector<C64>,
    family: &[DMatrix<C64>],
    p_c: &DMatrix<C64>,
    u_mid: &DMatrix<C64>,
    u_rest: &DMatrix<C64>,
) -> Vec<f64> {
    let at_mid = u_mid * a;
    family.iter().map(|p| (p_c * u_rest * (p * &at_mid)).norm_squared()).collect()
}

pub fn normalize(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}
