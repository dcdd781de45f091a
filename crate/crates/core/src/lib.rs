//! Pre/post-selected (ABL) conditional probabilities on finite-dimensional
//! quantum systems, and the beable expectation fields built from them.
//!
//! The crate is `no_std` + `alloc` when built without the default `std`
//! feature. With `std` enabled, field evaluation is spread over a rayon
//! thread pool; results are identical either way.
//!
//! Layout:
//! - [`hilbert`]: states, operators, projector families, unitary evolution,
//!   Born probabilities and Lüders collapse.
//! - [`abl`]: the basic, degenerate-projective and time-evolved ABL rule,
//!   plus the exhaustive measurement-sequence oracle.
//! - [`nonrel`]: N-particle and interacting-class lattice models.
//! - [`relmodels`]: one- and two-photon "billiard" toy models with their
//!   regions of indeterminacy.
//! - [`field`]: spacetime grids and the [`field::BeableField`] output type.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod abl;
pub mod error;
pub mod field;
mod fmath;
pub mod hilbert;
pub mod nonrel;
mod par;
pub mod random;
pub mod relmodels;
pub mod tolerance;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use tolerance::Tolerances;
