//! Golden gates for `PU(3)` from the unitary group `GU_3` over `Z[i][1/p]`.
//!
//! The crate builds the generating sets `S_p` and `S'_p` of the
//! simply-transitive lattices, their congruence Cayley graphs over finite
//! fields, the spectra of those graphs, word navigation in the lattice, and
//! covering statistics of gate words inside `PU(3)`.
//!
//! Exact code is generic over the integer type ([`scalar::Int`]) and float
//! code over the real type ([`scalar::Real`]); the aliases below fix the
//! common choices.

pub mod cayley;
pub mod covering;
pub mod error;
pub mod finite_field;
pub mod formulas;
pub mod gates;
pub mod gaussian;
pub mod navigation;
pub mod scalar;
pub mod similitude;

pub use error::{Error, Result};
pub use gates::Variant;

/// Gaussian integers over machine words.
pub type Gaussian = gaussian::GaussInt<i64>;
/// Gaussian integers with arbitrary precision.
pub type BigGaussian = gaussian::GaussInt<num_bigint::BigInt>;
/// Integral similitude matrices over machine words.
pub type Matrix = similitude::GMat<i64>;
pub type BigMatrix = similitude::GMat<num_bigint::BigInt>;
pub type Element = similitude::ProjElement<i64>;
pub type BigElement = similitude::ProjElement<num_bigint::BigInt>;
pub type Gates = gates::GateSet<i64>;
pub type BigGates = gates::GateSet<num_bigint::BigInt>;
pub type Navigator = navigation::Navigator<i64>;
pub type BigNavigator = navigation::Navigator<num_bigint::BigInt>;
/// A point of `PU(3)` in double precision.
pub type Point = covering::PU3Point<f64>;
