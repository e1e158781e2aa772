//! Exact and numeric laboratory for semigroups of partial permutations and
//! partial isometries.
//!
//! The crate is organised bottom-up:
//!
//! * [`cyclotomic`] and [`exact`] provide exact arithmetic (cyclotomic
//!   integers, rational matrices, binomials).
//! * [`partial_maps`] handles partial permutations of `{1..N}`, optionally
//!   signed by roots of unity.
//! * [`partitions`] implements set partitions, the six partition categories
//!   and lattice Möbius functions.
//! * [`measures`] holds exact discrete laws, cumulants and the
//!   classical/free cumulant comparison.
//! * [`weingarten`] builds Gram/Weingarten tables and evaluates the
//!   three-factor moment integrals.
//! * [`isometry_numeric`] contains floating point models of partial
//!   isometries: composition through the projection meet, membership
//!   predicates, Haar sampling and Monte Carlo laws.
//! * [`models`] covers the 2×2 crossed-product model, the half-commutation
//!   checkers and the complex doubling.
//! * [`suite`] bundles the reproducible verification runs used by the CLI and
//!   the acceptance tests.

pub mod cyclotomic;
pub mod error;
pub mod exact;
pub mod isometry_numeric;
pub mod measures;
pub mod models;
pub mod partial_maps;
pub mod partitions;
pub mod suite;
pub mod weingarten;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
