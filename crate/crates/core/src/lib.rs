//! Exact counting of rank-`d` sublattices of a rational lattice with bounded
//! determinant, together with the arithmetic and asymptotic machinery used to
//! cross-check the counts.
//!
//! Every magnitude (norms, determinants, height budgets) is handled squared
//! as an exact rational; floating point only appears in the asymptotic
//! predictions.

pub mod arithmetic;
pub mod asymptotics;
pub mod counting;
mod enumerate;
pub mod error;
pub mod exact;
pub mod json;
pub mod lattice;
pub mod limits;

pub use error::{Error, Result};
pub use exact::{IntegerMatrix, Matrix, Rational, RationalMatrix, SquaredMagnitude};
pub use lattice::{Lattice, MinimaProfile, Sublattice};
pub use limits::Limits;
