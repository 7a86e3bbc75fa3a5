//! Exact integer and rational linear algebra.

mod magnitude;
mod matrix;
mod normal_form;

pub use magnitude::{det_squared, format_rational, gram, parse_rational, rational_to_f64, SquaredMagnitude};
pub use matrix::{integer_determinant, IntegerMatrix, Matrix, RationalMatrix};
pub use normal_form::{echelon_with_transform, hnf, integer_kernel, is_primitive, saturate, snf, Echelon};

pub(crate) use normal_form::saturate_unchecked;

pub type Rational = num_rational::BigRational;
