//! Exact symbolic arithmetic: rationals, parameter polynomials and rational
//! functions, polynomials and rational functions in `z`, and matrices over
//! them.

pub mod gcd;
pub mod matrix;
pub mod matz;
pub mod param;
pub mod parse;
pub mod poly;
pub mod polyz;
pub mod ratz;

pub use matrix::{Matrix, Scalar};
pub use matz::{mat_equal, mat_inverse, param_substitute, resolvent, transfer_matrix, MatParam, MatRatZ};
pub use param::ParamRat;
pub use parse::{parse_matrix, parse_ratz};
pub use poly::{rat, Monomial, ParamPoly};
pub use polyz::PolyZ;
pub use ratz::{ratz_equal, RatZ};

/// Exact rational scalar.
pub type BigRat = num_rational::BigRational;
