//! Exact arithmetic over A = F_q[theta] around the Carlitz module and its
//! Tate-algebra deformations.
//!
//! The crate computes, with certified exactness or tracked precision:
//!
//! * several-variable L-series over A and their Euler products,
//! * the associated unit polynomials u(t_1,...,t_n; z), their special values
//!   and z-derivatives at z = 1,
//! * class-module Fitting generators and their character evaluations,
//! * Bernoulli-Carlitz fractions and Bernoulli-Goss polynomials,
//! * Gauss-Thakur sums in cyclotomic extensions,
//! * P-adic L-values via two independent routes (direct block summation and
//!   unit logarithms),
//! * Anderson-style log-algebraicity elements.
//!
//! Everything is exact: infinite-place data is carried in truncated Laurent
//! windows with absolute-precision bookkeeping, and any value reported as a
//! polynomial has been extracted with a certificate (vanishing tails,
//! precision margins). No floating point anywhere.
//!
//! The one binary (`carlitz`) fronts the library as a CLI with JSON output;
//! the `examples/` directory demonstrates each capability as a library call.

pub mod field;
pub mod poly;
pub mod mpoly;
pub mod series;
pub mod carlitz;
pub mod special;
pub mod lseries;
pub mod units;
pub mod classmod;
pub mod characters;
pub mod cyclo;
pub mod padic;
pub mod cli;

/// Errors shared by the whole crate. Computational failures carry enough
/// context to be reported by the CLI as structured JSON.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("not prime: {0}")]
    NotPrime(String),
    #[error("element is not a square: {0}")]
    NonSquare(String),
    #[error("element is not a unit: {0}")]
    NotAUnit(String),
    #[error("series is not a polynomial at the working precision: {0}")]
    NotPolynomialAtPrecision(String),
    #[error("grade mismatch: {0}")]
    GradeMismatch(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("polynomial is not irreducible: {0}")]
    NotIrreducible(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("value is not a root: {0}")]
    NotARoot(String),
    #[error("integrality violation: {0}")]
    IntegralityViolation(String),
    #[error("series did not stabilize within budget: {0}")]
    NonConvergent(String),
    #[error("P-adic logarithm needs strictly positive valuation: {0}")]
    NonPositiveValuation(String),
    #[error("descent check failed: {0}")]
    DescentFailure(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
