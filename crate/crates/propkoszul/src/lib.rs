//! Exact homological computations for props presented by generators and
//! quadratic relations: composition products over decorated directed graphs,
//! free and quotient components, bar and cobar constructions, Koszul duals
//! and truncated Koszul-criterion checks, all over the rational numbers.

pub mod barcobar;
pub mod cli;
pub mod gebra;
pub mod graphs;
pub mod koszul;
pub mod linalg;
pub mod perm;
pub mod presentation;
pub mod presets;
pub mod propcalc;
pub mod report;
pub mod sbimodule;
pub mod space;

/// Exact rational scalar used everywhere; floating point is never used.
pub type Rat = num::BigRational;

/// Convenience constructor for small rationals.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(num.into(), den.into())
}

/// Convenience constructor for small integers as rationals.
pub fn rint(num: i64) -> Rat {
    Rat::from_integer(num.into())
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("malformed graph: {0}")]
    MalformedGraph(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("truncation overflow: {0}")]
    TruncationOverflow(String),
    #[error("differential fails to square to zero at degree {0}")]
    BoundaryCheck(i64),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
