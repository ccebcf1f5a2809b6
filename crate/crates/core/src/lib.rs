//! Exact combinatorics of affine root systems, twisted conjugation data,
//! local root systems, band invariants and momentum-pair sphericity checks
//! for compact multiplicity-free quasi-Hamiltonian manifolds.
//!
//! All arithmetic is exact over `BigRational`.

#![allow(clippy::needless_range_loop)]

pub mod band;
pub mod catalog;
pub mod dynkin;
pub mod euclid;
pub mod linalg;
pub mod localroot;
pub mod lp;
pub mod pair;
pub mod polytope;
pub mod rational;
pub mod rootsys;
pub mod spherical;
pub mod twist;

pub use euclid::{AffineFunctional, AffinePoint, Lattice, MetricSpace, RationalVector};
pub use linalg::AbelianGroup;
pub use rational::{Q, Z};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("functional has zero gradient")]
    ZeroGradient,
    #[error("lattice does not span the space: {0}")]
    NotFullRank(String),
    #[error("not contained: {0}")]
    NotContained(String),
    #[error("invalid type: {0}")]
    InvalidType(String),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("root system does not span: {0}")]
    NonSpanning(String),
    #[error("integrality violated: {0}")]
    Integrality(String),
    #[error("not primitive: {0}")]
    NotPrimitive(String),
    #[error("point outside the alcove: {0}")]
    OutsideAlcove(String),
    #[error("not a vertex of the polytope: {0}")]
    NotAVertex(String),
    #[error("empty complement: {0}")]
    EmptyComplement(String),
    #[error("inconsistent data: {0}")]
    Inconsistent(String),
    #[error("catalog error: {0}")]
    Catalog(String),
    #[error("invalid twist: {0}")]
    InvalidTwist(String),
    #[error("pair is not spherical: {0}")]
    NotSpherical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
