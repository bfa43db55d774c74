//! Exact computational models of the B.H. Neumann groups G(P).
//!
//! The crate materializes the two-generator groups G(P) attached to a
//! monotone sequence P of odd integers as exact objects: finitely supported
//! permutations of the integers, canonical normal forms for group elements,
//! stabilizer chains for the finite subgroups L_i, Følner boundary ratios,
//! Weiss-approximation statistics, Vershik-style random subgroup samplers,
//! and an almost-homomorphism defect harness.

pub mod almosthom;
pub mod lattice;
pub mod neumann;
pub mod permutation;
pub mod stabchain;
pub mod vershik;
pub mod weiss;

use num::BigUint;
use thiserror::Error;

/// Exact rational values (Hamming distances, boundary ratios, statistics).
pub type Rat = num::rational::Ratio<i64>;

/// Errors shared across the crate. Each variant corresponds to one of the
/// failure modes surfaced on the command line with its own exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("sequence exhausted: term {index} requested but only {available} terms are defined and no extension rule is set")]
    SequenceExhausted { index: usize, available: usize },
    #[error("invalid cycle: point {0} appears twice")]
    InvalidCycle(i64),
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("element is not in the derived subgroup N: sigma exponent is {0}")]
    NotInDerivedSubgroup(i64),
    #[error("enumeration refused: {size} elements exceeds the cap of {cap}; use sampling instead")]
    EnumerationRefused { size: BigUint, cap: u64 },
    #[error("window too small: point {point} lies outside [-{radius}, {radius}]")]
    WindowTooSmall { point: i64, radius: i64 },
    #[error("permutation does not lie in Sym_fin(omega): {0}")]
    NotBlockPreserving(String),
    #[error("missing probe word {0:?}; enlarge the probe set")]
    MissingProbe(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
