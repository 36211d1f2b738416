//! Lattice surgery on 4.8.8 triangular color codes.
//!
//! The crate is organised bottom-up:
//!
//! * [`gf2`], [`pauli`]: binary-symplectic algebra, check sets, distances.
//! * [`geometry`]: color and surface patches, merges, CNOT and injection layouts.
//! * [`circuit`]: syndrome-extraction circuits and the depolarizing noise model.
//! * [`sim`]: CHP tableau, symbolic detector analysis, bit-parallel Pauli frames.
//! * [`decoding`]: minimum-weight code-capacity decoding and circuit lookup tables.
//! * [`surgery`]: the logical protocols (memory, preparation, H/S, merges, CNOT, injection).
//! * [`montecarlo`], [`resources`]: failure-rate campaigns and closed-form accounting.
//! * [`cli`]: the thin command-line front end used by the `colorsurg` binary.

pub mod circuit;
pub mod cli;
pub mod decoding;
pub mod geometry;
pub mod gf2;
pub mod montecarlo;
pub mod pauli;
pub mod resources;
pub mod sim;
pub mod surgery;
pub mod verify;

pub use gf2::Bits;
pub use pauli::{CheckSet, LogicalPair, Pauli, PauliOp};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("distance must be odd and positive, got {0}")]
    InvalidDistance(i64),
    #[error("operand sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("incompatible sides: {0}")]
    IncompatibleSides(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    TooLarge(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("formula regime violated: {0}")]
    Regime(String),
    #[error("qubit {0} out of range")]
    QubitRange(usize),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Validate an odd positive code distance.
pub fn check_distance(d: i64) -> Result<usize> {
    if d < 1 || d % 2 == 0 {
        Err(Error::InvalidDistance(d))
    } else {
        Ok(d as usize)
    }
}
