//! Formal normal forms for planar vector fields carrying an affine partner.
//!
//! Series are truncated at a fixed total degree. Every object records the
//! degree up to which its coefficients are certified, and operations take the
//! minimum of their inputs.

pub mod cli;
pub mod cohom;
pub mod conjugacy;
pub mod fields;
pub mod galois;
pub mod gen;
pub mod normalize;
pub mod series;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("order mismatch: {0} vs {1}")]
    OrderMismatch(u32, u32),
    #[error("series is not a unit (zero constant term)")]
    NotUnit,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("small divisor {divisor:e} at monomial x^{a} y^{b}")]
    SmallDivisor { a: u32, b: u32, divisor: f64 },
    #[error("eigenvalue ratio is rational ({p}/{q}); use the resonant solver")]
    RationalRatio { p: i64, q: i64 },
    #[error("unsolvable: {0}")]
    Unsolvable(String),
    #[error("inconsistent: {0}")]
    Inconsistent(String),
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("usage: {0}")]
    Usage(String),
}

impl Error {
    /// Usage errors map to exit code 2, everything else is a mathematical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Syntax { .. } | Error::Usage(_) => 2,
            _ => 1,
        }
    }
}
