use thiserror::Error;

/// Errors produced by the lab's constructors and numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid torus: L = {0} (need L >= 8)")]
    InvalidTorus(usize),

    #[error("invalid lattice {a}x{b}: both steps must be positive divisors of L = {l}")]
    InvalidLattice { a: usize, b: usize, l: usize },

    #[error("invalid box side N = {n} for L = {l}: need an even N with 2 <= N <= L")]
    InvalidBox { n: usize, l: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("window width {width} does not divide L = {l}")]
    InvalidWidth { width: usize, l: usize },

    #[error("exponent p = {0} is below 1")]
    InvalidExponent(f64),

    #[error("not a frame: lower bound {lower:e}, upper bound {upper:e}")]
    NotAFrame { lower: f64, upper: f64 },

    #[error("dense method limited to L <= {max}, got L = {l}; use the iterative method")]
    TooLargeForDense { l: usize, max: usize },

    #[error("iteration did not converge after {iterations} steps (last Ritz values {ritz:?})")]
    NoConvergence { iterations: usize, ritz: Vec<f64> },

    #[error("fraction {0} outside (0, 1)")]
    InvalidFraction(f64),

    #[error("every requested box is empty")]
    EmptyBoxes,

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
