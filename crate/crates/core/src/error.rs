use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error(
        "division is not part of the entire-function grammar (byte {offset}); \
         build a MeroFn from a numerator and a denominator instead"
    )]
    DivisionRejected { offset: usize },

    #[error("value overflows the scaled representation (log2 magnitude ~ {exponent:e})")]
    Overflow { exponent: f64 },

    #[error("jet order {order} exceeds the cap {cap}")]
    OrderCap { order: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid sector: {0}")]
    InvalidSector(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("reduced representation violated at z = {z}: all components vanish")]
    ReducedViolation { z: Complex64 },

    #[error("linearly degenerate curve: the Wronskian vanishes identically")]
    LinearlyDegenerate,

    #[error("proportional pair: f_i g_j - f_j g_i vanishes identically")]
    ProportionalPair,

    #[error("function vanishes near the contour at z = {z}; contour jitter required")]
    NearZeroOnContour { z: Complex64 },

    #[error("argument-principle precision failure: {0}")]
    Precision(String),

    #[error("subdivision depth {depth} exhausted near z = {z}")]
    DepthExhausted { depth: usize, z: Complex64 },

    #[error("quadrature did not converge: estimate {value}, error {error:e} after {panels} panels")]
    Quadrature { value: f64, error: f64, panels: usize },

    #[error("numerator and denominator share an unresolved zero near z = {z}")]
    CommonZeroAmbiguity { z: Complex64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Errors that stem from numerical limits rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Overflow { .. }
                | Error::NearZeroOnContour { .. }
                | Error::Precision(_)
                | Error::DepthExhausted { .. }
                | Error::Quadrature { .. }
                | Error::CommonZeroAmbiguity { .. }
        )
    }
}
