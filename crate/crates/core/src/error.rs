use thiserror::Error;

use crate::linalg::Vector;
use crate::mpnum::BigReal;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("non-finite result in {0}")]
    NonFinite(&'static str),

    #[error("cannot parse {input:?} as a decimal number")]
    Parse { input: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for dimension {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("matrix is singular at working precision (elimination step {step})")]
    Singular { step: usize },

    /// `y_j = 0` with a nonzero step: the inverse Jacobian needs to be rebuilt.
    #[error("ICUM breakdown at iteration {iteration}: zero pivot in y with nonzero step; refresh the Jacobian")]
    IcumBreakdown { iteration: usize },

    #[error("ICUM did not converge in {iterations} iterations (best residual {best_residual:e})")]
    NonConvergence {
        iterations: usize,
        best_residual: f64,
        best: Box<Vector>,
    },

    #[error("secant method stalled on a flat secant (best iterate {best})")]
    FlatSecant { best: BigReal },

    #[error("secant method exceeded {iterations} iterations (best iterate {best})")]
    SecantIterations { iterations: usize, best: BigReal },

    #[error("Arnoldi estimate of delta did not stabilize within {steps} steps ({agreement_digits} agreeing digits, best {best})")]
    DeltaNotStabilized {
        steps: usize,
        agreement_digits: u32,
        best: BigReal,
    },

    #[error("bisection bracket failure at cascade level {level}")]
    Bracket { level: usize },

    #[error("checkpoint {path}: line {line}: {message}")]
    Checkpoint {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numerical failures as opposed to usage or I/O errors.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DivisionByZero
                | Error::NonFinite(_)
                | Error::Singular { .. }
                | Error::IcumBreakdown { .. }
                | Error::NonConvergence { .. }
                | Error::FlatSecant { .. }
                | Error::SecantIterations { .. }
                | Error::DeltaNotStabilized { .. }
                | Error::Bracket { .. }
        )
    }
}
