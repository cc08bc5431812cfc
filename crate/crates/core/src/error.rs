use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("coordinate {coord}: coefficient of x{coord} is zero")]
    ZeroScale { coord: usize },

    #[error("coordinate {coord} is not triangular: {detail}")]
    NotTriangular { coord: usize, detail: String },

    #[error("variable index {index} out of range 1..={n}")]
    VariableOutOfRange { index: usize, n: usize },

    #[error("substitution needs at least {needed} images, got {got}")]
    SubstitutionArity { needed: usize, got: usize },

    #[error("coefficient frame has no slot for coordinate {coord}, monomial {monomial}")]
    FrameIncomplete { coord: usize, monomial: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown generator label `{0}`")]
    UnknownLabel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// D^k(p) was still nonzero at the safety ceiling. Triangular derivations
    /// are locally nilpotent, so this only fires on a bug.
    #[error("nilpotency index exceeded safety cap {cap}")]
    NilpotencyCap { cap: usize },

    #[error("Lie closure did not stabilize within {cap} rounds")]
    ClosureCap { cap: usize },

    #[error("{series} series stalled at dimension {dim}")]
    SeriesStalled { series: &'static str, dim: usize },

    #[error("property violated: {0}")]
    PropertyViolation(String),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    /// True for failures of a mathematical property, as opposed to bad input.
    pub fn is_property_violation(&self) -> bool {
        matches!(
            self,
            Error::NilpotencyCap { .. }
                | Error::ClosureCap { .. }
                | Error::SeriesStalled { .. }
                | Error::PropertyViolation(_)
        )
    }
}
