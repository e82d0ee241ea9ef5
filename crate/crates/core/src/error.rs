use thiserror::Error;

/// Errors raised by the verification library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("full-rank input: {0}")]
    FullRank(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid factorization pair: residual {residual:e} exceeds {bound:e}")]
    InvalidPair { residual: f64, bound: f64 },

    #[error("saturation inconclusive after {pairs_used} pairs (dimension history {history:?})")]
    Inconclusive {
        pairs_used: usize,
        history: Vec<usize>,
    },

    #[error(
        "intertwining hypothesis violated: residual {residual:e} at Y=E[{}][{}], W=E[{}][{}]",
        .y_unit.0, .y_unit.1, .w_unit.0, .w_unit.1
    )]
    HypothesisViolated {
        residual: f64,
        y_unit: (usize, usize),
        w_unit: (usize, usize),
    },

    #[error("numerical tolerance exceeded: {what} residual {residual:e} > {bound:e}")]
    NumericalTolerance {
        what: &'static str,
        residual: f64,
        bound: f64,
    },

    #[error(
        "extraction inconsistent: blockwise residual {blockwise_residual:e}, least-squares residual {least_squares_residual:e}, disagreement {disagreement:e}"
    )]
    ExtractionInconsistent {
        blockwise: Box<crate::extract::ImplementingOperator>,
        least_squares: Box<crate::extract::ImplementingOperator>,
        blockwise_residual: f64,
        least_squares_residual: f64,
        disagreement: f64,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
