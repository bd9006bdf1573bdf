use thiserror::Error;

use crate::index::IndexSet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid shape k={k}, n={n}: both must be at least 1")]
    InvalidShape { k: usize, n: usize },

    #[error("index {index} out of range {lo}..={hi}")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("p and q must differ (both are {0})")]
    EqualPair(usize),

    #[error("duplicate entry {0} in index tuple")]
    DuplicateIndex(usize),

    #[error("derivative variable x_{i}{j} repeated")]
    RepeatedPair { i: usize, j: usize },

    #[error("parameter vector has length {got}, expected {expected}")]
    ParamLength { got: usize, expected: usize },

    #[error("parameter entries sum to {0}, expected 0")]
    ParamSum(i64),

    #[error("parameter entry alpha_{0} is zero")]
    ZeroParameter(usize),

    #[error("alpha_J vanishes for J = {0}; use the matrix form of the connection")]
    ZeroAlphaJ(IndexSet),

    #[error("minor |x~<{0}>| vanishes")]
    VanishingMinor(IndexSet),

    #[error("x is not in X: {} vanishing minor(s): {}", .0.len(), join_sets(.0))]
    NotInX(Vec<IndexSet>),

    #[error("variable x_{i}{j} is zero")]
    ZeroVariable { i: usize, j: usize },

    #[error("parameters outside the finite-support regime: {0}")]
    Regime(String),

    #[error("upper shift at index {index} has a pole (alpha_{index} = -1)")]
    ShiftPole { index: usize },

    #[error("row sums total {rows} but column sums total {cols}")]
    MarginMismatch { rows: i64, cols: i64 },

    #[error("marginal sums must be nonnegative")]
    NegativeMarginal,

    #[error("probability p[{i}][{j}] must be positive")]
    NonPositiveProbability { i: usize, j: usize },

    #[error("probability matrix is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    ProbabilityShape {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },

    #[error("path step {step} (index {index}) produces a zero entry in {alpha:?}")]
    PathZeroEntry {
        step: usize,
        index: usize,
        alpha: Vec<i64>,
    },

    #[error("no contingency table has these marginal sums")]
    EmptyFiber,

    #[error("the series value S vanishes")]
    ZeroSeries,

    #[error("singular matrix")]
    Singular,

    #[error("label lists do not match")]
    LabelMismatch,

    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),

    #[error("internal assertion failed: {0}")]
    Internal(String),
}

impl Error {
    /// Errors that indicate a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::Internal(_) | Error::OracleMismatch(_) | Error::LabelMismatch | Error::Singular
        )
    }
}

fn join_sets(sets: &[IndexSet]) -> String {
    sets.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}
