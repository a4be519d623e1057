use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not Hermitian: entry ({row}, {col}) deviates from the conjugate transpose by {deviation:e}")]
    Hermiticity { row: usize, col: usize, deviation: f64 },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("graph has a nonvanishing cycle phase {phase} on cycle {cycle:?}")]
    NotVgp { cycle: Vec<usize>, phase: f64 },

    #[error("no edge between {0} and {1}")]
    MissingEdge(usize, usize),

    #[error("walk does not return to its initial state")]
    NotClosed,

    #[error("term {term} has no image for state {state}")]
    Undefined { term: usize, state: usize },

    #[error("work budget of {cap} exceeded")]
    BudgetExceeded { cap: u64 },

    #[error("energies {a} and {b} are closer than the oracle separation {sep:e}")]
    NearDegenerate { a: f64, b: f64, sep: f64 },

    #[error("sampler trapped: {0}")]
    ZeroWeightTrap(String),
}

pub type Result<T> = core::result::Result<T, Error>;
