use thiserror::Error;

/// Errors shared across the grid, variational, init-data and solver layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("operation requires a nonempty mask")]
    EmptyMask,

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("bump containment violated: {0}")]
    BadContainment(String),

    #[error("initial data is not nondegenerate: {0}")]
    NotNondegenerate(String),

    #[error("no grid value of g lies in [{lo}, {hi}) at sequence index {n}")]
    SequenceExhausted { n: usize, lo: f64, hi: f64 },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("solution dipped below zero (min {min:.3e}); reduce dt or switch to imex")]
    NegativityBreach { min: f64 },

    #[error("experiment `{experiment}` requires the {expected} regime, found {found}")]
    WrongRegime {
        experiment: String,
        expected: String,
        found: String,
    },

    #[error("invalid parameter: {0}")]
    BadParameter(String),

    #[error("field format: {0}")]
    FieldFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
