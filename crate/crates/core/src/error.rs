use thiserror::Error;

use crate::gram::MinorReport;
use crate::polycert::CertStats;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("arithmetic failure at step {step}: {message}")]
    Arithmetic { step: usize, message: String },

    /// The `j x j` capacitance matrix `1 + V^T A^{-1} U` is singular.
    #[error("singular capacitance matrix {matrix:?}")]
    SingularCapacitance { matrix: Vec<Vec<String>> },

    #[error("matrix is exactly singular")]
    Singular,

    #[error("minor budget of {budget} exhausted after {} minors", partial.minors_checked)]
    MinorBudget {
        budget: u64,
        partial: Box<MinorReport>,
    },

    #[error("term budget of {budget} exceeded while building {name}")]
    TermBudget {
        name: String,
        budget: usize,
        partial: Box<CertStats>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn input(message: impl Into<String>) -> Self {
        Error::Input(message.into())
    }
}
