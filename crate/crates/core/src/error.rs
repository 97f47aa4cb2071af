use std::fmt;

use thiserror::Error;

/// A single failed parameter constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// The constraint as written in the model definition, e.g. `δ ∈ ]0,1[`.
    pub constraint: &'static str,
    pub detail: String,
}

impl Violation {
    pub(crate) fn new(constraint: &'static str, detail: impl Into<String>) -> Self {
        Self {
            constraint,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "violated \"{}\" ({})", self.constraint, self.detail)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {}", join(.0))]
    InvalidModel(Vec<Violation>),

    #[error("Schoenberg matrix at degree {degree} is not positive semi-definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemiDefinite { degree: usize, min_eigenvalue: f64 },

    #[error("matrix is indefinite (smallest eigenvalue {min_eigenvalue:e})")]
    Indefinite { min_eigenvalue: f64 },

    #[error("degree {degree} has b > 0 but zero probability under the degree law")]
    SupportNotCovered { degree: usize },

    #[error("quadrature did not converge: estimate {value:e}, error estimate {error:e}")]
    Quadrature { value: f64, error: f64 },

    #[error("non-finite value produced by wave {wave}")]
    NonFinite { wave: u64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
