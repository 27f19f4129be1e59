use std::fmt;

use serde::{Deserialize, Serialize};

/// Which end of a logarithmic quadrature grid failed to converge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailEnd {
    /// σ → 0
    Lower,
    /// σ → ∞
    Upper,
}

impl fmt::Display for TailEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailEnd::Lower => f.write_str("lower (σ→0)"),
            TailEnd::Upper => f.write_str("upper (σ→∞)"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("length error: {0}")]
    Length(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("inadmissible: {0}")]
    Admissibility(String),

    #[error("Mellin integral diverges at the {end} end: {detail}")]
    Divergence { end: TailEnd, detail: String },

    #[error("contour error: {0}")]
    Contour(String),

    #[error("contour truncation: {0}")]
    Truncation(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("regression rejected: {0}")]
    NotPowerLaw(String),
}

impl Error {
    /// True for failures of the mathematics (admissibility, divergence,
    /// truncation) as opposed to malformed input or configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Admissibility(_)
                | Error::Divergence { .. }
                | Error::Contour(_)
                | Error::Truncation(_)
                | Error::NonFinite(_)
                | Error::NotPowerLaw(_)
        )
    }

    /// Short machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Length(_) => "length",
            Error::Domain(_) => "domain",
            Error::Parameter(_) => "parameter",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::Io(_) => "io",
            Error::Admissibility(_) => "admissibility",
            Error::Divergence { .. } => "divergence",
            Error::Contour(_) => "contour",
            Error::Truncation(_) => "truncation",
            Error::NonFinite(_) => "non_finite",
            Error::NotPowerLaw(_) => "not_power_law",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
