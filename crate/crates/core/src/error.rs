use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("internal contradiction: {0}")]
    InternalContradiction(String),

    #[error("grid too large: {samples} values exceed the budget of {budget}")]
    GridTooLarge { samples: u128, budget: u128 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("cylinder out of domain: {0}")]
    CylinderOutOfDomain(String),

    #[error("q = {0} outside the admissible range (2, 3)")]
    QOutOfRange(f64),

    #[error("time window out of domain: {0}")]
    WindowOutOfDomain(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("unsupported container version {0}")]
    Version(u32),

    #[error("no witness radius for candidate {index} at eps_hat = {eps_hat}")]
    WitnessMissing { index: usize, eps_hat: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate norm: {0}")]
    DegenerateNorm(String),

    #[error("degenerate ratio: {0}")]
    DegenerateRatio(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by bad user input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::InvalidGrid(_)
                | Error::QOutOfRange(_)
                | Error::Config(_)
                | Error::GridTooLarge { .. }
                | Error::OutOfDomain(_)
                | Error::CylinderOutOfDomain(_)
                | Error::WindowOutOfDomain(_)
                | Error::DegenerateDenominator(_)
        )
    }
}
