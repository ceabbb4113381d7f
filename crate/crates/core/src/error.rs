use thiserror::Error;

/// Errors raised by the game library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not in SU(2): {0}")]
    NotSpecialUnitary(String),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("entangling angle {0} outside [0, pi/2]")]
    InvalidGamma(f64),

    #[error("invalid payoff table: {0}")]
    InvalidTable(String),

    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("restricted-set parameters out of range: theta={theta}, phi={phi}")]
    ParamsOutOfRange { theta: f64, phi: f64 },

    #[error("grid resolution must be at least 2 per coordinate")]
    InvalidResolution,

    #[error("{0}")]
    InvalidArgument(String),

    #[error("quantum equilibrium payoff {qbar} ties with {against} = {value}")]
    BoundaryTie {
        qbar: f64,
        against: &'static str,
        value: f64,
    },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
