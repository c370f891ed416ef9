use thiserror::Error;

/// Errors raised by the library. Each variant maps to one CLI exit code.
#[derive(Debug, Error)]
pub enum EtmError {
    #[error("parameter domain: {0}")]
    Domain(String),

    #[error("moment domain: {0}")]
    MomentDomain(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("data: {0}")]
    Data(String),

    #[error("rank deficient regression: {0}")]
    Rank(String),

    #[error("process is not mean reverting: {0}")]
    NotMeanReverting(String),

    #[error("ill-conditioned system (condition estimate {0:e})")]
    IllConditioned(f64),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("integration failure: {0}")]
    Integration(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl EtmError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            EtmError::Usage(_) => 2,
            EtmError::Data(_) | EtmError::Io(_) => 3,
            EtmError::Domain(_)
            | EtmError::MomentDomain(_)
            | EtmError::Rank(_)
            | EtmError::NotMeanReverting(_)
            | EtmError::IllConditioned(_)
            | EtmError::NoConvergence(_)
            | EtmError::Integration(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, EtmError>;
