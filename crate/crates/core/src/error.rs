use thiserror::Error;

/// Everything that can go wrong inside the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {0}: every factor needs at least two levels")]
    InvalidDimension(usize),
    #[error("slot {slot} out of range for a register with {modes} modes")]
    SlotOutOfRange { slot: usize, modes: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operands live on different registers")]
    RegisterMismatch,
    #[error("Fock level {n} does not fit a mode of dimension {dim}")]
    FockOutOfRange { n: usize, dim: usize },
    #[error("truncation leakage {leakage:.3e} exceeds threshold {threshold:.3e}; increase the mode dimension")]
    Leakage { leakage: f64, threshold: f64 },
    #[error("operator is not hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("step control failed to converge: {0}")]
    Convergence(String),
    #[error("ill-conditioned problem: {0}")]
    IllConditioned(String),
    #[error("no bright event within {0} repetitions")]
    MaxRepetitions(usize),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::Leakage { .. }
            | Error::NotHermitian(_)
            | Error::Convergence(_)
            | Error::IllConditioned(_)
            | Error::MaxRepetitions(_) => 4,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
