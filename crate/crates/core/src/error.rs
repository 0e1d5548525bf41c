use thiserror::Error;

pub type Result<T> = std::result::Result<T, IcapError>;

#[derive(Debug, Error)]
pub enum IcapError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("velocity field is identically zero, no time step can be derived")]
    NoTransport,

    #[error("non-finite state at t = {time} (step {step})")]
    Instability { time: f64, step: usize },

    #[error("inadmissible state in cell ({i}, {j}): {reason}")]
    Inadmissible { i: isize, j: isize, reason: String },

    #[error("{0}")]
    Degenerate(String),

    #[error("unknown case '{0}'")]
    UnknownCase(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
