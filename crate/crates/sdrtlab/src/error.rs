use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("simulation diverged at t = {time:.6e}{}", match cell { Some(c) => format!(" (cell {c})"), None => String::new() })]
    Diverged { time: f64, cell: Option<usize> },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Diverged { .. })
    }
}
