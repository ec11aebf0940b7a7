use thiserror::Error;

/// Unified error type for mesh, configuration, assembly and solver failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid material parameters: {0}")]
    Material(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("mesh file {path}, line {line}: {msg}")]
    MeshParse { path: String, line: usize, msg: String },

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("solver failed at t = {time}: {msg}")]
    Solver { time: f64, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn mesh(msg: impl Into<String>) -> Self {
        Error::Mesh(msg.into())
    }

    pub fn config(line: usize, msg: impl Into<String>) -> Self {
        Error::Config { line, msg: msg.into() }
    }

    pub fn solver(time: f64, msg: impl Into<String>) -> Self {
        Error::Solver { time, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
