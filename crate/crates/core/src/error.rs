use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix dimension {0} is not even")]
    OddDimension(usize),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("mode index {mode} out of range for {n_modes}-mode state")]
    ModeOutOfRange { mode: usize, n_modes: usize },

    #[error("expected a {expected}-mode state, got {found} modes")]
    WrongModeCount { expected: usize, found: usize },

    #[error("symplectic eigenvalue computation failed: {0}")]
    Eigensolver(String),

    #[error("matrix is not symplectic (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },

    #[error("not a Gaussian channel: {0}")]
    NotAChannel(String),

    #[error("noise matrix g is not symmetric (asymmetry {0:.3e})")]
    AsymmetricNoise(f64),

    #[error("parameter {name} = {value} out of range: {expected}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid state specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
