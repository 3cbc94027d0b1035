use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum BoostError {
    #[error("state does not fit the Fock truncation: needs mass up to n = {needed:.1}, n_max = {n_max}")]
    TruncationOverflow { needed: f64, n_max: usize },

    #[error("truncation leakage {tail:.3e} exceeds guard {threshold:.1e} at t = {time:.6}")]
    Leakage { tail: f64, threshold: f64, time: f64 },

    #[error("propagation did not converge: {0}")]
    NonConvergence(String),

    #[error("effective field vanishes (|B| = {magnitude:.3e}) at theta = ({theta1:.6}, {theta2:.6}), n = {n:.6}")]
    SingularField {
        magnitude: f64,
        theta1: f64,
        theta2: f64,
        n: f64,
    },

    #[error("Chern integral {value:.8} is not quantized (residual {residual:.3e}); gap closes near this n")]
    Degenerate { value: f64, residual: f64 },

    #[error("cavity phase undefined: |<a>| = {0:.3e}")]
    UndefinedPhase(f64),

    #[error("occupation went negative (n = {n:.6}) at t = {time:.6}")]
    NegativeOccupation { n: f64, time: f64 },

    #[error("missing parameter: {0}")]
    MissingParameter(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("output schema violation in {file}: {reason}")]
    Schema { file: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl BoostError {
    /// Process exit code for the CLI: 2 config, 3 physics guard, 4 convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            BoostError::Config(_)
            | BoostError::UnknownExperiment(_)
            | BoostError::MissingParameter(_)
            | BoostError::InvalidParameter(_)
            | BoostError::TruncationOverflow { .. } => 2,
            BoostError::Leakage { .. }
            | BoostError::SingularField { .. }
            | BoostError::Degenerate { .. }
            | BoostError::UndefinedPhase(_)
            | BoostError::NegativeOccupation { .. }
            | BoostError::InvalidDensityMatrix(_) => 3,
            BoostError::NonConvergence(_) => 4,
            BoostError::Schema { .. } | BoostError::Io(_) | BoostError::Json(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, BoostError>;
