use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong inside the library.
///
/// The CLI maps these onto exit codes through [`Error::category`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Fock space: dimension {0} (need at least 2)")]
    InvalidSpace(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coherent amplitude |alpha|^2 = {norm_sqr} exceeds truncation guard {limit} for dim {dim}")]
    TruncationRisk { norm_sqr: f64, limit: f64, dim: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("drive amplitude must be nonzero for the analytic threshold")]
    ZeroDrive,

    #[error("occupation {occupation} not representable with n_max = {n_max}")]
    OccupationOutOfRange { occupation: f64, n_max: usize },

    #[error("truncation inadequate: top Fock level population {population:.3e} at n_max = {n_max}")]
    TruncationExceeded { population: f64, n_max: usize },

    #[error("integration failure at t = {t}: {diagnostic}")]
    IntegrationFailure { t: f64, diagnostic: String },

    #[error("step size underflow at t = {t} (dt = {dt:.3e}): {diagnostic}")]
    Stiffness { t: f64, dt: f64, diagnostic: String },

    #[error("trajectory too short: ends at t = {t_end}, classification needs {needed}")]
    TrajectoryTooShort { t_end: f64, needed: f64 },

    #[error("inconclusive classification: {0}")]
    Inconclusive(String),

    #[error("lattice dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("steady state is not unique: Liouvillian kernel has dimension {kernel_dim}")]
    Multistability { kernel_dim: usize },

    #[error("steady-state solver did not converge: {0}")]
    NotConverged(String),

    #[error("g2({i},{j}) undefined: vanishing occupation")]
    UndefinedCorrelator { i: usize, j: usize },

    #[error("no positive solution for the cancellation condition: {0}")]
    NoSolution(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse error classes used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    InvalidInput,
    Numerical,
    Inconclusive,
    Io,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            InvalidSpace(_)
            | DimensionMismatch { .. }
            | TruncationRisk { .. }
            | InvalidParams(_)
            | ZeroDrive
            | OccupationOutOfRange { .. }
            | DimensionCap { .. }
            | NoSolution(_)
            | Config(_)
            | Json(_) => ErrorCategory::InvalidInput,
            TruncationExceeded { .. }
            | IntegrationFailure { .. }
            | Stiffness { .. }
            | Multistability { .. }
            | NotConverged(_)
            | UndefinedCorrelator { .. } => ErrorCategory::Numerical,
            TrajectoryTooShort { .. } | Inconclusive(_) => ErrorCategory::Inconclusive,
            Io { .. } | Csv(_) => ErrorCategory::Io,
        }
    }

    /// Short machine-readable tag for error JSON.
    pub fn kind(&self) -> &'static str {
        use Error::*;
        match self {
            InvalidSpace(_) => "invalid_space",
            DimensionMismatch { .. } => "dimension_mismatch",
            TruncationRisk { .. } => "truncation_risk",
            InvalidParams(_) => "invalid_params",
            ZeroDrive => "zero_drive",
            OccupationOutOfRange { .. } => "occupation_out_of_range",
            TruncationExceeded { .. } => "truncation_exceeded",
            IntegrationFailure { .. } => "integration_failure",
            Stiffness { .. } => "stiffness",
            TrajectoryTooShort { .. } => "trajectory_too_short",
            Inconclusive(_) => "inconclusive",
            DimensionCap { .. } => "dimension_cap",
            Multistability { .. } => "multistability",
            NotConverged(_) => "not_converged",
            UndefinedCorrelator { .. } => "undefined_correlator",
            NoSolution(_) => "no_solution",
            Config(_) => "invalid_config",
            Io { .. } => "io",
            Json(_) => "json",
            Csv(_) => "csv",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
