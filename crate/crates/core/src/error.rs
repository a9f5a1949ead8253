use std::path::PathBuf;

use thiserror::Error;

use crate::schedules::{Algorithm, ScheduleViolation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("points must have at least one coordinate")]
    EmptyPoint,

    #[error("coordinate {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },

    #[error("ball radius must be positive and finite, got {0}")]
    InvalidRadius(f64),

    #[error("composite operator needs at least one inner ball")]
    EmptyInnerBalls,

    #[error("{0}")]
    InvalidFunction(String),

    #[error("gradient requested for a nonsmooth function")]
    NonSmooth,

    #[error("prox parameter must be positive and finite, got {0}")]
    InvalidProxParameter(f64),

    #[error("schedule not admissible for the {algorithm} algorithm: {}", render_violations(.violations))]
    InvalidSchedule {
        algorithm: Algorithm,
        violations: Vec<ScheduleViolation>,
    },

    #[error("invalid sampler: {0}")]
    InvalidSampler(String),

    #[error("greedy sampling requires the residuals of all components")]
    MissingResiduals,

    #[error("expected {expected} residuals, got {actual}")]
    ResidualCount { expected: usize, actual: usize },

    #[error("invalid transition matrix: {0}")]
    InvalidTransitionMatrix(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn render_violations(v: &[ScheduleViolation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
