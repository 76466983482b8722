use thiserror::Error;

pub type Result<T, E = CamError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CamError {
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("lattice dimensions must be positive, got {height}x{width}")]
    EmptyLattice { height: usize, width: usize },

    #[error("expected {expected} cells, got {got}")]
    CellCount { expected: usize, got: usize },

    #[error("configuration shapes differ: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("neighborhood radius must be at least 1")]
    ZeroRadius,

    #[error("rule needs {expected} weights for this neighborhood, got {got}")]
    WeightCount { expected: usize, got: usize },

    #[error("weight {index} = {value} is outside [0, 1]")]
    WeightOutOfRange { index: usize, value: f64 },

    #[error("weights sum to {sum}, not 1")]
    NotOnSimplex { sum: f64 },

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("true parameter vector has zero range; NRMSE is undefined")]
    ConstantTruth,

    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
