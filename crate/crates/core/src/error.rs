use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point coincides with the cone apex; direction is undefined")]
    CoincidentPoint,

    #[error("anchor directions coincide; boundary directions form a full circle")]
    CoincidentAnchors,

    #[error("direction does not intersect the projection plane (dot = {0})")]
    RayMissesPlane(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("uav power model needs rotor parameters or explicit p_fly/p_hov overrides")]
    MissingPowerModel,

    #[error("charging demand cannot be met for nodes {nodes:?}: {reason}")]
    Infeasible { nodes: Vec<usize>, reason: String },

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("simplex exceeded its iteration limit ({0})")]
    IterationLimit(usize),

    #[error("brute-force tour accepts at most {max} positions, got {got}")]
    TooManyPositions { max: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible { .. })
    }
}
