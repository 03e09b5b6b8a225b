use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("not tangent: vector leaves the model quadric at the base point (defect {defect:.3e})")]
    NotTangent { defect: f64 },

    #[error("direction is not a unit vector (squared norm {norm_sq})")]
    NotUnit { norm_sq: f64 },

    #[error("point is off the model quadric (relative defect {defect:.3e})")]
    OffQuadric { defect: f64 },

    #[error("expected an ambient vector of length {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("inconsistent space form: {0}")]
    InconsistentSpaceForm(String),

    #[error("degenerate metric at node ({i}, {j}): det g = {det:.3e}")]
    DegenerateMetric { i: usize, j: usize, det: f64 },

    #[error("unknown surface '{0}'")]
    UnknownSurface(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("fields are bound to different grids ({expected:?} vs {found:?})")]
    GridMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("jets of order {required} are needed but the sample carries order {available}")]
    InsufficientOrder { required: usize, available: usize },

    #[error("density '{density}' is outside its domain at node ({i}, {j}): H = {h}, K = {k}")]
    DomainGuard {
        density: String,
        i: usize,
        j: usize,
        h: f64,
        k: f64,
    },

    #[error("surface is not closed; integrating over an open patch needs an explicit override")]
    NotClosed,

    #[error("not critical: Euler-Lagrange residual sup-norm {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NotCritical { residual: f64, tolerance: f64 },

    #[error("orthogonality precondition violated: {0}")]
    NotOrthogonal(String),

    #[error("volume constraint violated: |∫u dS| = {value:.3e} (tolerance {tolerance:.3e})")]
    VolumeConstraint { value: f64, tolerance: f64 },

    #[error("sample is not a round sphere of radius {radius}: {reason}")]
    NotSphere { radius: f64, reason: String },

    #[error("unknown quantity '{0}'")]
    UnknownQuantity(String),

    #[error("{0} requires a Euclidean ambient")]
    NeedsEuclidean(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
