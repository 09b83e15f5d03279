//! Error type shared by all modules.

/// Failures surfaced by model construction, estimation, and bound
/// computation.
///
/// Estimator errors are per-trial events: the Monte-Carlo engine counts
/// them and excludes the affected trial from the metrics instead of
/// aborting a sweep.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Fewer anchors than the estimator's rank condition requires.
    #[error("need at least {need} anchors, got {have}")]
    InsufficientAnchors { need: usize, have: usize },

    /// Fewer sensors than the operation requires.
    #[error("need at least {need} sensors, got {have}")]
    InsufficientSensors { need: usize, have: usize },

    /// A squared-range measurement at the reference sensor is too small
    /// (or negative) to estimate the noise covariance from.
    #[error(
        "degenerate measurement: squared range d[{anchor},{sensor}] = {value} \
         is not positive; cannot whiten"
    )]
    DegenerateMeasurement {
        anchor: usize,
        sensor: usize,
        value: f64,
    },

    /// A design matrix lost rank; the offending smallest singular value is
    /// reported.
    #[error("{what} is rank deficient (smallest singular value {sigma_min:.3e})")]
    RankDeficient { what: &'static str, sigma_min: f64 },

    /// Orthogonal Procrustes product is singular, so the rotation is not
    /// unique.
    #[error(
        "orthogonal Procrustes product is singular (smallest singular value \
         {sigma_min:.3e}); rotation estimate is not unique"
    )]
    NonUniqueRotation { sigma_min: f64 },

    /// Nearest-orthogonal projection of a singular matrix is not unique.
    #[error("cannot project a singular matrix onto the rotation manifold")]
    SingularProjection,

    /// Requested an isometry basis for the null-space complement of a zero
    /// vector.
    #[error("cannot build an isometry basis orthogonal to the zero vector")]
    ZeroVector,

    /// A matrix that must be a rotation (orthonormal columns) is not.
    #[error("matrix is not orthonormal (||QᵀQ - I||_F = {defect:.3e})")]
    NotOrthonormal { defect: f64 },

    /// The reduced Fisher information matrix is singular: the configuration
    /// is unidentifiable and no finite bound exists.
    #[error("reduced Fisher information is singular; configuration is unidentifiable")]
    UnidentifiableConfiguration,

    /// A experiment or scenario configuration value is invalid.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An Euler axis-order tag that is not one of the six proper orders.
    #[error("unknown Euler axis order `{0}` (expected one of xyz, xzy, yxz, yzx, zxy, zyx)")]
    UnknownEulerOrder(String),

    /// Matrix dimensions that do not match the documented shapes.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}
