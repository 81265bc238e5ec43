use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The principal logarithm is undefined at rotation angle π (tr(R) = -1).
    #[error("rotation too close to angle pi for the logarithm (trace = {trace})")]
    NearPiSingularity { trace: f64 },

    #[error("matrix is not skew-symmetric (|S + S^T|_F = {residual:e})")]
    NotSkew { residual: f64 },

    #[error("matrix is not a rotation (|R^T R - I| = {residual:e}, det = {det})")]
    NotRotation { residual: f64, det: f64 },

    #[error("vector is not unit length (norm = {norm})")]
    NotUnit { norm: f64 },

    #[error("vector has a non-finite component")]
    NonFinite,

    /// The ascending-direction estimate vanished and cannot be normalized.
    #[error("ascending direction estimate vanished (|L| = {norm:e})")]
    DegenerateDirection { norm: f64 },

    /// The deployment does not span R^3 (rank-deficient covariance).
    #[error("initial deployment is degenerate: lambda_min(P) = {lambda_min:e}, it must be > 0")]
    DegenerateDeployment { lambda_min: f64 },

    #[error("target heading is antipodal to the current desired heading")]
    AntipodalHeading,

    #[error("all agents are collocated (D = 0)")]
    CollocatedSwarm,

    #[error("the swarm is empty")]
    EmptySwarm,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
