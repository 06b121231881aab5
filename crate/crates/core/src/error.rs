use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid projective point: all coordinates are zero")]
    InvalidPoint,

    #[error("point lies on the hyperplane at infinity")]
    PointAtInfinity,

    #[error("non-finite coordinate in input")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point is not inside the domain")]
    OutsideDomain,

    #[error("domain parse error: {0}")]
    Parse(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("zero of the 0-th component at |zeta| = {modulus:.3e}, within the boundary band of the unit circle")]
    BoundaryZero { modulus: f64 },

    #[error("pole {pole_modulus:.6} is not inside the unit disc (requires r < |z - w|)")]
    PoleOutsideDisc { pole_modulus: f64 },

    #[error("degenerate disc: {0}")]
    DegenerateDisc(String),

    #[error("the 0-th component vanishes at the origin, so the centre lies at infinity")]
    CentreAtInfinity,

    #[error("invalid disc family: {0}")]
    InvalidFamily(String),

    #[error("gluing failed: {0}")]
    GluingFailure(String),

    #[error("domain is flagged disconnected; the boundary-in-X envelope of J is not the extremal function there (two convex components give min(V_Y, V_Z), which is not plurisubharmonic)")]
    Disconnected,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("missing closed-form oracle: {0}")]
    NoOracle(String),
}
