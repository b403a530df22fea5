use thiserror::Error;

/// Errors surfaced by the exact-geometry and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point is not in the set")]
    PointNotInSet,

    #[error("vector is not in the normal cone at the given point")]
    NotNormal,

    #[error("set is empty")]
    EmptySet,

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("matrix is not positive semidefinite")]
    NotPsd,

    #[error("basis vectors are linearly dependent")]
    DependentBasis,

    #[error("point is outside the function domain")]
    OutsideDomain,

    #[error("given vector is not a subgradient at the given point")]
    NotSubgradient,

    #[error("first-order qualification condition fails")]
    QcViolation,

    #[error("Jacobian does not have full row rank")]
    RankDeficient,

    #[error("face enumeration budget exceeded: needs {needed} subsets, cap is {cap} (set SO2_MAX_FACES)")]
    FaceBudget { needed: u128, cap: u128 },

    #[error("unsupported function class: {0}")]
    Unsupported(String),

    #[error("infeasible linear system")]
    Infeasible,

    #[error("parse error at {at}: {msg}")]
    Parse { at: String, msg: String },
}

impl Error {
    pub fn parse(at: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse {
            at: at.into(),
            msg: msg.into(),
        }
    }
}
