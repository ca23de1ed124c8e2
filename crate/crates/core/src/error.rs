use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    #[error("invalid number {0:?}")]
    InvalidNumber(String),

    #[error("polytope is empty")]
    Empty,

    #[error("polytope is unbounded")]
    Unbounded,

    #[error("origin is not an interior point of Q (affine dimension {affine_dim}, ambient {dim})")]
    OriginNotInterior { affine_dim: usize, dim: usize },

    #[error("order t={0} is below the initial step t=2: a bilinear objective needs degree-2 multipliers on the linear generators")]
    OrderBelowInitialStep(usize),

    #[error("sigma_0 basis has {size} monomials (limit {limit}); dense Schur complement would need about {schur_rows}^2 doubles")]
    TooLarge { size: usize, limit: usize, schur_rows: usize },

    #[error("vertex-pair budget exceeded: {pairs} pairs (budget {budget})")]
    OracleBudget { pairs: u128, budget: u128 },

    #[error("SDP solver failure: {0}")]
    Solver(String),

    #[error("malformed certificate: {0}")]
    Certificate(String),

    #[error("fingerprint mismatch: certificate {expected}, polytope pair {actual}")]
    FingerprintMismatch { expected: String, actual: String },

    #[error("no evidence supplied")]
    NoEvidence,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
