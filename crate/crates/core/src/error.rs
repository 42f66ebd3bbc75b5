use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("profile is not 2π-periodic: |f(0) - f(2π)| = {0:e}")]
    NonPeriodic(f64),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("degenerate profile: consecutive duplicate knots at x1 = {0}")]
    DuplicateKnot(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("truncation order N = {n} does not cover propagating order {needed}")]
    TruncationTooSmall { n: usize, needed: i64 },
    #[error("mesh has no edges on the artificial boundary")]
    EmptyTrace,
    #[error("height {0} lies outside the mesh")]
    HeightOutsideMesh(f64),
    #[error("field and mesh do not match: {0}")]
    Mismatch(String),
    #[error("singular factorization (Wood anomaly or resonance suspected)")]
    Singular,
    #[error("solver residual {0:e} exceeds tolerance")]
    Residual(f64),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;
