use thiserror::Error;

/// Every failure the engine can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Weyl eigenvalues are not traceless (sum = {sum:e})")]
    NonTraceless { sum: f64 },
    #[error("lambda must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("plane factors must be unit vectors (|h| = {h}, |k| = {k})")]
    NonUnitPlane { h: f64, k: f64 },
    #[error("delta must lie in (0, 1], got {0}")]
    BadDelta(f64),
    #[error("delta must lie in (0, 1) for this polytope, got {0}")]
    DegenerateDelta(f64),
    #[error("vertex set {0:?} is not a face of the polytope")]
    NotAFace(Vec<usize>),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("predicate has the same value at both ends of [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("eta must lie in [-1, 1], got {0}")]
    EtaOutOfRange(f64),
    #[error("delta = {delta} is outside the domain of the {curve} curve")]
    OutOfDomain { curve: &'static str, delta: f64 },
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("admissible region is empty")]
    EmptyRegion,
    #[error("entries must be nonnegative")]
    NegativeEntry,
    #[error("entries must be sorted ascending")]
    NotSorted,
    #[error("sampler stuck: {accepted} accepted out of {proposed} proposals")]
    StuckSampler { accepted: u64, proposed: u64 },
    #[error("lattice with {0} points exceeds the limit")]
    ResolutionTooLarge(u128),
}

pub type Result<T> = std::result::Result<T, Error>;
