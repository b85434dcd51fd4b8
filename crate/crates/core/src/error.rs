use thiserror::Error;

/// Errors produced by validation, synthesis, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("chain size must be at least 1")]
    EmptyChain,

    #[error("expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("profile length {0} is odd; site profiles cover 2N sites")]
    OddLength(usize),

    #[error("coupling J_{index} = {value} must be positive")]
    NonPositiveCoupling { index: usize, value: f64 },

    #[error("site {site} out of range 1..={max}")]
    SiteOutOfRange { site: usize, max: usize },

    #[error("entry {index} is negative: {value}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("entries sum to {sum}, expected 1 within {tol}")]
    NotNormalized { sum: f64, tol: f64 },

    #[error("virtual pair {pair}: plus-branch weight {plus} smaller than minus-branch weight {minus}")]
    PairOrdering { pair: usize, plus: f64, minus: f64 },

    #[error(
        "interior pair at sites ({even_site}, {even_site}+1) has P_even = {even} < P_odd = {odd}; \
         the pulse cascade puts the constructive combination on the even site, so only the \
         swapped pair is generable"
    )]
    PairNotGenerable { even_site: usize, even: f64, odd: f64 },

    #[error("state norm² = {norm_sq}, expected 1 within {tol}")]
    StateNotNormalized { norm_sq: f64, tol: f64 },

    #[error("reference coupling must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("chain {chain}: probability ratio {value} outside [0, 1] beyond tolerance")]
    RatioOutOfRange { chain: usize, value: f64 },

    #[error("final departure angle {theta:.3e} should vanish; profile inconsistent")]
    InconsistentTail { theta: f64 },

    #[error("eigensolver failed to converge on a {dim}x{dim} matrix")]
    EigenFailure { dim: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("site {site}: |target| = {target:.6e} but |generated| = {generated:.6e}")]
    MagnitudeMismatch { site: usize, target: f64, generated: f64 },

    #[error("interval t_{index} = {value} must stay positive under perturbation")]
    NonPositiveInterval { index: usize, value: f64 },

    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),

    #[error("fidelity level must lie in (0, 1), got {0}")]
    InvalidFidelityLevel(f64),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("schedule schema version {found} unsupported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
