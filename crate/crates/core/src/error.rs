use thiserror::Error;

/// Every failure the library can report.
///
/// Variants raised by the reconstruction pipeline name the structural
/// property of the oracle that was found to be violated.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension {0}")]
    InvalidDimension(usize),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("trace is not one (got {re} + {im}i)")]
    TraceNotOne { re: f64, im: f64 },

    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),

    #[error("Jacobi iteration did not converge within {sweeps} sweeps (off-diagonal {off:e})")]
    ConvergenceFailure { sweeps: usize, off: f64 },

    #[error("Bloch vector outside the unit ball (norm {0})")]
    OutsideBall(f64),

    #[error("no acceptable sample after {attempts} attempts")]
    ResampleBudgetExceeded { attempts: usize },

    #[error("matrix is numerically singular (singular value ratio {0:e})")]
    NumericallySingular(f64),

    #[error("denominator is not positive ({0:e})")]
    DenominatorNonpositive(f64),

    #[error("segment endpoints coincide")]
    DegenerateSegment,

    #[error("oracle returned dimension {found}, expected {expected}")]
    OracleDimensionMismatch { expected: usize, found: usize },

    #[error("bisection failed for target s = {target} on pair {pair}")]
    BisectionFailure { pair: usize, target: f64 },

    #[error("map is not normalized at the maximally mixed state (deviation {0:e})")]
    MapNotNormalized(f64),

    #[error("image of the maximally mixed state is singular (min eigenvalue {0:e}); the map cannot be bijective")]
    ImageSingular(f64),

    #[error("normalization failed (deviation {0:e})")]
    NormalizationFailed(f64),

    #[error("image of basis projection {index} is not pure (purity {purity})")]
    ImageNotPure { index: usize, purity: f64 },

    #[error("images of an orthogonal frame are not orthogonal (deviation {0:e})")]
    FrameNotOrthogonal(f64),

    #[error("relative phase of column {index} is ambiguous (off-diagonal magnitude {magnitude:e})")]
    PhaseAmbiguous { index: usize, magnitude: f64 },

    #[error("transpose branch is inconsistent (column {index}, margin {margin:e})")]
    BranchInconsistent { index: usize, margin: f64 },

    #[error("oracle is not a measurement map at the tested points (residual {0:e})")]
    VerificationFailed(f64),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("linear system is rank deficient (second singular value ratio {0:e})")]
    RankDeficient(f64),

    #[error("restricted images leave the expected subspace (leak {0:e})")]
    RestrictionNotInvariant(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
