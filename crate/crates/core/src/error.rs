use thiserror::Error;

/// Every failure the library can report.
///
/// Variants are grouped loosely by the module that raises them, but a single
/// enum keeps `?` usable across module boundaries.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("matrix is singular (min eigenvalue {0:.3e})")]
    Singular(f64),

    #[error("state is rank deficient (min eigenvalue {0:.3e})")]
    RankDeficient(f64),

    #[error("RLD Fisher matrix is not invertible (min eigenvalue {0:.3e})")]
    SingularRld(f64),

    #[error("model is not D-invariant (residual {0:.3e})")]
    NotDInvariant(f64),

    #[error("Bloch vector length {0} is too close to a pure state")]
    PurityGuard(f64),

    #[error("state spectrum is degenerate (min gap {0:.3e})")]
    DegenerateSpectrum(f64),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("parameter index {index} out of range for {count} parameters")]
    BadIndex { index: usize, count: usize },

    #[error("vector is not a unit vector (norm {0})")]
    NotUnit(f64),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("mixture weights are not a probability vector: {0}")]
    BadWeights(String),

    #[error("outcome {outcome} has probability {prob:.3e} but a nonzero derivative")]
    ZeroProbabilityOutcome { outcome: usize, prob: f64 },

    #[error("target Fisher matrix does not saturate Tr F H^-1 = 1 (got {0})")]
    NotSaturating(f64),

    #[error("cost matrix is not strictly positive (min eigenvalue {0:.3e})")]
    SingularCost(f64),

    #[error("invalid grid: {0}")]
    BadGrid(String),

    #[error("grid is empty")]
    EmptyGrid,

    #[error("bound is not positive anywhere on the cost grid")]
    Infeasible,

    #[error("outcome probabilities do not form a distribution: {0}")]
    BadDistribution(String),

    #[error("Fisher information of the measurement is singular (min eigenvalue {0:.3e})")]
    SingularFisher(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed document: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by malformed input rather than by numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::InvalidConfig(_)
                | Error::InvalidModel(_)
                | Error::InvalidPovm(_)
                | Error::BadWeights(_)
                | Error::BadGrid(_)
                | Error::EmptyGrid
                | Error::BadIndex { .. }
                | Error::NotUnit(_)
                | Error::DimensionMismatch { .. }
                | Error::NotSquare { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
