use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("port {port} appears more than once (bunched detection is not modelled)")]
    DuplicatePort { port: usize },
    #[error("port index {index} out of range for {modes} ports")]
    OutOfRange { index: usize, modes: usize },
    #[error("bandwidth must be strictly positive, got {0}")]
    NonPositiveBandwidth(f64),
    #[error("spectral amplitude not normalized: integral of |xi|^2 = {norm}")]
    NotNormalized { norm: f64 },
    #[error("invalid spectral grid: {0}")]
    InvalidGrid(String),
    #[error("jones vector has zero norm")]
    ZeroJones,
    #[error("quadrature did not reach relative tolerance {tol:e} (last estimate {estimate:e}, change {change:e})")]
    QuadratureFailure {
        tol: f64,
        estimate: f64,
        change: f64,
    },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not unitary: max |U^dag U - I| = {deviation:e} exceeds {tol:e}")]
    NotUnitary { deviation: f64, tol: f64 },
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("{what} of size {size} exceeds the limit {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("grid has {nodes} nodes, limit is {limit}")]
    GridTooFine { nodes: usize, limit: usize },
    #[error("no event accepted after {0} proposals")]
    RejectionBudgetExceeded(u64),
    #[error("collision-free detection mass is {0:e}; every output event is bunched")]
    ZeroCollisionFreeMass(f64),
    #[error("rate {rate:e} exceeds its rejection envelope {envelope:e}")]
    EnvelopeViolation { rate: f64, envelope: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad input rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::QuadratureFailure { .. }
                | Error::RejectionBudgetExceeded(_)
                | Error::EnvelopeViolation { .. }
                | Error::ZeroCollisionFreeMass(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
