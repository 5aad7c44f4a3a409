use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("node index {index} out of range for mesh with {nodes} nodes")]
    NodeOutOfRange { index: usize, nodes: usize },

    #[error("dof index {index} out of range ({total} dofs)")]
    DofOutOfRange { index: usize, total: usize },

    #[error("point x = {x} lies outside the domain [{lo}, {hi}]")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },

    #[error("invalid enrichment: {0}")]
    InvalidEnrichment(String),

    #[error("invalid quadrature request: {0}")]
    InvalidQuadrature(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("boundary conflict: {0}")]
    BoundaryConflict(String),

    #[error("zero diagonal entry at row {row}; diagonal scaling is undefined")]
    ZeroDiagonal { row: usize },

    #[error("matrix is numerically singular (zero pivot at row {row})")]
    SingularMatrix { row: usize },

    #[error("iterative refinement did not converge after {iterations} refinements (ratio {ratio:e})")]
    RefinementNotConverged {
        iterations: usize,
        ratio: f64,
        last_iterate: Vec<f64>,
    },

    #[error("Newton iteration did not converge in {iterations} iterations (last correction {last_correction:e})")]
    NewtonNotConverged {
        iterations: usize,
        last_correction: f64,
    },

    #[error("time step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("Fourier series did not converge within {terms} terms at (x = {x}, t = {t}); the series converges slowly for small viscosity and time, use a fine-grid reference instead")]
    SeriesNotConverged { terms: usize, x: f64, t: f64 },

    #[error("Fourier series at (x = {x}, t = {t}) cancels to a relative precision of {precision:e}; use a fine-grid reference instead")]
    SeriesIllConditioned { x: f64, t: f64, precision: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("root finding failed: {0}")]
    RootNotFound(String),

    #[error("no snapshot recorded at t = {0}")]
    MissingSnapshot(f64),

    #[error("reference norm is zero; relative error is undefined")]
    ZeroReferenceNorm,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
