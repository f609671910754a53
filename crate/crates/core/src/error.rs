use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("mesh topology error: {0}")]
    Topology(String),
    #[error("mesh i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum FeError {
    #[error("velocity does not vanish on the boundary: |u({x}, {y})| = {magnitude:e}")]
    BoundaryViolation { x: f64, y: f64, magnitude: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ill-conditioned BDM1 moment matrix on triangle {triangle} (rcond {rcond:e})")]
    IllConditioned { triangle: usize, rcond: f64 },
    #[error("nonpositive density {value:e} on triangle {triangle} where the potential needs rho > 0")]
    NonPositiveDensity { triangle: usize, value: f64 },
    #[error("negative density {value:e} at index {index}")]
    NegativeDensity { index: usize, value: f64 },
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("momentum matrix is not positive definite (check lambda > -2 mu)")]
    NotPositiveDefinite,
    #[error("invariant violated at iteration {iteration}: {msg}")]
    Invariant { iteration: usize, msg: String },
    #[error(transparent)]
    Fe(#[from] FeError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("empty convergence table")]
    EmptyTable,
    #[error("table i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed table: {0}")]
    Parse(String),
}
