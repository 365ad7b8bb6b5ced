use thiserror::Error;

/// Errors surfaced by the stabilization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("grid of {grid} points is too coarse for cutoff {cutoff} (need at least {min})")]
    GridTooCoarse { grid: usize, cutoff: usize, min: usize },

    #[error("defective eigenvalue pair at sigma = {sigma}: discriminant {disc:.3e} below tolerance")]
    DefectivePair { sigma: f64, disc: f64 },

    #[error("shift -nu = {nu_neg} lies within {tol:.1e} of Re mu = {re_mu} (mode {mode})")]
    ShiftOnEigenvalue { nu_neg: f64, re_mu: f64, mode: usize, tol: f64 },

    #[error("Hautus check failed for {} mode(s); smallest margin {min_margin:.3e} < {threshold:.3e}", offenders.len())]
    HautusFail { offenders: Vec<usize>, min_margin: f64, threshold: f64 },

    #[error("no stabilizing Riccati solution: {0}")]
    NoStabilizingSolution(String),

    #[error("ill-conditioned invariant subspace basis (condition estimate {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {last_residual:.3e})")]
    NoConvergence { iterations: usize, last_residual: f64 },

    #[error("solution norm {norm:.3e} exceeded blow-up guard {guard:.3e} at t = {t}")]
    BlowUp { t: f64, norm: f64, guard: f64 },

    #[error("degenerate decay fit: {0}")]
    DegenerateFit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("linear algebra backend error: {0}")]
    Linalg(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("TOML error: {0}")]
    Toml(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
