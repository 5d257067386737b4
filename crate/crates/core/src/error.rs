use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An evaluator returned a non-finite value.
    #[error("non-finite {quantity} at x = {x:?}, y = {y:?}")]
    Evaluation {
        quantity: &'static str,
        x: Vec<f64>,
        y: Vec<f64>,
    },

    /// The metric block `aa^T + zz^T` is not positive definite (z1 = 0).
    #[error("metric block is singular for z1 = {z1}, z2 = {z2}")]
    SingularMetric { z1: f64, z2: f64 },

    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// A density field with negative entries was passed to a functional.
    #[error("density has a negative entry {value:e} at cell ({i}, {j})")]
    NegativeDensity { i: usize, j: usize, value: f64 },

    #[error("numerical instability in {substep} at t = {t}: {detail}")]
    Instability {
        substep: &'static str,
        t: f64,
        detail: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
