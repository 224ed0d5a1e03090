use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("jacobi svd did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("rank deficient: |r_{col}{col}| = {value:e} below threshold")]
    RankDeficient { col: usize, value: f64 },
    #[error("pivot {value:e} at step {step} is numerically zero")]
    ZeroPivot { step: usize, value: f64 },
    #[error("{0} is numerically singular")]
    Singular(&'static str),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("ill conditioned: estimated condition number {0:e}")]
    IllConditioned(f64),
    #[error("iterative refinement diverged at step {0}")]
    Diverged(usize),
    #[error("no convergence after {0} iterations")]
    MaxIter(usize),
    #[error("iteration stagnated at step {0}")]
    Stagnation(usize),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
