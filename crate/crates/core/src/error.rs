use thiserror::Error;

use crate::solver::SolverReport;

pub type Result<T> = std::result::Result<T, WalrasError>;

#[derive(Debug, Error)]
pub enum WalrasError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Consumer or economy data violates a construction invariant.
    #[error("invalid economy: {0}")]
    InvalidEconomy(String),

    /// Excess demand evaluated to NaN or an infinity.
    #[error("non-finite excess demand at price {price:?}")]
    Numeric { price: Vec<f64> },

    /// The fixed-point iteration produced a non-finite iterate.
    #[error("non-finite iterate at iteration {iteration}")]
    NonFiniteIterate {
        iteration: usize,
        /// The last few finite iterates before the failure.
        tail: Vec<Vec<f64>>,
    },

    /// Every epsilon round ended with a candidate on the boundary of the
    /// trimmed simplex, or with sampled low-excess-demand prices outside it.
    #[error("boundary-trapped after {} epsilon rounds (last epsilon {:e})", .report.epsilon_rounds, .report.epsilon_final)]
    BoundaryTrapped { report: Box<SolverReport> },

    #[error("oracle refused: {0}")]
    Refused(String),

    #[error("oracle did not converge within {iterations} iterations")]
    OracleNonConvergence { iterations: usize },
}
