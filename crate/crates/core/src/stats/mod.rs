//! Benchmarking statistics of metric predictions against opinion scores.

pub mod aggregate;
pub mod correlation;
pub mod criteria;
pub mod logistic;
pub mod mos;
pub mod rank;
pub mod significance;

use thiserror::Error;

pub use aggregate::{rank_aggregate, RankRow, RankSums};
pub use correlation::{krcc, pcc, srocc};
pub use criteria::{evaluate_metric, outlier_ratio, rmse_fitted, CriteriaRow, Display, Evaluation, MosRecord};
pub use logistic::{fit_logistic4, LogisticFit};
pub use mos::{load_mos, read_mos, write_mos};
pub use significance::{significance_matrix, ResidualSet, SignificanceMatrix, TTest};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("ranks are degenerate (constant input)")]
    DegenerateRanks,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("stimulus sets differ: {0}")]
    StimulusMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, StatsError>;
