//! Classification metrics: confusion matrices, precision/recall/F1 reports,
//! average precision, calibration tables and Cohen's kappa.
//!
//! Precision or recall with a zero denominator is defined as 0 and counted
//! in [`EvalReport::zero_division`].

mod agreement;
mod calibration;
mod classification;
mod ranking;

pub use agreement::cohen_kappa;
pub use calibration::{calibration, CalibrationBin, CalibrationTable, DEFAULT_BINS};
pub use classification::{confusion, report, ClassMetrics, ConfusionMatrix, EvalReport};
pub use ranking::{auprc, pr_curve, BinaryScoreSet, PrPoint};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("nothing to evaluate")]
    Empty,
    #[error("average precision needs at least one positive and one negative sample")]
    OneSided,
    #[error("score {0} is not finite")]
    NonFiniteScore(f64),
    #[error("probability {0} lies outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("calibration needs at least 2 bins, got {0}")]
    TooFewBins(usize),
}
