use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Scores for one target class with the matching ground truth.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BinaryScoreSet {
    pairs: Vec<(f64, bool)>,
}

impl BinaryScoreSet {
    pub fn new(pairs: Vec<(f64, bool)>) -> Result<Self, EvalError> {
        if let Some(&(s, _)) = pairs.iter().find(|(s, _)| !s.is_finite()) {
            return Err(EvalError::NonFiniteScore(s));
        }
        Ok(BinaryScoreSet { pairs })
    }

    pub fn pairs(&self) -> &[(f64, bool)] {
        &self.pairs
    }
}

/// One operating point: everything scoring at least `threshold` is positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Precision and recall at each distinct score, from the highest down.
pub fn pr_curve(s: &BinaryScoreSet) -> Result<Vec<PrPoint>, EvalError> {
    let positives = s.pairs.iter().filter(|p| p.1).count();
    if positives == 0 || positives == s.pairs.len() {
        return Err(EvalError::OneSided);
    }
    let mut sorted = s.pairs.clone();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == threshold {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(PrPoint {
            threshold,
            precision: tp as f64 / (tp + fp) as f64,
            recall: tp as f64 / positives as f64,
        });
    }
    Ok(points)
}

/// Average precision with step interpolation: `Σ (R_n − R_{n−1}) · P_n`
/// over distinct thresholds. Tied scores form a single threshold.
pub fn auprc(s: &BinaryScoreSet) -> Result<f64, EvalError> {
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    for p in pr_curve(s)? {
        ap += (p.recall - prev_recall) * p.precision;
        prev_recall = p.recall;
    }
    Ok(ap)
}
