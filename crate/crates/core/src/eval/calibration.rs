use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::EvalError;

pub const DEFAULT_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBin {
    pub lower: f64,
    pub upper: f64,
    pub mean_predicted: f64,
    pub observed_frequency: f64,
    pub count: usize,
}

/// Reliability data over equal-width bins of `[0, 1]`; empty bins omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub nbins: usize,
    pub bins: Vec<CalibrationBin>,
}

/// Bin `i` covers `(i/n, (i+1)/n]`, except bin 0 which also includes 0.
fn bin_of(p: f64, nbins: usize) -> usize {
    (0..nbins)
        .find(|&i| p <= (i + 1) as f64 / nbins as f64)
        .unwrap_or(nbins - 1)
}

pub fn calibration(probs: &[f64], y: &[bool], nbins: usize) -> Result<CalibrationTable, EvalError> {
    if probs.len() != y.len() {
        return Err(EvalError::LengthMismatch(probs.len(), y.len()));
    }
    if nbins < 2 {
        return Err(EvalError::TooFewBins(nbins));
    }
    if let Some(&p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(EvalError::ProbabilityOutOfRange(p));
    }
    let mut sum_p = alloc::vec![0.0; nbins];
    let mut pos = alloc::vec![0usize; nbins];
    let mut count = alloc::vec![0usize; nbins];
    for (&p, &label) in probs.iter().zip(y) {
        let b = bin_of(p, nbins);
        sum_p[b] += p;
        pos[b] += usize::from(label);
        count[b] += 1;
    }
    let bins = (0..nbins)
        .filter(|&b| count[b] > 0)
        .map(|b| CalibrationBin {
            lower: b as f64 / nbins as f64,
            upper: (b + 1) as f64 / nbins as f64,
            mean_predicted: sum_p[b] / count[b] as f64,
            observed_frequency: pos[b] as f64 / count[b] as f64,
            count: count[b],
        })
        .collect();
    Ok(CalibrationTable { nbins, bins })
}
