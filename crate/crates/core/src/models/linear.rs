use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::features::SparseVector;
use crate::label::ClassLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    MultinomialLogistic,
    LinearSvmOvr,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::MultinomialLogistic => "multinomial_logistic",
            ModelKind::LinearSvmOvr => "linear_svm_ovr",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub folds: usize,
    pub c_grid: Vec<f64>,
    /// Mean validation macro F1 for each grid value, aligned with `c_grid`.
    pub cv_scores: Vec<f64>,
    pub converged: bool,
    pub epochs: usize,
    pub final_grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("{0} models do not produce probabilities")]
    NotProbabilistic(ModelKind),
    #[error("model shape is inconsistent: {0}")]
    Shape(String),
    #[error("model parameters must be finite")]
    NonFinite,
}

/// Per-class weight rows plus biases, in canonical class order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifier {
    pub kind: ModelKind,
    pub classes: Vec<ClassLabel>,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub chosen_c: f64,
    pub training_meta: TrainingMeta,
}

/// Softmax output aligned with the model's class list.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityDistribution {
    pub classes: Vec<ClassLabel>,
    pub probs: Vec<f64>,
}

impl ProbabilityDistribution {
    pub fn get(&self, label: ClassLabel) -> f64 {
        self.classes
            .iter()
            .position(|&c| c == label)
            .map(|i| self.probs[i])
            .unwrap_or(0.0)
    }

    /// Highest-probability class; ties resolve to the earlier class.
    pub fn argmax(&self) -> (ClassLabel, f64) {
        let i = argmax(&self.probs);
        (self.classes[i], self.probs[i])
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|&s| libm::exp(s - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

impl LinearClassifier {
    pub fn num_features(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let k = self.classes.len();
        if k == 0 || self.weights.len() != k || self.bias.len() != k {
            return Err(ModelError::Shape(alloc::format!(
                "{} classes, {} weight rows, {} biases",
                k,
                self.weights.len(),
                self.bias.len()
            )));
        }
        let d = self.num_features();
        if self.weights.iter().any(|r| r.len() != d) {
            return Err(ModelError::Shape(String::from("weight rows differ in length")));
        }
        if self.classes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ModelError::Shape(String::from(
                "classes must be in canonical order without repeats",
            )));
        }
        let finite = self.weights.iter().flatten().chain(&self.bias).all(|v| v.is_finite());
        if !finite || !self.chosen_c.is_finite() {
            return Err(ModelError::NonFinite);
        }
        Ok(())
    }

    /// Raw per-class scores `w_c · x + b_c`.
    pub fn decision_scores(&self, x: &SparseVector) -> Vec<f64> {
        self.weights.iter().zip(&self.bias).map(|(w, b)| x.dot(w) + b).collect()
    }

    pub fn predict_proba(&self, x: &SparseVector) -> Result<ProbabilityDistribution, ModelError> {
        if self.kind != ModelKind::MultinomialLogistic {
            return Err(ModelError::NotProbabilistic(self.kind));
        }
        Ok(ProbabilityDistribution {
            classes: self.classes.clone(),
            probs: softmax(&self.decision_scores(x)),
        })
    }

    /// Argmax of the decision scores; ties go to the earlier class.
    pub fn predict(&self, x: &SparseVector) -> ClassLabel {
        self.classes[argmax(&self.decision_scores(x))]
    }

    pub fn class_position(&self, label: ClassLabel) -> Option<usize> {
        self.classes.iter().position(|&c| c == label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn model(weights: Vec<Vec<f64>>, bias: Vec<f64>, kind: ModelKind) -> LinearClassifier {
        LinearClassifier {
            kind,
            classes: ClassLabel::ALL[..weights.len()].to_vec(),
            weights,
            bias,
            chosen_c: 1.0,
            training_meta: TrainingMeta {
                seed: 0,
                folds: 5,
                c_grid: vec![1.0],
                cv_scores: vec![0.0],
                converged: true,
                epochs: 0,
                final_grad_norm: 0.0,
            },
        }
    }

    #[test]
    fn zero_model_is_uniform() {
        let m = model(vec![vec![0.0; 3]; 10], vec![0.0; 10], ModelKind::MultinomialLogistic);
        let p = m.predict_proba(&SparseVector::from_pairs(vec![(1, 0.5)])).unwrap();
        for &v in &p.probs {
            assert!((v - 0.1).abs() < 1e-15);
        }
        assert_eq!(m.predict(&SparseVector::default()), ClassLabel::AgeCb);
    }

    #[test]
    fn closed_form_softmax() {
        let mut bias = vec![0.0; 10];
        bias[0] = 1.0;
        let m = model(vec![vec![0.0; 1]; 10], bias, ModelKind::MultinomialLogistic);
        let p = m.predict_proba(&SparseVector::default()).unwrap();
        let e = core::f64::consts::E;
        assert!((p.probs[0] - e / (e + 9.0)).abs() < 1e-15);
        assert!((p.probs[0] - 0.2320).abs() < 1e-4);
        assert!((p.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn svm_has_no_probabilities_and_ties_go_first() {
        let m = model(vec![vec![1.0], vec![1.0]], vec![0.0, 0.0], ModelKind::LinearSvmOvr);
        assert_eq!(
            m.predict_proba(&SparseVector::default()),
            Err(ModelError::NotProbabilistic(ModelKind::LinearSvmOvr))
        );
        assert_eq!(m.predict(&SparseVector::from_pairs(vec![(0, 1.0)])), ClassLabel::AgeCb);
    }

    #[test]
    fn validate_catches_bad_shapes() {
        let mut m = model(vec![vec![1.0], vec![1.0]], vec![0.0], ModelKind::LinearSvmOvr);
        assert!(matches!(m.validate(), Err(ModelError::Shape(_))));
        m.bias.push(f64::NAN);
        assert_eq!(m.validate(), Err(ModelError::NonFinite));
    }
}
