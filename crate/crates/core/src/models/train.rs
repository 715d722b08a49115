use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::linear::{LinearClassifier, ModelKind, TrainingMeta};
use super::objective::{minimize, Objective, OptimizerOptions, ScoreLoss};
use crate::eval::{confusion, report};
use crate::features::SparseVector;
use crate::label::{ClassLabel, NUM_CLASSES};
use crate::rng::{stream, tag};

pub const LOGREG_C_GRID: [f64; 3] = [0.1, 1.0, 10.0];
pub const SVM_C_GRID: [f64; 4] = [0.01, 0.1, 1.0, 10.0];

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub c_grid: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    pub optimizer: OptimizerOptions,
}

impl TrainConfig {
    pub fn logreg(seed: u64) -> Self {
        TrainConfig {
            c_grid: LOGREG_C_GRID.to_vec(),
            folds: 5,
            seed,
            optimizer: OptimizerOptions::default(),
        }
    }

    pub fn svm(seed: u64) -> Self {
        TrainConfig {
            c_grid: SVM_C_GRID.to_vec(),
            ..Self::logreg(seed)
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("{features} feature vectors but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("{samples} samples cannot be split into {folds} folds")]
    TooFewSamples { samples: usize, folds: usize },
    #[error("training part of fold {fold} has no {class} samples")]
    FoldMissingClass { fold: usize, class: ClassLabel },
    #[error("training data must contain at least two classes")]
    SingleClass,
    #[error("regularization grid must be non-empty with positive finite values")]
    BadGrid,
    #[error("feature index {index} is outside the declared dimension {dim}")]
    FeatureOutOfRange { index: usize, dim: usize },
    #[error("loss became non-finite during training")]
    NonFiniteLoss,
}

fn classes_of(y: &[ClassLabel]) -> Vec<ClassLabel> {
    let mut present = [false; NUM_CLASSES];
    for l in y {
        present[l.index()] = true;
    }
    ClassLabel::ALL.iter().copied().filter(|c| present[c.index()]).collect()
}

fn check_inputs(x: &[SparseVector], y: &[ClassLabel], dim: usize) -> Result<Vec<ClassLabel>, TrainError> {
    if x.len() != y.len() {
        return Err(TrainError::LengthMismatch {
            features: x.len(),
            labels: y.len(),
        });
    }
    for v in x {
        if let Some(&(index, _)) = v.entries().last() {
            if index >= dim {
                return Err(TrainError::FeatureOutOfRange { index, dim });
            }
        }
    }
    let classes = classes_of(y);
    if classes.len() < 2 {
        return Err(TrainError::SingleClass);
    }
    Ok(classes)
}

/// Fits one model at a fixed regularization strength on all of `x`.
pub fn fit_fixed_c(
    kind: ModelKind,
    x: &[SparseVector],
    y: &[ClassLabel],
    dim: usize,
    c: f64,
    opts: &OptimizerOptions,
) -> Result<LinearClassifier, TrainError> {
    let classes = check_inputs(x, y, dim)?;
    if !(c.is_finite() && c > 0.0) {
        return Err(TrainError::BadGrid);
    }
    let k = classes.len();
    let mut weights = Vec::with_capacity(k);
    let mut bias = Vec::with_capacity(k);
    let (converged, epochs, grad_norm) = match kind {
        ModelKind::MultinomialLogistic => {
            let targets: Vec<usize> = y
                .iter()
                .map(|l| classes.iter().position(|c| c == l).expect("class list built from y"))
                .collect();
            let obj = Objective::new(x, &targets, dim, k, ScoreLoss::Softmax, c);
            let fit = minimize(&obj, alloc::vec![0.0; obj.num_params()], opts);
            if fit.losses.iter().any(|l| !l.is_finite()) {
                return Err(TrainError::NonFiniteLoss);
            }
            let (w, b) = fit.params.split_at(k * dim);
            weights.extend(w.chunks(dim.max(1)).take(k).map(<[f64]>::to_vec));
            weights.resize(k, alloc::vec![0.0; dim]);
            bias.extend_from_slice(b);
            (fit.converged, fit.epochs, fit.grad_norm)
        }
        ModelKind::LinearSvmOvr => {
            let mut all_converged = true;
            let mut max_epochs = 0;
            let mut worst = 0.0f64;
            for class in &classes {
                let targets: Vec<usize> = y.iter().map(|l| usize::from(l == class)).collect();
                let obj = Objective::new(x, &targets, dim, 1, ScoreLoss::SquaredHinge, c);
                let fit = minimize(&obj, alloc::vec![0.0; obj.num_params()], opts);
                if fit.losses.iter().any(|l| !l.is_finite()) {
                    return Err(TrainError::NonFiniteLoss);
                }
                weights.push(fit.params[..dim].to_vec());
                bias.push(fit.params[dim]);
                all_converged &= fit.converged;
                max_epochs = max_epochs.max(fit.epochs);
                worst = worst.max(fit.grad_norm);
            }
            (all_converged, max_epochs, worst)
        }
    };
    Ok(LinearClassifier {
        kind,
        classes,
        weights,
        bias,
        chosen_c: c,
        training_meta: TrainingMeta {
            seed: 0,
            folds: 0,
            c_grid: alloc::vec![c],
            cv_scores: Vec::new(),
            converged,
            epochs,
            final_grad_norm: grad_norm,
        },
    })
}

/// Stratified fold index for every sample.
///
/// Each class is shuffled with a stream derived from `(seed, class)` and
/// dealt round-robin; the dealing position carries over between classes so
/// fold sizes stay within one of each other.
pub fn stratified_folds(y: &[ClassLabel], folds: usize, seed: u64) -> Vec<usize> {
    let mut assignment = alloc::vec![0usize; y.len()];
    let mut next = 0usize;
    for class in ClassLabel::ALL {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if members.is_empty() {
            continue;
        }
        members.shuffle(&mut stream(seed, &[tag::FOLDS, class.index() as u64]));
        for i in members {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    assignment
}

/// Mean validation macro F1 (over the classes present in `y`) for each
/// grid value.
pub fn cross_validate(
    kind: ModelKind,
    x: &[SparseVector],
    y: &[ClassLabel],
    dim: usize,
    config: &TrainConfig,
) -> Result<Vec<f64>, TrainError> {
    let classes = check_inputs(x, y, dim)?;
    if config.c_grid.is_empty() || config.c_grid.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(TrainError::BadGrid);
    }
    if config.folds < 2 || x.len() < config.folds {
        return Err(TrainError::TooFewSamples {
            samples: x.len(),
            folds: config.folds,
        });
    }
    let assignment = stratified_folds(y, config.folds, config.seed);
    for fold in 0..config.folds {
        for &class in &classes {
            let present = y.iter().zip(&assignment).any(|(&l, &f)| l == class && f != fold);
            if !present {
                return Err(TrainError::FoldMissingClass { fold, class });
            }
        }
    }
    let mut scores = Vec::with_capacity(config.c_grid.len());
    for &c in &config.c_grid {
        let mut total = 0.0;
        for fold in 0..config.folds {
            let (mut xt, mut yt, mut xv, mut yv) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for i in 0..x.len() {
                if assignment[i] == fold {
                    xv.push(x[i].clone());
                    yv.push(y[i]);
                } else {
                    xt.push(x[i].clone());
                    yt.push(y[i]);
                }
            }
            let model = fit_fixed_c(kind, &xt, &yt, dim, c, &config.optimizer)?;
            let pred: Vec<ClassLabel> = xv.iter().map(|v| model.predict(v)).collect();
            let cm = confusion(&yv, &pred).expect("equal lengths");
            total += report(&cm).map(|r| r.macro_f1_over(&classes)).unwrap_or(0.0);
        }
        scores.push(total / config.folds as f64);
    }
    Ok(scores)
}

/// Index of the best score; ties go to the larger C.
fn select(grid: &[f64], scores: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..grid.len() {
        if scores[i] > scores[best] || (scores[i] == scores[best] && grid[i] > grid[best]) {
            best = i;
        }
    }
    best
}

fn train(
    kind: ModelKind,
    x: &[SparseVector],
    y: &[ClassLabel],
    dim: usize,
    config: &TrainConfig,
) -> Result<LinearClassifier, TrainError> {
    let cv_scores = cross_validate(kind, x, y, dim, config)?;
    let best = select(&config.c_grid, &cv_scores);
    let mut model = fit_fixed_c(kind, x, y, dim, config.c_grid[best], &config.optimizer)?;
    model.training_meta.seed = config.seed;
    model.training_meta.folds = config.folds;
    model.training_meta.c_grid = config.c_grid.clone();
    model.training_meta.cv_scores = cv_scores;
    Ok(model)
}

/// Multinomial logistic regression with C picked by stratified k-fold CV.
pub fn train_logreg(
    x: &[SparseVector],
    y: &[ClassLabel],
    dim: usize,
    config: &TrainConfig,
) -> Result<LinearClassifier, TrainError> {
    train(ModelKind::MultinomialLogistic, x, y, dim, config)
}

/// One-vs-rest squared-hinge linear SVM with C picked by stratified k-fold CV.
pub fn train_svm(
    x: &[SparseVector],
    y: &[ClassLabel],
    dim: usize,
    config: &TrainConfig,
) -> Result<LinearClassifier, TrainError> {
    train(ModelKind::LinearSvmOvr, x, y, dim, config)
}
