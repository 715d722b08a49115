//! Linear classifiers over TF-IDF vectors: multinomial logistic regression
//! and one-vs-rest squared-hinge linear SVMs, both fitted by full-batch
//! gradient descent with a backtracking line search and tuned by
//! stratified k-fold cross-validation on macro F1.

mod linear;
pub mod objective;
mod train;

pub use linear::{LinearClassifier, ModelError, ModelKind, ProbabilityDistribution, TrainingMeta};
pub use objective::{minimize, Fit, Objective, OptimizerOptions, ScoreLoss};
pub use train::{
    cross_validate, fit_fixed_c, stratified_folds, train_logreg, train_svm, TrainConfig, TrainError, LOGREG_C_GRID,
    SVM_C_GRID,
};
