//! Regularized empirical risk over linear scores and its minimizer.
//!
//! For parameters `W` (outputs × dim) and `b` (outputs) the objective is
//!
//! ```text
//! f(W, b) = (1/N) Σ_i loss(W x_i + b, y_i) + ‖W‖² / (2 C N)
//! ```
//!
//! which has the same minimizer as `Σ_i loss + ‖W‖² / (2C)`. The bias is
//! not penalized. Parameters are stored flat: `W` row-major, then `b`.

use alloc::vec::Vec;

use crate::features::SparseVector;

/// Per-sample loss on a row of scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreLoss {
    /// Multinomial cross-entropy; targets are class positions.
    Softmax,
    /// `max(0, 1 - s·y)²` on a single score; target 1 is the positive class.
    SquaredHinge,
}

impl ScoreLoss {
    /// Loss of one sample; writes d loss / d score into `grad` when given.
    fn eval(self, scores: &[f64], target: usize, grad: Option<&mut [f64]>) -> f64 {
        match self {
            ScoreLoss::Softmax => {
                let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = scores.iter().map(|&s| libm::exp(s - max)).sum();
                let lse = max + libm::log(sum);
                if let Some(g) = grad {
                    for (k, (gk, &s)) in g.iter_mut().zip(scores).enumerate() {
                        *gk = libm::exp(s - lse) - if k == target { 1.0 } else { 0.0 };
                    }
                }
                lse - scores[target]
            }
            ScoreLoss::SquaredHinge => {
                let sign = if target == 1 { 1.0 } else { -1.0 };
                let slack = (1.0 - sign * scores[0]).max(0.0);
                if let Some(g) = grad {
                    g[0] = -2.0 * sign * slack;
                }
                slack * slack
            }
        }
    }
}

pub struct Objective<'a> {
    x: &'a [SparseVector],
    y: &'a [usize],
    dim: usize,
    outputs: usize,
    loss: ScoreLoss,
    c: f64,
}

impl<'a> Objective<'a> {
    pub fn new(x: &'a [SparseVector], y: &'a [usize], dim: usize, outputs: usize, loss: ScoreLoss, c: f64) -> Self {
        debug_assert_eq!(x.len(), y.len());
        Objective {
            x,
            y,
            dim,
            outputs,
            loss,
            c,
        }
    }

    pub fn num_params(&self) -> usize {
        self.outputs * (self.dim + 1)
    }

    fn reg_scale(&self) -> f64 {
        1.0 / (2.0 * self.c * self.x.len() as f64)
    }

    fn weights<'p>(&self, params: &'p [f64]) -> &'p [f64] {
        &params[..self.outputs * self.dim]
    }

    /// Scores of every sample, N × outputs row-major.
    pub fn scores(&self, params: &[f64]) -> Vec<f64> {
        let (w, b) = params.split_at(self.outputs * self.dim);
        let mut out = Vec::with_capacity(self.x.len() * self.outputs);
        for xi in self.x {
            for k in 0..self.outputs {
                out.push(xi.dot(&w[k * self.dim..(k + 1) * self.dim]) + b[k]);
            }
        }
        out
    }

    fn data_loss(&self, scores: &[f64]) -> f64 {
        let total: f64 = scores
            .chunks(self.outputs)
            .zip(self.y)
            .map(|(s, &t)| self.loss.eval(s, t, None))
            .sum();
        total / self.x.len() as f64
    }

    pub fn value(&self, params: &[f64]) -> f64 {
        let w = self.weights(params);
        self.data_loss(&self.scores(params)) + self.reg_scale() * w.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn value_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let scores = self.scores(params);
        self.value_and_gradient_at(params, &scores)
    }

    fn value_and_gradient_at(&self, params: &[f64], scores: &[f64]) -> (f64, Vec<f64>) {
        let n = self.x.len() as f64;
        let nw = self.outputs * self.dim;
        let mut grad = alloc::vec![0.0; self.num_params()];
        let mut dscore = alloc::vec![0.0; self.outputs];
        let mut total = 0.0;
        for ((s, &t), xi) in scores.chunks(self.outputs).zip(self.y).zip(self.x) {
            total += self.loss.eval(s, t, Some(&mut dscore));
            for (k, &d) in dscore.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &mut grad[k * self.dim..(k + 1) * self.dim];
                for &(j, v) in xi.entries() {
                    row[j] += d * v;
                }
                grad[nw + k] += d;
            }
        }
        for g in &mut grad {
            *g /= n;
        }
        let w = self.weights(params);
        let reg = self.reg_scale();
        for (g, &wv) in grad[..nw].iter_mut().zip(w) {
            *g += 2.0 * reg * wv;
        }
        let value = total / n + reg * w.iter().map(|v| v * v).sum::<f64>();
        (value, grad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    pub max_epochs: usize,
    /// Stop once the gradient's ∞-norm drops below this.
    pub tolerance: f64,
    pub initial_step: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub max_halvings: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            max_epochs: 1000,
            tolerance: 1e-4,
            initial_step: 1.0,
            armijo: 1e-4,
            max_halvings: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub params: Vec<f64>,
    /// Objective value at the start of each epoch, then the final value.
    pub losses: Vec<f64>,
    pub epochs: usize,
    pub converged: bool,
    pub grad_norm: f64,
}

/// Full-batch gradient descent with backtracking line search.
///
/// Each epoch doubles the previous accepted step and halves it until the
/// Armijo condition holds, so the objective never increases. Scores are
/// linear in the parameters, which lets every trial step be evaluated from
/// the current scores and the scores of the gradient without another pass
/// over the features.
pub fn minimize(obj: &Objective<'_>, init: Vec<f64>, opts: &OptimizerOptions) -> Fit {
    let nw = obj.outputs * obj.dim;
    let reg = obj.reg_scale();
    let mut params = init;
    let mut step = opts.initial_step;
    let mut losses = Vec::new();
    let mut epochs = 0;
    let mut converged = false;
    let mut grad_norm;
    loop {
        let scores = obj.scores(&params);
        let (value, grad) = obj.value_and_gradient_at(&params, &scores);
        losses.push(value);
        grad_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if grad_norm < opts.tolerance {
            converged = true;
            break;
        }
        if epochs >= opts.max_epochs {
            break;
        }
        let grad_scores = obj.scores(&grad);
        let w = &params[..nw];
        let gw = &grad[..nw];
        let ww: f64 = w.iter().map(|v| v * v).sum();
        let wg: f64 = w.iter().zip(gw).map(|(a, b)| a * b).sum();
        let gg_w: f64 = gw.iter().map(|v| v * v).sum();
        let gg: f64 = grad.iter().map(|v| v * v).sum();

        let mut t = (step * 2.0).min(1e6);
        let mut accepted = None;
        let mut trial = alloc::vec![0.0; scores.len()];
        for _ in 0..=opts.max_halvings {
            for ((out, &s), &g) in trial.iter_mut().zip(&scores).zip(&grad_scores) {
                *out = s - t * g;
            }
            let f = obj.data_loss(&trial) + reg * (ww - 2.0 * t * wg + t * t * gg_w);
            if f <= value - opts.armijo * t * gg {
                accepted = Some(t);
                break;
            }
            t *= 0.5;
        }
        let Some(t) = accepted else {
            break;
        };
        step = t;
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= t * g;
        }
        epochs += 1;
    }
    Fit {
        params,
        losses,
        epochs,
        converged,
        grad_norm,
    }
}
