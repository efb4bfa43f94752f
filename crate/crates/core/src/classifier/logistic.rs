//! L2-regularized multinomial logistic regression trained by full-batch
//! descent with a backtracking (Armijo) line search.
//!
//! Objective: summed cross-entropy + (λ/2)·‖W‖², bias column unpenalized.
//! Directions come from the gradient through a limited-memory quasi-Newton
//! recursion whose initial metric is the fixed bound ½·X̃ᵀX̃ + λ·I on the
//! Hessian; the bound-scaled gradient is used whenever that fails to give
//! descent. Unit steps are halved
//! until sufficient (and strict) decrease holds, so the loss never
//! increases; once no representable step lowers it, training stops there.

use std::collections::VecDeque;

use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use super::encode::{Column, DesignMatrix};
use crate::error::{Error, Result};
use crate::label::Label;

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-18;
/// Curvature pairs kept by the quasi-Newton direction.
const MEMORY: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub l2_lambda: f64,
    pub max_iters: usize,
    /// Stop once the largest absolute gradient entry drops below this.
    pub tolerance: f64,
    /// Recorded with the model. Training itself is deterministic and never
    /// draws random numbers.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2_lambda: 1.0,
            max_iters: 500,
            tolerance: 1e-6,
            seed: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// classes × (columns + 1); the last column is the bias.
    pub weights: Array2<f64>,
    pub columns: Vec<Column>,
    pub l2_lambda: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    /// Objective value before the first step and after every accepted step.
    pub losses: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub probabilities: [f64; Label::COUNT],
    pub label: Label,
}

fn with_bias(x: &Array2<f64>) -> Array2<f64> {
    let (n, d) = x.dim();
    let mut out = Array2::ones((n, d + 1));
    out.slice_mut(s![.., ..d]).assign(x);
    out
}

/// Objective value and gradient at `w` for a bias-augmented design `xb`.
pub fn loss_and_gradient(
    w: &Array2<f64>,
    xb: ArrayView2<'_, f64>,
    y: &[Label],
    l2_lambda: f64,
) -> (f64, Array2<f64>) {
    let k = w.nrows();
    let d = w.ncols() - 1;
    let mut scores = xb.dot(&w.t());
    let mut loss = 0.0;
    for (mut row, label) in scores.axis_iter_mut(Axis(0)).zip(y) {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - row[label.index()];
        row.mapv_inplace(|v| (v - lse).exp());
        row[label.index()] -= 1.0;
    }
    let mut grad = scores.t().dot(&xb);
    let penalized = w.slice(s![.., ..d]);
    loss += 0.5 * l2_lambda * penalized.iter().map(|v| v * v).sum::<f64>();
    grad.slice_mut(s![.., ..d]).scaled_add(l2_lambda, &penalized);
    debug_assert_eq!(grad.dim(), (k, d + 1));
    (loss, grad)
}

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn dot(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Inverse of ½·X̃ᵀX̃ + λ·I (bias unpenalized), which bounds the Hessian of
/// every class block from above.
fn curvature_bound_inverse(xb: &Array2<f64>, l2_lambda: f64) -> Result<Array2<f64>> {
    let p = xb.ncols();
    let mut bound = xb.t().dot(xb) * 0.5;
    let mean_diag = (0..p).map(|j| bound[(j, j)]).sum::<f64>() / p as f64;
    // A whisker of ridge keeps the factorization defined for collinear
    // columns when λ = 0.
    let ridge = 1e-10 * mean_diag.max(1.0);
    for j in 0..p {
        bound[(j, j)] += ridge + if j + 1 < p { l2_lambda } else { 0.0 };
    }
    let m = nalgebra::DMatrix::from_row_iterator(p, p, bound.iter().copied());
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::NonFinite("curvature bound is not positive definite".into()))?;
    let inv = chol.inverse();
    Ok(Array2::from_shape_fn((p, p), |(i, j)| inv[(i, j)]))
}

/// Two-loop recursion: an approximation of H⁻¹·g from the stored curvature
/// pairs, seeded with the scaled curvature bound.
fn lbfgs_direction(
    grad: &Array2<f64>,
    history: &VecDeque<(Array2<f64>, Array2<f64>, f64)>,
    scale: &impl Fn(&Array2<f64>, f64) -> Array2<f64>,
) -> Array2<f64> {
    let mut q = grad.clone();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, sy) in history.iter().rev() {
        let a = dot(s, &q) / sy;
        q.scaled_add(-a, y);
        alphas.push(a);
    }
    let gamma = history.back().map_or(1.0, |(_, y, sy)| {
        let hy = scale(y, 1.0);
        sy / dot(y, &hy)
    });
    let mut r = scale(&q, gamma);
    for ((s, y, sy), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = dot(y, &r) / sy;
        r.scaled_add(a - b, s);
    }
    r
}

/// Halves a unit step along `-direction` until the Armijo condition holds
/// with a strict decrease. `None` when no representable step decreases the
/// loss.
fn line_search(
    w: &Array2<f64>,
    direction: &Array2<f64>,
    slope: f64,
    loss: f64,
    eval: impl Fn(&Array2<f64>) -> (f64, Array2<f64>),
) -> Option<(Array2<f64>, f64, Array2<f64>)> {
    let mut t = 1.0;
    while t >= MIN_STEP {
        let candidate = w - &(direction * t);
        let (c_loss, c_grad) = eval(&candidate);
        if c_loss.is_finite() && c_loss < loss && c_loss <= loss - ARMIJO_C * t * slope {
            return Some((candidate, c_loss, c_grad));
        }
        t *= 0.5;
    }
    None
}

pub fn train(x: &DesignMatrix, y: &[Label], config: &TrainConfig) -> Result<ModelParams> {
    train_with_trace(x, y, config).map(|(m, _)| m)
}

pub fn train_with_trace(
    x: &DesignMatrix,
    y: &[Label],
    config: &TrainConfig,
) -> Result<(ModelParams, TrainTrace)> {
    if x.n_rows() != y.len() {
        return Err(Error::invalid(format!(
            "{} rows but {} labels",
            x.n_rows(),
            y.len()
        )));
    }
    let mut present = [false; Label::COUNT];
    y.iter().for_each(|l| present[l.index()] = true);
    if present.iter().filter(|p| **p).count() < 2 {
        return Err(Error::invalid("training needs at least two classes"));
    }
    if !(config.l2_lambda >= 0.0) {
        return Err(Error::invalid("l2_lambda must be non-negative"));
    }

    let xb = with_bias(&x.x);
    let xv = xb.view();
    let mut w = Array2::<f64>::zeros((Label::COUNT, xb.ncols()));
    let (mut loss, mut grad) = loss_and_gradient(&w, xv, y, config.l2_lambda);
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("initial loss {loss}")));
    }

    let bound_inv = curvature_bound_inverse(&xb, config.l2_lambda)?;
    let scale = |g: &Array2<f64>, by: f64| -> Array2<f64> { g.dot(&bound_inv) * by };

    let mut history: VecDeque<(Array2<f64>, Array2<f64>, f64)> = VecDeque::with_capacity(MEMORY);
    let mut trace = TrainTrace {
        losses: vec![loss],
        iterations: 0,
        converged: false,
    };
    for _ in 0..config.max_iters {
        if max_abs(&grad) < config.tolerance {
            trace.converged = true;
            break;
        }
        let mut direction = lbfgs_direction(&grad, &history, &scale);
        let mut slope = dot(&grad, &direction);
        if !(slope > 0.0) {
            // Curvature pairs gave no descent direction; start over.
            history.clear();
            direction = scale(&grad, 1.0);
            slope = dot(&grad, &direction);
        }
        let mut accepted = line_search(&w, &direction, slope, loss, |c| {
            loss_and_gradient(c, xv, y, config.l2_lambda)
        });
        if accepted.is_none() && !history.is_empty() {
            history.clear();
            direction = scale(&grad, 1.0);
            slope = dot(&grad, &direction);
            accepted = line_search(&w, &direction, slope, loss, |c| {
                loss_and_gradient(c, xv, y, config.l2_lambda)
            });
        }
        let Some((next_w, next_loss, next_grad)) = accepted else {
            // The loss no longer decreases in floating point: this is as
            // close to the optimum as the arithmetic allows.
            trace.converged = true;
            break;
        };

        let sdiff = &next_w - &w;
        let ydiff = &next_grad - &grad;
        let sy = dot(&sdiff, &ydiff);
        if sy > 1e-12 * dot(&ydiff, &ydiff).sqrt() * dot(&sdiff, &sdiff).sqrt() && sy > 0.0 {
            if history.len() == MEMORY {
                history.pop_front();
            }
            history.push_back((sdiff, ydiff, sy));
        }

        w = next_w;
        loss = next_loss;
        grad = next_grad;
        trace.iterations += 1;
        trace.losses.push(loss);
    }
    if !trace.converged && max_abs(&grad) < config.tolerance {
        trace.converged = true;
    }

    Ok((
        ModelParams {
            weights: w,
            columns: x.columns.clone(),
            l2_lambda: config.l2_lambda,
            seed: config.seed,
        },
        trace,
    ))
}

/// Softmax of class scores; the argmax prefers the earlier class on ties.
pub fn softmax_prediction(scores: &[f64; Label::COUNT]) -> Prediction {
    let max = scores.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let mut probabilities = scores.map(|s| (s - max).exp());
    let z: f64 = probabilities.iter().sum();
    probabilities.iter_mut().for_each(|p| *p /= z);
    let mut best = 0;
    for i in 1..Label::COUNT {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    Prediction {
        probabilities,
        label: Label::ALL[best],
    }
}

impl ModelParams {
    pub fn n_columns(&self) -> usize {
        self.weights.ncols() - 1
    }

    pub fn scores(&self, row: &[f64]) -> Result<[f64; Label::COUNT]> {
        let d = self.n_columns();
        if row.len() != d {
            return Err(Error::invalid(format!(
                "row has {} columns, model expects {d}",
                row.len()
            )));
        }
        let mut out = [0.0; Label::COUNT];
        for (k, o) in out.iter_mut().enumerate() {
            let w = self.weights.row(k);
            *o = w[d] + row.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<f64>();
        }
        Ok(out)
    }
}

pub fn predict(model: &ModelParams, row: &[f64]) -> Result<Prediction> {
    model.scores(row).map(|s| softmax_prediction(&s))
}

/// Predicts every row of a design matrix.
pub fn predict_all(model: &ModelParams, x: &DesignMatrix) -> Result<Vec<Prediction>> {
    x.x.rows()
        .into_iter()
        .map(|r| predict(model, r.as_slice().unwrap_or(&r.to_vec())))
        .collect()
}

/// Class frequencies as a probability vector; used when reasoning about the
/// heavily regularized limit.
pub fn class_priors(y: &[Label]) -> Array1<f64> {
    let mut p = Array1::zeros(Label::COUNT);
    y.iter().for_each(|l| p[l.index()] += 1.0);
    p / y.len().max(1) as f64
}
