//! Ridge-penalized logistic regression fit by damped Newton steps
//! (iteratively reweighted least squares with a backtracking line search).

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::LabeledData;
use crate::dataset::Label;
use crate::error::{Error, Result};

pub const GRADIENT_TOL: f64 = 1e-8;
const MAX_NEWTON_STEPS: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    /// Euclidean norm of the objective gradient at the returned point.
    pub gradient_norm: f64,
    pub iterations: usize,
    pub loss: f64,
}

fn log1p_exp(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Design matrix with a trailing column of ones for the bias.
fn design(data: &LabeledData) -> DMatrix<f64> {
    let (n, d) = (data.len(), data.dim());
    DMatrix::from_fn(n, d + 1, |i, j| if j < d { data.row(i)[j] } else { 1.0 })
}

fn targets(data: &LabeledData) -> DVector<f64> {
    DVector::from_iterator(data.len(), data.labels.iter().map(|&l| if l == Label::Bad { 1.0 } else { 0.0 }))
}

/// Mean log-loss plus `lambda / 2 * ||w||^2` (bias unpenalized).
pub(crate) fn objective(x: &DMatrix<f64>, t: &DVector<f64>, theta: &DVector<f64>, lambda: f64) -> f64 {
    let n = x.nrows() as f64;
    let d = theta.len() - 1;
    let s = x * theta;
    let data_loss: f64 = s.iter().zip(t.iter()).map(|(si, ti)| log1p_exp(*si) - ti * si).sum::<f64>() / n;
    let penalty = 0.5 * lambda * theta.rows(0, d).norm_squared();
    data_loss + penalty
}

fn gradient(x: &DMatrix<f64>, t: &DVector<f64>, theta: &DVector<f64>, lambda: f64) -> (DVector<f64>, DVector<f64>) {
    let n = x.nrows() as f64;
    let d = theta.len() - 1;
    let p = (x * theta).map(sigmoid);
    let mut g = x.tr_mul(&(&p - t)) / n;
    for j in 0..d {
        g[j] += lambda * theta[j];
    }
    (g, p)
}

impl LogisticRegression {
    pub fn fit(data: &LabeledData, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument("logistic ridge must be positive".into()));
        }
        let x = design(data);
        let t = targets(data);
        let (n, d1) = (x.nrows(), x.ncols());
        let mut theta = DVector::zeros(d1);
        let mut loss = objective(&x, &t, &theta, lambda);
        let mut iterations = 0;
        let (mut g, mut p) = gradient(&x, &t, &theta, lambda);
        while g.norm() >= GRADIENT_TOL && iterations < MAX_NEWTON_STEPS {
            iterations += 1;
            // Hessian: X^T diag(p(1-p)) X / n + lambda * I (no penalty on bias)
            let mut xw = x.clone();
            for (i, mut row) in xw.row_iter_mut().enumerate() {
                row *= (p[i] * (1.0 - p[i])).sqrt();
            }
            let mut h = xw.tr_mul(&xw) / n as f64;
            for j in 0..d1 - 1 {
                h[(j, j)] += lambda;
            }
            // the bias direction loses curvature on nearly separable data
            h[(d1 - 1, d1 - 1)] += 1e-12;
            let step = Cholesky::new(h)
                .ok_or_else(|| Error::Numerical("logistic Hessian not positive definite".into()))?
                .solve(&g);
            let slope = g.dot(&step);
            let mut alpha = 1.0;
            loop {
                let candidate = &theta - &step * alpha;
                let cand_loss = objective(&x, &t, &candidate, lambda);
                if cand_loss <= loss - 1e-4 * alpha * slope || alpha < 1e-10 {
                    if cand_loss <= loss {
                        theta = candidate;
                        loss = cand_loss;
                    }
                    break;
                }
                alpha *= 0.5;
            }
            let prev = g.norm();
            (g, p) = gradient(&x, &t, &theta, lambda);
            if alpha < 1e-10 && g.norm() >= prev {
                // no further progress is representable
                break;
            }
        }
        let d = d1 - 1;
        Ok(Self {
            weights: theta.rows(0, d).iter().copied().collect(),
            bias: theta[d],
            lambda,
            gradient_norm: g.norm(),
            iterations,
            loss,
        })
    }

    /// Log-odds of bad.
    pub fn score(&self, z: &[f64]) -> f64 {
        crate::operator::dot(&self.weights, z) + self.bias
    }

    pub fn probability_bad(&self, z: &[f64]) -> f64 {
        sigmoid(self.score(z))
    }

    /// Objective value at `theta = 0` on the given standardized data.
    pub fn loss_at_zero(data: &LabeledData, lambda: f64) -> f64 {
        let x = design(data);
        objective(&x, &targets(data), &DVector::zeros(x.ncols()), lambda)
    }
}
