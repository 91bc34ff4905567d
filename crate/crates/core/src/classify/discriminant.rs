//! Gaussian class-conditional discriminants.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::LabeledData;
use crate::dataset::Label;
use crate::error::{Error, Result};

struct ClassStats {
    count: usize,
    mean: DVector<f64>,
    /// Sum of centered outer products.
    scatter: DMatrix<f64>,
}

fn class_stats(data: &LabeledData, label: Label) -> ClassStats {
    let rows: Vec<usize> = (0..data.len()).filter(|&i| data.labels[i] == label).collect();
    let d = data.dim();
    let mut x = DMatrix::zeros(rows.len(), d);
    for (r, &i) in rows.iter().enumerate() {
        for (c, v) in data.row(i).iter().enumerate() {
            x[(r, c)] = *v;
        }
    }
    let mean = x.row_mean().transpose();
    for mut row in x.row_iter_mut() {
        row -= mean.transpose();
    }
    let scatter = x.tr_mul(&x);
    ClassStats { count: rows.len(), mean, scatter }
}

fn with_ridge(mut cov: DMatrix<f64>, ridge_factor: f64) -> (DMatrix<f64>, f64) {
    let d = cov.nrows();
    let scale = cov.trace() / d as f64;
    let ridge = ridge_factor * if scale > 0.0 { scale } else { 1.0 };
    for i in 0..d {
        cov[(i, i)] += ridge;
    }
    // exact symmetry
    let sym = (&cov + cov.transpose()) * 0.5;
    (sym, ridge)
}

fn flatten(m: &DMatrix<f64>) -> Vec<f64> {
    // row-major
    m.transpose().as_slice().to_vec()
}

/// Shared-covariance (linear) discriminant: `score = w . z + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearDiscriminant {
    pub means: [Vec<f64>; 2],
    pub priors: [f64; 2],
    pub ridge: f64,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearDiscriminant {
    pub fn fit(data: &LabeledData, ridge_factor: f64) -> Result<Self> {
        let good = class_stats(data, Label::Good);
        let bad = class_stats(data, Label::Bad);
        let n = data.len();
        let dof = if n > 2 { n - 2 } else { n } as f64;
        let (cov, ridge) = with_ridge((&good.scatter + &bad.scatter) / dof, ridge_factor);
        let chol = Cholesky::new(cov).ok_or_else(|| Error::Numerical("pooled covariance is singular".into()))?;
        let diff = &bad.mean - &good.mean;
        let w = chol.solve(&diff);
        let priors = [good.count as f64 / n as f64, bad.count as f64 / n as f64];
        let bias = -0.5 * w.dot(&(&bad.mean + &good.mean)) + (priors[1] / priors[0]).ln();
        Ok(Self {
            means: [good.mean.as_slice().to_vec(), bad.mean.as_slice().to_vec()],
            priors,
            ridge,
            weights: w.as_slice().to_vec(),
            bias,
        })
    }

    pub fn score(&self, z: &[f64]) -> f64 {
        crate::operator::dot(&self.weights, z) + self.bias
    }
}

/// Per-class covariance (quadratic) discriminant: difference of Gaussian
/// log-densities plus log prior ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticDiscriminant {
    pub dim: usize,
    pub means: [Vec<f64>; 2],
    pub log_priors: [f64; 2],
    pub ridges: [f64; 2],
    /// Regularized covariances, row-major.
    pub covariances: [Vec<f64>; 2],
    /// Inverses of the regularized covariances, row-major.
    pub precisions: [Vec<f64>; 2],
    pub log_dets: [f64; 2],
}

impl QuadraticDiscriminant {
    pub fn fit(data: &LabeledData, ridge_factor: f64) -> Result<Self> {
        let d = data.dim();
        let n = data.len() as f64;
        let mut means: [Vec<f64>; 2] = Default::default();
        let mut log_priors = [0.0; 2];
        let mut ridges = [0.0; 2];
        let mut covariances: [Vec<f64>; 2] = Default::default();
        let mut precisions: [Vec<f64>; 2] = Default::default();
        let mut log_dets = [0.0; 2];
        for (k, label) in [Label::Good, Label::Bad].into_iter().enumerate() {
            let stats = class_stats(data, label);
            let dof = if stats.count > 1 { stats.count - 1 } else { 1 } as f64;
            let (cov, ridge) = with_ridge(stats.scatter / dof, ridge_factor);
            let chol = Cholesky::new(cov.clone())
                .ok_or_else(|| Error::Numerical(format!("{label} covariance is singular")))?;
            log_dets[k] = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
            let precision = chol.inverse();
            let precision = (&precision + precision.transpose()) * 0.5;
            means[k] = stats.mean.as_slice().to_vec();
            log_priors[k] = (stats.count as f64 / n).ln();
            ridges[k] = ridge;
            covariances[k] = flatten(&cov);
            precisions[k] = flatten(&precision);
        }
        Ok(Self { dim: d, means, log_priors, ridges, covariances, precisions, log_dets })
    }

    fn log_density(&self, k: usize, z: &[f64]) -> f64 {
        let d = self.dim;
        let centered: Vec<f64> = z.iter().zip(&self.means[k]).map(|(a, b)| a - b).collect();
        let p = &self.precisions[k];
        let mut quad = 0.0;
        for i in 0..d {
            quad += centered[i] * crate::operator::dot(&p[i * d..(i + 1) * d], &centered);
        }
        -0.5 * quad - 0.5 * self.log_dets[k] + self.log_priors[k]
    }

    pub fn score(&self, z: &[f64]) -> f64 {
        self.log_density(1, z) - self.log_density(0, z)
    }

    pub fn covariance(&self, label: Label) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.covariances[label.code() as usize])
    }
}
