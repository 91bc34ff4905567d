//! Soft-margin kernel SVM trained by sequential minimal optimization.
//!
//! Dual: `min 1/2 a^T Q a - 1^T a` subject to `0 <= a_i <= C` and
//! `y^T a = 0`, with `Q_ij = y_i y_j K(x_i, x_j)`. Each step pairs the
//! maximal violator in `I_up` with the `I_low` partner giving the largest
//! second-order decrease of the dual; iteration stops once the violation
//! gap `max_{I_up} -y_t G_t - min_{I_low} -y_t G_t` drops below the tolerance.

use serde::{Deserialize, Serialize};

use super::{label_sign, KernelSpec, LabeledData};
use crate::error::{Error, Result};
use crate::operator::{dot, DenseMatrix};

pub const KKT_TOL: f64 = 1e-3;
/// SMO iteration budget per training sample.
pub const MAX_ITERATIONS_PER_SAMPLE: usize = 200;
const TAU: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmFitStats {
    pub iterations: usize,
    /// Violation gap at termination.
    pub kkt_gap: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportVectorMachine {
    pub kernel: KernelSpec,
    pub c: f64,
    pub dim: usize,
    /// Support vectors (standardized), row-major.
    pub support_vectors: Vec<f64>,
    pub sv_norms: Vec<f64>,
    /// Multipliers of the support vectors, each in `(0, C]`.
    pub alphas: Vec<f64>,
    /// `+1` for bad, `-1` for good.
    pub signs: Vec<f64>,
    pub bias: f64,
    pub stats: SvmFitStats,
}

/// `Z Z^T` for row-major `z`.
pub fn kernel_gram(z: &DenseMatrix) -> DenseMatrix {
    let a = z.to_nalgebra();
    let g = &a * a.transpose();
    // symmetric, so the column-major buffer is also the row-major one
    DenseMatrix::new(z.rows(), z.rows(), g.as_slice().to_vec())
}

impl SupportVectorMachine {
    pub fn fit(z: &LabeledData, c: f64, kernel: KernelSpec) -> Result<Self> {
        let gram = kernel_gram(&z.features);
        Self::fit_with_gram(z, &gram, c, kernel)
    }

    pub fn fit_with_gram(z: &LabeledData, dot_gram: &DenseMatrix, c: f64, kernel: KernelSpec) -> Result<Self> {
        let n = z.len();
        if dot_gram.rows() != n || dot_gram.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: dot_gram.rows() });
        }
        if !(c > 0.0) {
            return Err(Error::InvalidArgument(format!("SVM C must be positive, got {c}")));
        }
        kernel.validate()?;
        let dim = z.dim();
        let y: Vec<f64> = z.labels.iter().map(|&l| label_sign(l)).collect();
        let diag: Vec<f64> = (0..n).map(|i| dot_gram.get(i, i)).collect();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            let row = dot_gram.row(i);
            for j in 0..n {
                k[i * n + j] = kernel.from_dot(row[j], diag[i], diag[j], dim);
            }
        }

        let kd: Vec<f64> = (0..n).map(|t| k[t * n + t]).collect();
        let mut alpha = vec![0.0; n];
        // f_t = -y_t G_t, with G the dual gradient (initially -1)
        let mut f: Vec<f64> = y.clone();
        let in_up = |a: f64, s: f64| if s > 0.0 { a < c } else { a > 0.0 };
        let in_low = |a: f64, s: f64| if s > 0.0 { a > 0.0 } else { a < c };
        let mut up: Vec<bool> = (0..n).map(|t| in_up(0.0, y[t])).collect();
        let mut low: Vec<bool> = (0..n).map(|t| in_low(0.0, y[t])).collect();
        let max_iter = (MAX_ITERATIONS_PER_SAMPLE * n).max(100_000);
        let mut iterations = 0;
        let mut gap;

        let (mut g_max, mut i) = (f64::NEG_INFINITY, usize::MAX);
        for t in 0..n {
            if up[t] && f[t] > g_max {
                g_max = f[t];
                i = t;
            }
        }
        loop {
            // i: maximal violator in I_up; j: largest second-order decrease in I_low
            let mut g_min = f64::INFINITY;
            let mut j = usize::MAX;
            if i != usize::MAX {
                let k_i = &k[i * n..(i + 1) * n];
                let mut best = f64::INFINITY;
                for t in 0..n {
                    if !low[t] {
                        continue;
                    }
                    let v = f[t];
                    g_min = g_min.min(v);
                    let b = g_max - v;
                    if b > 0.0 {
                        let a = (kd[i] + kd[t] - 2.0 * k_i[t]).max(TAU);
                        let gain = -b * b / a;
                        if gain < best {
                            best = gain;
                            j = t;
                        }
                    }
                }
            }
            gap = g_max - g_min;
            if i == usize::MAX || j == usize::MAX || gap < KKT_TOL || iterations >= max_iter {
                break;
            }
            iterations += 1;

            let k_i = &k[i * n..(i + 1) * n];
            let k_j = &k[j * n..(j + 1) * n];
            let (grad_i, grad_j) = (-y[i] * f[i], -y[j] * f[j]);
            let q_ij = y[i] * y[j] * k_i[j];
            let (old_i, old_j) = (alpha[i], alpha[j]);
            if y[i] != y[j] {
                let quad = (kd[i] + kd[j] + 2.0 * q_ij).max(TAU);
                let delta = (-grad_i - grad_j) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let quad = (kd[i] + kd[j] - 2.0 * q_ij).max(TAU);
                let delta = (grad_i - grad_j) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
            for t in [i, j] {
                up[t] = in_up(alpha[t], y[t]);
                low[t] = in_low(alpha[t], y[t]);
            }
            // y_t^2 = 1, so f moves by the kernel rows alone; the next i is found in the same pass
            let d_i = (alpha[i] - old_i) * y[i];
            let d_j = (alpha[j] - old_j) * y[j];
            g_max = f64::NEG_INFINITY;
            i = usize::MAX;
            for t in 0..n {
                let v = f[t] - (k_i[t] * d_i + k_j[t] * d_j);
                f[t] = v;
                if up[t] && v > g_max {
                    g_max = v;
                    i = t;
                }
            }
        }
        let grad: Vec<f64> = (0..n).map(|t| -y[t] * f[t]).collect();

        // rho: mean of y G over free multipliers, else midpoint of the bounds
        let mut sum_free = 0.0;
        let mut n_free = 0usize;
        let mut upper = f64::INFINITY;
        let mut lower = f64::NEG_INFINITY;
        for t in 0..n {
            let yg = y[t] * grad[t];
            if alpha[t] > 0.0 && alpha[t] < c {
                sum_free += yg;
                n_free += 1;
            } else if (alpha[t] >= c && y[t] < 0.0) || (alpha[t] <= 0.0 && y[t] > 0.0) {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        }
        let rho = if n_free > 0 { sum_free / n_free as f64 } else { (upper + lower) / 2.0 };

        let mut support_vectors = Vec::new();
        let mut sv_norms = Vec::new();
        let mut alphas = Vec::new();
        let mut signs = Vec::new();
        for t in 0..n {
            if alpha[t] > 0.0 {
                support_vectors.extend_from_slice(z.row(t));
                sv_norms.push(diag[t]);
                alphas.push(alpha[t]);
                signs.push(y[t]);
            }
        }
        Ok(Self {
            kernel,
            c,
            dim,
            support_vectors,
            sv_norms,
            alphas,
            signs,
            bias: -rho,
            stats: SvmFitStats { iterations, kkt_gap: gap, converged: gap < KKT_TOL },
        })
    }

    pub fn n_support(&self) -> usize {
        self.alphas.len()
    }

    pub fn support_vector(&self, i: usize) -> &[f64] {
        &self.support_vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// `sum_i alpha_i y_i K(sv_i, z) + b`; positive means bad.
    pub fn decision(&self, z: &[f64]) -> f64 {
        let zz = dot(z, z);
        let mut s = self.bias;
        for i in 0..self.n_support() {
            let sv = self.support_vector(i);
            s += self.alphas[i] * self.signs[i] * self.kernel.from_dot(dot(sv, z), self.sv_norms[i], zz, self.dim);
        }
        s
    }

    /// Largest KKT violation over standardized training data `z`:
    /// `1 - y f` for `a = 0`, `y f - 1` for `a = C`, `|y f - 1|` otherwise.
    pub fn kkt_residual(&self, z: &LabeledData) -> f64 {
        let c = self.c;
        let mut worst: f64 = 0.0;
        for t in 0..z.len() {
            let row = z.row(t);
            let y = label_sign(z.labels[t]);
            let margin = y * self.decision(row);
            let alpha = (0..self.n_support())
                .find(|&i| self.support_vector(i) == row && self.signs[i] == y)
                .map_or(0.0, |i| self.alphas[i]);
            let v = if alpha <= 0.0 {
                (1.0 - margin).max(0.0)
            } else if alpha >= c {
                (margin - 1.0).max(0.0)
            } else {
                (margin - 1.0).abs()
            };
            worst = worst.max(v);
        }
        worst
    }

    /// `|sum_i a_i y_i|`
    pub fn equality_residual(&self) -> f64 {
        self.alphas.iter().zip(&self.signs).map(|(a, s)| a * s).sum::<f64>().abs()
    }
}
