//! Good/bad classifiers that operate directly on measurement vectors.
//!
//! Every model standardizes features with statistics learned on its own
//! training data. Decision scores are oriented so that positive means bad;
//! a score of exactly zero is also reported as bad.

mod cv;
mod discriminant;
mod eval;
mod logistic;
mod neighbor;
mod persist;
mod standardize;
mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cv::{default_grid, DEFAULT_CV_SEED, kfold_cv, kfold_cv_seeded, stratified_folds, CvPoint, CvResult};
pub use discriminant::{LinearDiscriminant, QuadraticDiscriminant};
pub use eval::{char_histogram, evaluate_holdout, Confusion, EvalReport, HoldoutSet, Misclassified};
pub use logistic::LogisticRegression;
pub use neighbor::NearestNeighbor;
pub use persist::{load_model, model_from_json, model_to_json, save_model, MODEL_FORMAT, MODEL_VERSION};
pub use standardize::Standardizer;
pub use svm::{kernel_gram, SupportVectorMachine, SvmFitStats, KKT_TOL, MAX_ITERATIONS_PER_SAMPLE};

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::operator::DenseMatrix;

/// Sign used internally by the SVM and for decision scores: bad is `+1`.
pub fn label_sign(label: Label) -> f64 {
    match label {
        Label::Good => -1.0,
        Label::Bad => 1.0,
    }
}

/// Score `>= 0` is bad.
pub fn label_from_score(score: f64) -> Label {
    if score >= 0.0 {
        Label::Bad
    } else {
        Label::Good
    }
}

/// Row-major features with one label per row.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledData {
    pub features: DenseMatrix,
    pub labels: Vec<Label>,
}

impl LabeledData {
    pub fn new(features: DenseMatrix, labels: Vec<Label>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::DimensionMismatch { expected: features.rows(), actual: labels.len() });
        }
        Ok(Self { features, labels })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<Label>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(DenseMatrix::new(rows.len(), dim, data), labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledData {
        let dim = self.dim();
        let mut data = Vec::with_capacity(indices.len() * dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        LabeledData {
            features: DenseMatrix::new(indices.len(), dim, data),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Rejects empty, single-class, or non-finite training data.
    pub fn validate_for_training(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(Error::InvalidArgument("features must have at least one dimension".into()));
        }
        let bad = self.labels.iter().filter(|&&l| l == Label::Bad).count();
        if bad == 0 || bad == self.len() {
            return Err(Error::SingleClass);
        }
        for i in 0..self.len() {
            if let Some(d) = self.row(i).iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { sample: i, dim: d });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    GaussianSvm,
    CubicSvm,
    Qd,
    Lr,
    Ld,
    /// Nearest-neighbour smashed-filter baseline; off by default.
    Nn,
}

impl ClassifierKind {
    /// Default reporting roster, in table column order.
    pub const ROSTER: [ClassifierKind; 5] =
        [ClassifierKind::GaussianSvm, ClassifierKind::CubicSvm, ClassifierKind::Qd, ClassifierKind::Lr, ClassifierKind::Ld];
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::GaussianSvm,
        ClassifierKind::CubicSvm,
        ClassifierKind::Qd,
        ClassifierKind::Lr,
        ClassifierKind::Ld,
        ClassifierKind::Nn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::GaussianSvm => "gaussian_svm",
            ClassifierKind::CubicSvm => "cubic_svm",
            ClassifierKind::Qd => "qd",
            ClassifierKind::Lr => "lr",
            ClassifierKind::Ld => "ld",
            ClassifierKind::Nn => "nn",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "gaussian_svm" | "gsvm" => Ok(ClassifierKind::GaussianSvm),
            "cubic_svm" | "csvm" => Ok(ClassifierKind::CubicSvm),
            "qd" => Ok(ClassifierKind::Qd),
            "lr" | "logreg" => Ok(ClassifierKind::Lr),
            "ld" => Ok(ClassifierKind::Ld),
            "nn" => Ok(ClassifierKind::Nn),
            other => Err(format!("unknown classifier {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelSpec {
    Linear,
    /// `(scale * <x, y> / dim + offset) ^ degree`
    Polynomial { degree: u32, scale: f64, offset: f64 },
    /// `exp(-gamma * ||x - y||^2)`
    Rbf { gamma: f64 },
}

impl KernelSpec {
    pub fn cubic(scale: f64) -> Self {
        KernelSpec::Polynomial { degree: 3, scale, offset: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Polynomial { degree, scale, offset } => {
                if degree < 1 || !(scale > 0.0) || !offset.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "polynomial kernel needs degree >= 1 and scale > 0 (got {degree}, {scale})"
                    )));
                }
                Ok(())
            }
            KernelSpec::Rbf { gamma } if gamma > 0.0 && gamma.is_finite() => Ok(()),
            KernelSpec::Rbf { gamma } => Err(Error::InvalidArgument(format!("rbf gamma must be positive, got {gamma}"))),
        }
    }

    /// Kernel value from `<x, y>`, `||x||^2`, `||y||^2` in `dim` dimensions.
    #[inline]
    pub fn from_dot(&self, dot: f64, xx: f64, yy: f64, dim: usize) -> f64 {
        match *self {
            KernelSpec::Linear => dot,
            KernelSpec::Polynomial { degree, scale, offset } => (scale * dot / dim as f64 + offset).powi(degree as i32),
            KernelSpec::Rbf { gamma } => (-gamma * (xx + yy - 2.0 * dot).max(0.0)).exp(),
        }
    }

    /// Width parameter used to order grid points from simple to complex.
    pub fn complexity(&self) -> f64 {
        match *self {
            KernelSpec::Linear => 0.0,
            KernelSpec::Polynomial { scale, .. } => scale,
            KernelSpec::Rbf { gamma } => gamma,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Hyperparams {
    /// Gaussian class models with ridge `ridge_factor * trace(cov) / dim`.
    Discriminant { ridge_factor: f64 },
    Logistic { lambda: f64 },
    Svm { c: f64, kernel: KernelSpec },
    NearestNeighbor,
}

impl Hyperparams {
    pub const DEFAULT_RIDGE_FACTOR: f64 = 1e-6;

    pub fn validate(&self) -> Result<()> {
        match *self {
            Hyperparams::Discriminant { ridge_factor } if ridge_factor >= 0.0 => Ok(()),
            Hyperparams::Logistic { lambda } if lambda > 0.0 => Ok(()),
            Hyperparams::Svm { c, kernel } if c > 0.0 => kernel.validate(),
            Hyperparams::NearestNeighbor => Ok(()),
            other => Err(Error::InvalidArgument(format!("invalid hyperparameters {other:?}"))),
        }
    }

    /// Sort key; smaller is simpler (narrower kernel, stronger regularization).
    pub fn simplicity_key(&self) -> (f64, f64) {
        match *self {
            Hyperparams::Discriminant { ridge_factor } => (0.0, -ridge_factor),
            Hyperparams::Logistic { lambda } => (0.0, -lambda),
            Hyperparams::Svm { c, kernel } => (kernel.complexity(), c),
            Hyperparams::NearestNeighbor => (0.0, 0.0),
        }
    }

    pub fn compatible_with(&self, kind: ClassifierKind) -> bool {
        matches!(
            (kind, self),
            (ClassifierKind::Ld | ClassifierKind::Qd, Hyperparams::Discriminant { .. })
                | (ClassifierKind::Lr, Hyperparams::Logistic { .. })
                | (ClassifierKind::CubicSvm, Hyperparams::Svm { kernel: KernelSpec::Polynomial { .. }, .. })
                | (ClassifierKind::GaussianSvm, Hyperparams::Svm { kernel: KernelSpec::Rbf { .. }, .. })
                | (ClassifierKind::Nn, Hyperparams::NearestNeighbor)
        )
    }
}

impl fmt::Display for Hyperparams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Hyperparams::Discriminant { ridge_factor } => write!(f, "ridge_factor={ridge_factor}"),
            Hyperparams::Logistic { lambda } => write!(f, "lambda={lambda}"),
            Hyperparams::Svm { c, kernel: KernelSpec::Linear } => write!(f, "C={c} kernel=linear"),
            Hyperparams::Svm { c, kernel: KernelSpec::Polynomial { degree, scale, offset } } => {
                write!(f, "C={c} kernel=poly(degree={degree},scale={scale},offset={offset})")
            }
            Hyperparams::Svm { c, kernel: KernelSpec::Rbf { gamma } } => write!(f, "C={c} kernel=rbf(gamma={gamma})"),
            Hyperparams::NearestNeighbor => f.write_str("1-nn"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelParams {
    Ld(LinearDiscriminant),
    Qd(QuadraticDiscriminant),
    Lr(LogisticRegression),
    Svm(SupportVectorMachine),
    Nn(NearestNeighbor),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    pub kind: ClassifierKind,
    pub hyperparams: Hyperparams,
    pub standardizer: Standardizer,
    pub params: ModelParams,
}

/// Fits `kind` on `data`.
pub fn train(kind: ClassifierKind, data: &LabeledData, hyper: &Hyperparams) -> Result<TrainedClassifier> {
    data.validate_for_training()?;
    hyper.validate()?;
    if !hyper.compatible_with(kind) {
        return Err(Error::InvalidArgument(format!("hyperparameters {hyper} do not fit classifier {kind}")));
    }
    let standardizer = Standardizer::fit(&data.features);
    let z = LabeledData { features: standardizer.transform(&data.features), labels: data.labels.clone() };
    let params = match (kind, *hyper) {
        (ClassifierKind::Ld, Hyperparams::Discriminant { ridge_factor }) => {
            ModelParams::Ld(LinearDiscriminant::fit(&z, ridge_factor)?)
        }
        (ClassifierKind::Qd, Hyperparams::Discriminant { ridge_factor }) => {
            ModelParams::Qd(QuadraticDiscriminant::fit(&z, ridge_factor)?)
        }
        (ClassifierKind::Lr, Hyperparams::Logistic { lambda }) => ModelParams::Lr(LogisticRegression::fit(&z, lambda)?),
        (ClassifierKind::CubicSvm | ClassifierKind::GaussianSvm, Hyperparams::Svm { c, kernel }) => {
            ModelParams::Svm(SupportVectorMachine::fit(&z, c, kernel)?)
        }
        (ClassifierKind::Nn, Hyperparams::NearestNeighbor) => ModelParams::Nn(NearestNeighbor::fit(&z)),
        _ => unreachable!("compatibility checked above"),
    };
    Ok(TrainedClassifier { kind, hyperparams: *hyper, standardizer, params })
}

/// Fits an SVM from already standardized features and their Gram matrix
/// `Z Z^T`, so grid searches can share one Gram per fold.
pub fn train_svm_standardized(
    kind: ClassifierKind,
    standardizer: Standardizer,
    z: &LabeledData,
    dot_gram: &DenseMatrix,
    hyper: &Hyperparams,
) -> Result<TrainedClassifier> {
    z.validate_for_training()?;
    hyper.validate()?;
    let Hyperparams::Svm { c, kernel } = *hyper else {
        return Err(Error::InvalidArgument(format!("{hyper} is not an SVM configuration")));
    };
    if !hyper.compatible_with(kind) {
        return Err(Error::InvalidArgument(format!("hyperparameters {hyper} do not fit classifier {kind}")));
    }
    let svm = SupportVectorMachine::fit_with_gram(z, dot_gram, c, kernel)?;
    Ok(TrainedClassifier { kind, hyperparams: *hyper, standardizer, params: ModelParams::Svm(svm) })
}

impl TrainedClassifier {
    pub fn dim(&self) -> usize {
        self.standardizer.dim()
    }

    /// Decision score on standardized features; positive means bad.
    fn score_standardized(&self, z: &[f64]) -> f64 {
        match &self.params {
            ModelParams::Ld(m) => m.score(z),
            ModelParams::Qd(m) => m.score(z),
            ModelParams::Lr(m) => m.score(z),
            ModelParams::Svm(m) => m.decision(z),
            ModelParams::Nn(m) => m.score(z),
        }
    }

    pub fn decision_score(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: y.len() });
        }
        if let Some(d) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { sample: 0, dim: d });
        }
        let score = self.score_standardized(&self.standardizer.apply(y));
        if !score.is_finite() {
            return Err(Error::Numerical(format!("{} produced a non-finite score", self.kind)));
        }
        Ok(score)
    }

    pub fn predict(&self, y: &[f64]) -> Result<(Label, f64)> {
        let score = self.decision_score(y)?;
        Ok((label_from_score(score), score))
    }

    /// False only for an SVM whose solver ran out of budget.
    pub fn converged(&self) -> bool {
        match &self.params {
            ModelParams::Svm(m) => m.stats.converged,
            _ => true,
        }
    }

    /// Largest SVM KKT violation on `data` (raw features); `None` for other kinds.
    pub fn kkt_residual(&self, data: &LabeledData) -> Option<f64> {
        let ModelParams::Svm(m) = &self.params else { return None };
        let z = LabeledData { features: self.standardizer.transform(&data.features), labels: data.labels.clone() };
        Some(m.kkt_residual(&z))
    }

    pub fn predict_many(&self, features: &DenseMatrix) -> Result<Vec<(Label, f64)>> {
        (0..features.rows()).map(|i| self.predict(features.row(i))).collect()
    }
}
