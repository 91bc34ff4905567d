//! Stratified k-fold cross-validation over a hyperparameter grid.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{kernel_gram, train, train_svm_standardized, ClassifierKind, Hyperparams, KernelSpec, LabeledData, Standardizer};
use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::seed;

pub const DEFAULT_CV_SEED: u64 = 0x0c0f_fee5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvPoint {
    pub hyperparams: Hyperparams,
    /// Percent correct on each held-out fold.
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Every fold's fit reached its optimality tolerance.
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub kind: ClassifierKind,
    pub k: usize,
    pub best: Hyperparams,
    pub best_accuracy: f64,
    /// Deduplicated grid, simplest first.
    pub points: Vec<CvPoint>,
}

const CUBIC_CS: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];

/// Standard grid for `kind` at measurement length `m`. The cubic kernel gets
/// half-decade scales and weaker regularization.
pub fn default_grid(kind: ClassifierKind, m: usize) -> Vec<Hyperparams> {
    let cs = [0.1, 1.0, 10.0];
    match kind {
        ClassifierKind::GaussianSvm => [0.01, 0.1, 1.0]
            .iter()
            .flat_map(|g| cs.iter().map(move |&c| Hyperparams::Svm { c, kernel: KernelSpec::Rbf { gamma: g / m as f64 } }))
            .collect(),
        ClassifierKind::CubicSvm => [0.1, 0.3, 1.0]
            .iter()
            .flat_map(|&s| CUBIC_CS.iter().map(move |&c| Hyperparams::Svm { c, kernel: KernelSpec::cubic(s) }))
            .collect(),
        ClassifierKind::Lr => [1e-4, 1e-2, 1.0].iter().map(|&lambda| Hyperparams::Logistic { lambda }).collect(),
        ClassifierKind::Ld | ClassifierKind::Qd => {
            vec![Hyperparams::Discriminant { ridge_factor: Hyperparams::DEFAULT_RIDGE_FACTOR }]
        }
        ClassifierKind::Nn => vec![Hyperparams::NearestNeighbor],
    }
}

/// Held-out index sets; each label is shuffled then dealt round-robin.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k-fold needs k >= 2, got {k}")));
    }
    if labels.len() < k {
        return Err(Error::InvalidArgument(format!("{} samples cannot fill {k} folds", labels.len())));
    }
    let mut folds = vec![Vec::new(); k];
    let mut offset = 0;
    for label in [Label::Good, Label::Bad] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        idx.shuffle(&mut seed::rng(seed::derive_str(seed, label.as_str())));
        for (pos, i) in idx.into_iter().enumerate() {
            folds[(pos + offset) % k].push(i);
        }
        offset += labels.len();
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

pub fn kfold_cv(kind: ClassifierKind, data: &LabeledData, k: usize, grid: &[Hyperparams]) -> Result<CvResult> {
    kfold_cv_seeded(kind, data, k, grid, DEFAULT_CV_SEED)
}

fn accuracy(model: &super::TrainedClassifier, data: &LabeledData, idx: &[usize]) -> Result<(f64, bool)> {
    let mut correct = 0usize;
    for &i in idx {
        if model.predict(data.row(i))?.0 == data.labels[i] {
            correct += 1;
        }
    }
    Ok((100.0 * correct as f64 / idx.len() as f64, model.converged()))
}

pub fn kfold_cv_seeded(
    kind: ClassifierKind,
    data: &LabeledData,
    k: usize,
    grid: &[Hyperparams],
    seed: u64,
) -> Result<CvResult> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty hyperparameter grid".into()));
    }
    let mut points: Vec<Hyperparams> = Vec::new();
    for h in grid {
        h.validate()?;
        if !h.compatible_with(kind) {
            return Err(Error::InvalidArgument(format!("hyperparameters {h} do not fit classifier {kind}")));
        }
        if !points.contains(h) {
            points.push(*h);
        }
    }
    points.sort_by(|a, b| {
        let (ka, kb) = (a.simplicity_key(), b.simplicity_key());
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    let folds = stratified_folds(&data.labels, k, seed)?;
    let is_svm = matches!(kind, ClassifierKind::CubicSvm | ClassifierKind::GaussianSvm);

    let mut fold_scores = vec![Vec::with_capacity(k); points.len()];
    for held in &folds {
        let mut in_held = vec![false; data.len()];
        for &i in held {
            in_held[i] = true;
        }
        let train_idx: Vec<usize> = (0..data.len()).filter(|&i| !in_held[i]).collect();
        let train_set = data.subset(&train_idx);
        let accs: Vec<(f64, bool)> = if is_svm {
            let standardizer = Standardizer::fit(&train_set.features);
            let z = LabeledData { features: standardizer.transform(&train_set.features), labels: train_set.labels.clone() };
            let gram = kernel_gram(&z.features);
            points
                .par_iter()
                .map(|h| {
                    let model = train_svm_standardized(kind, standardizer.clone(), &z, &gram, h)?;
                    accuracy(&model, data, held)
                })
                .collect::<Result<_>>()?
        } else {
            points
                .par_iter()
                .map(|h| accuracy(&train(kind, &train_set, h)?, data, held))
                .collect::<Result<_>>()?
        };
        for (s, a) in fold_scores.iter_mut().zip(accs) {
            s.push(a);
        }
    }

    let cv_points: Vec<CvPoint> = points
        .iter()
        .zip(fold_scores)
        .map(|(h, fits)| {
            let accs: Vec<f64> = fits.iter().map(|f| f.0).collect();
            CvPoint {
                hyperparams: *h,
                mean_accuracy: accs.iter().sum::<f64>() / accs.len() as f64,
                fold_accuracies: accs,
                converged: fits.iter().all(|f| f.1),
            }
        })
        .collect();
    // unconverged fits compete only when nothing converged
    let any_converged = cv_points.iter().any(|p| p.converged);
    let eligible = |p: &CvPoint| p.converged || !any_converged;
    let mut best = cv_points.iter().position(eligible).unwrap_or(0);
    for (i, p) in cv_points.iter().enumerate() {
        if eligible(p) && p.mean_accuracy > cv_points[best].mean_accuracy {
            best = i;
        }
    }
    Ok(CvResult {
        kind,
        k,
        best: cv_points[best].hyperparams,
        best_accuracy: cv_points[best].mean_accuracy,
        points: cv_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> LabeledData {
        // two clusters with margin well above one after standardization
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            let t = i as f64 * 0.05;
            rows.push(vec![-3.0 + t, t]);
            labels.push(Label::Good);
            rows.push(vec![3.0 - t, -t]);
            labels.push(Label::Bad);
        }
        LabeledData::from_rows(&rows, labels).unwrap()
    }

    #[test]
    fn folds_partition_and_stratify() {
        let data = toy();
        let folds = stratified_folds(&data.labels, 5, 3).unwrap();
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..data.len()).collect::<Vec<_>>());
        for f in &folds {
            assert_eq!(f.iter().filter(|&&i| data.labels[i] == Label::Bad).count(), 4);
        }
        assert!(stratified_folds(&data.labels, 1, 0).is_err());
        assert!(stratified_folds(&data.labels[..3], 4, 0).is_err());
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(kfold_cv(ClassifierKind::Ld, &toy(), 5, &[]).is_err());
    }

    #[test]
    fn single_point_grid() {
        let h = Hyperparams::Logistic { lambda: 1e-2 };
        let r = kfold_cv(ClassifierKind::Lr, &toy(), 5, &[h]).unwrap();
        assert_eq!(r.best, h);
        assert_eq!(r.points.len(), 1);
        assert_eq!(r.best_accuracy, r.points[0].mean_accuracy);
    }

    #[test]
    fn duplicates_do_not_change_winner() {
        let grid = default_grid(ClassifierKind::GaussianSvm, 2);
        let mut doubled = grid.clone();
        doubled.extend(grid.iter().rev().copied());
        let a = kfold_cv(ClassifierKind::GaussianSvm, &toy(), 5, &grid).unwrap();
        let b = kfold_cv(ClassifierKind::GaussianSvm, &toy(), 5, &doubled).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn separable_svm_is_perfect() {
        for c in [1.0, 10.0, 100.0] {
            let h = Hyperparams::Svm { c, kernel: KernelSpec::cubic(1.0) };
            let r = kfold_cv(ClassifierKind::CubicSvm, &toy(), 5, &[h]).unwrap();
            assert_eq!(r.best_accuracy, 100.0, "C = {c}");
        }
    }

    #[test]
    fn ties_go_to_simplest() {
        let grid = default_grid(ClassifierKind::CubicSvm, 2);
        let r = kfold_cv(ClassifierKind::CubicSvm, &toy(), 5, &grid).unwrap();
        // every point is perfect on separable clusters
        assert_eq!(r.best, Hyperparams::Svm { c: 1.0, kernel: KernelSpec::cubic(0.1) });
    }
}
