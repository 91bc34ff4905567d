//! The measurement-domain classification sweep over M.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::audit::{privacy_audit, AuditConfig, AuditReport, AuditSample};
use super::config::ExperimentConfig;
use super::split::Split;
use super::{matrix_seed, split_seed};
use crate::classify::{
    default_grid, evaluate_holdout, kfold_cv_seeded, save_model, train, ClassifierKind, CvResult, EvalReport,
    HoldoutSet, LabeledData, DEFAULT_CV_SEED,
};
use crate::dataset::{generate_dataset, load_dataset, Dataset, DatasetManifest, ErrorKind, Label};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::operator::DenseMatrix;
use crate::seed;
use crate::sensing::{measure_batch, MeasurementRecord, MeasurementSet, SensingMatrix};
use crate::wavelet::Dwt2;

pub const ACCURACY_TABLE: &str = "accuracy_table.csv";
pub const CONFUSION_FILE: &str = "confusion.csv";
pub const CV_FILE: &str = "cv.csv";
pub const MISCLASSIFIED_FILE: &str = "misclassified.csv";
pub const MISCLASS_REPORT_FILE: &str = "misclass_report.csv";
pub const HISTOGRAM_FILE: &str = "char_histogram.csv";
pub const SPLIT_FILE: &str = "split.csv";
pub const RUN_RECORD: &str = "run_record.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub global: u64,
    pub split: u64,
    pub cv: u64,
    /// `(M, matrix seed)`
    pub matrices: Vec<(usize, u64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub m: usize,
    pub result: CvResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierFailure {
    pub classifier: ClassifierKind,
    pub m: usize,
    pub error: String,
}

/// Per-classifier breakdown of holdout mistakes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MisclassSummary {
    pub classifier: Option<ClassifierKind>,
    pub m: usize,
    pub char_histogram: BTreeMap<char, usize>,
    pub bad_as_good: usize,
    pub good_as_bad: usize,
    /// Misclassified bad images by injected artifact.
    pub by_error: BTreeMap<ErrorKind, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: String,
    pub seeds: RunSeeds,
    pub train_words: usize,
    pub test_words: usize,
    pub stage_times: Vec<StageTime>,
    /// Paths relative to the output directory.
    pub artifacts: Vec<String>,
    pub cv: Vec<CvSummary>,
    pub reports: Vec<EvalReport>,
    pub misclass: Vec<MisclassSummary>,
    pub failures: Vec<ClassifierFailure>,
    pub audit: Option<AuditReport>,
}

impl RunRecord {
    pub fn report(&self, kind: ClassifierKind, m: usize) -> Option<&EvalReport> {
        self.reports.iter().find(|r| r.classifier == kind && r.m == m)
    }

    pub fn accuracy(&self, kind: ClassifierKind, m: usize) -> Option<f64> {
        self.report(kind, m).map(|r| r.accuracy)
    }
}

/// Character histogram, direction counts and per-artifact counts of the
/// mistakes in `report`. Error kinds come from `manifest`.
pub fn misclass_report(report: &EvalReport, manifest: &DatasetManifest) -> MisclassSummary {
    let kinds: HashMap<&str, ErrorKind> = manifest.entries.iter().map(|e| (e.image_id.as_str(), e.error)).collect();
    let mut by_error = BTreeMap::new();
    for x in &report.misclassified {
        if x.truth == Label::Bad {
            if let Some(&k) = kinds.get(x.image_id.as_str()) {
                *by_error.entry(k).or_insert(0) += 1;
            }
        }
    }
    MisclassSummary {
        classifier: Some(report.classifier),
        m: report.m,
        char_histogram: report.char_histogram.clone(),
        bad_as_good: report.misclassified.iter().filter(|x| x.truth == Label::Bad).count(),
        good_as_bad: report.misclassified.iter().filter(|x| x.truth == Label::Good).count(),
        by_error,
    }
}

/// Words that have both a good and a bad image.
pub fn paired_words(manifest: &DatasetManifest) -> Vec<String> {
    let mut seen: BTreeMap<&str, [bool; 2]> = BTreeMap::new();
    for e in &manifest.entries {
        seen.entry(e.word.as_str()).or_default()[e.label.code() as usize] = true;
    }
    seen.into_iter().filter(|(_, b)| b[0] && b[1]).map(|(w, _)| w.to_string()).collect()
}

/// Measures `ids` with `matrix`, returning records in `ids` order.
pub fn measure_ids(matrix: &SensingMatrix, dwt: &Dwt2, dataset: &Dataset, ids: &[String]) -> Result<Vec<MeasurementRecord>> {
    let index: HashMap<&str, usize> =
        dataset.manifest.entries.iter().enumerate().map(|(i, e)| (e.image_id.as_str(), i)).collect();
    let mut pairs: Vec<(&str, &GrayImage)> = Vec::with_capacity(ids.len());
    let mut labels = Vec::with_capacity(ids.len());
    for id in ids {
        let &i = index.get(id.as_str()).ok_or_else(|| Error::MissingImage { image_id: id.clone() })?;
        pairs.push((id.as_str(), &dataset.images[i]));
        labels.push(dataset.manifest.entries[i].label);
    }
    Ok(measure_batch(matrix, dwt, &pairs)?
        .into_iter()
        .zip(labels)
        .map(|(y, label)| MeasurementRecord { image_id: y.image_id, label, values: y.values })
        .collect())
}

/// Word part of an id such as `bad-WAX`.
pub fn word_of(image_id: &str) -> &str {
    image_id.split_once('-').map_or(image_id, |(_, w)| w)
}

pub fn to_labeled(records: &[MeasurementRecord]) -> Result<LabeledData> {
    let dim = records.first().map_or(0, |r| r.values.len());
    let mut data = Vec::with_capacity(records.len() * dim);
    for r in records {
        if r.values.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: r.values.len() });
        }
        data.extend_from_slice(&r.values);
    }
    LabeledData::new(DenseMatrix::new(records.len(), dim, data), records.iter().map(|r| r.label).collect())
}

pub fn to_holdout(records: &[MeasurementRecord]) -> Result<HoldoutSet> {
    HoldoutSet::new(
        records.iter().map(|r| r.image_id.clone()).collect(),
        records.iter().map(|r| word_of(&r.image_id).to_string()).collect(),
        to_labeled(records)?,
    )
}

/// Cross-validates `kind` on `train_set`, refits on all of it and scores the holdout.
pub fn fit_and_evaluate(
    kind: ClassifierKind,
    m: usize,
    folds: usize,
    cv_seed: u64,
    train_set: &LabeledData,
    train_ids: &[String],
    test: &HoldoutSet,
) -> Result<(CvResult, crate::classify::TrainedClassifier, EvalReport)> {
    let cv = kfold_cv_seeded(kind, train_set, folds, &default_grid(kind, m), cv_seed)?;
    let model = train(kind, train_set, &cv.best)?;
    let report = evaluate_holdout(&model, m, train_ids, test)?;
    Ok((cv, model, report))
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    fs::write(path, w.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;
    Ok(())
}

fn stage<T>(name: &'static str, times: &mut Vec<StageTime>, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f().map_err(|e| e.in_stage(name))?;
    times.push(StageTime { stage: name.to_string(), seconds: start.elapsed().as_secs_f64() });
    Ok(out)
}

/// Writes the accuracy table shaped rows = M (descending) by columns = classifiers.
pub fn write_accuracy_table(path: &Path, m_list: &[usize], roster: &[ClassifierKind], reports: &[EvalReport]) -> Result<()> {
    let mut header = vec!["M"];
    header.extend(roster.iter().map(|k| k.as_str()));
    let rows: Vec<Vec<String>> = m_list
        .iter()
        .map(|&m| {
            let mut row = vec![m.to_string()];
            row.extend(roster.iter().map(|&k| {
                reports.iter().find(|r| r.classifier == k && r.m == m).map_or(String::new(), |r| format!("{:.4}", r.accuracy))
            }));
            row
        })
        .collect();
    write_csv(path, &header, &rows)
}

/// Writes the accuracy, confusion, CV, misclassification and histogram
/// tables; returns their file names.
pub fn write_tables(
    dir: &Path,
    m_list: &[usize],
    roster: &[ClassifierKind],
    cv: &[CvSummary],
    reports: &[EvalReport],
    misclass: &[MisclassSummary],
) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    write_accuracy_table(&dir.join(ACCURACY_TABLE), m_list, roster, reports)?;

    let confusion: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let c = &r.confusion;
            vec![
                r.classifier.to_string(),
                r.m.to_string(),
                c.get(Label::Good, Label::Good).to_string(),
                c.get(Label::Good, Label::Bad).to_string(),
                c.get(Label::Bad, Label::Good).to_string(),
                c.get(Label::Bad, Label::Bad).to_string(),
                format!("{:.4}", r.accuracy),
            ]
        })
        .collect();
    write_csv(
        &dir.join(CONFUSION_FILE),
        &["classifier", "M", "good_as_good", "good_as_bad", "bad_as_good", "bad_as_bad", "accuracy"],
        &confusion,
    )?;

    let mut cv_rows = Vec::new();
    for s in cv {
        for p in &s.result.points {
            cv_rows.push(vec![
                s.result.kind.to_string(),
                s.m.to_string(),
                p.hyperparams.to_string(),
                format!("{:.4}", p.mean_accuracy),
                p.fold_accuracies.iter().map(|a| format!("{a:.4}")).collect::<Vec<_>>().join(";"),
                u8::from(p.converged).to_string(),
                u8::from(p.hyperparams == s.result.best).to_string(),
            ]);
        }
    }
    write_csv(&dir.join(CV_FILE), &["classifier", "M", "hyperparams", "mean_accuracy", "fold_accuracies", "converged", "selected"], &cv_rows)?;

    let mut mis = Vec::new();
    for r in reports {
        for x in &r.misclassified {
            mis.push(vec![
                r.classifier.to_string(),
                r.m.to_string(),
                x.image_id.clone(),
                x.word.clone(),
                x.truth.to_string(),
                x.predicted.to_string(),
                format!("{:.6e}", x.score),
            ]);
        }
    }
    write_csv(&dir.join(MISCLASSIFIED_FILE), &["classifier", "M", "image_id", "word", "truth", "predicted", "score"], &mis)?;

    let summaries: Vec<Vec<String>> = misclass
        .iter()
        .map(|s| {
            let mut row = vec![
                s.classifier.map_or(String::new(), |k| k.to_string()),
                s.m.to_string(),
                (s.bad_as_good + s.good_as_bad).to_string(),
                s.bad_as_good.to_string(),
                s.good_as_bad.to_string(),
            ];
            row.extend(ErrorKind::INJECTABLE.iter().map(|k| s.by_error.get(k).copied().unwrap_or(0).to_string()));
            row
        })
        .collect();
    write_csv(
        &dir.join(MISCLASS_REPORT_FILE),
        &["classifier", "M", "misclassified", "bad_as_good", "good_as_bad", "blot", "drag_line", "slip_line"],
        &summaries,
    )?;

    let mut hist = Vec::new();
    for s in misclass {
        for (ch, n) in &s.char_histogram {
            hist.push(vec![s.classifier.map_or(String::new(), |k| k.to_string()), s.m.to_string(), ch.to_string(), n.to_string()]);
        }
    }
    write_csv(&dir.join(HISTOGRAM_FILE), &["classifier", "M", "char", "count"], &hist)?;

    Ok([ACCURACY_TABLE, CONFUSION_FILE, CV_FILE, MISCLASSIFIED_FILE, MISCLASS_REPORT_FILE, HISTOGRAM_FILE]
        .iter()
        .map(|s| s.to_string())
        .collect())
}

/// Generates or loads the dataset named by `cfg`.
pub fn obtain_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    match &cfg.dataset_dir {
        Some(dir) => load_dataset(dir),
        None => generate_dataset(cfg.global_seed, cfg.scale),
    }
}

/// Runs the whole sweep and writes every table into `cfg.output_dir`.
/// A classifier that fails at some M is recorded and the sweep continues.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let mut cfg = cfg.clone();
    cfg.validate().map_err(|e| e.in_stage("config"))?;
    let mut times = Vec::new();
    let out = cfg.output_dir.clone();
    fs::create_dir_all(&out).map_err(|e| Error::from(e).in_stage("config"))?;

    let dataset = stage("generate", &mut times, || obtain_dataset(&cfg))?;
    let (n_train, n_test) = cfg.split_sizes()?;
    let split_seed = split_seed(cfg.global_seed);
    let split = stage("split", &mut times, || {
        let split = Split::new(&paired_words(&dataset.manifest), n_train, n_test, split_seed)?;
        split.write_csv(&out.join(SPLIT_FILE))?;
        Ok(split)
    })?;
    let (train_ids, test_ids) = (split.train_ids(), split.test_ids());
    let dwt = Dwt2::new(cfg.levels);
    let cv_seed = seed::derive(cfg.global_seed, DEFAULT_CV_SEED);

    let mut artifacts = vec![SPLIT_FILE.to_string()];
    let mut seeds = RunSeeds { global: cfg.global_seed, split: split_seed, cv: cv_seed, matrices: Vec::new() };
    let (mut cv, mut reports, mut failures) = (Vec::new(), Vec::new(), Vec::new());
    for &m in &cfg.m_list {
        let mseed = matrix_seed(cfg.global_seed, m);
        seeds.matrices.push((m, mseed));
        let (train_records, test_records) = stage("compress", &mut times, || {
            let matrix = SensingMatrix::generate(m, cfg.domain.signal_len(), mseed, cfg.domain)?;
            let train_records = measure_ids(&matrix, &dwt, &dataset, &train_ids)?;
            let test_records = measure_ids(&matrix, &dwt, &dataset, &test_ids)?;
            if cfg.write_measurements {
                fs::create_dir_all(out.join("measurements"))?;
                let name = format!("measurements/m{m}.csv");
                let mut records = train_records.clone();
                records.extend(test_records.iter().cloned());
                MeasurementSet { m, seed: mseed, domain: cfg.domain, records }.write_csv(&out.join(&name))?;
                artifacts.push(name);
            }
            Ok((train_records, test_records))
        })?;
        let train_set = to_labeled(&train_records).map_err(|e| e.in_stage("train"))?;
        let test = to_holdout(&test_records).map_err(|e| e.in_stage("evaluate"))?;
        for &kind in &cfg.classifiers {
            let start = Instant::now();
            match fit_and_evaluate(kind, m, cfg.cv_folds, cv_seed, &train_set, &train_ids, &test) {
                Ok((result, model, report)) => {
                    if cfg.save_models {
                        fs::create_dir_all(out.join("models")).map_err(|e| Error::from(e).in_stage("train"))?;
                        let name = format!("models/{kind}_m{m}.json");
                        save_model(&model, &out.join(&name)).map_err(|e| e.in_stage("train"))?;
                        artifacts.push(name);
                    }
                    cv.push(CvSummary { m, result });
                    reports.push(report);
                }
                Err(e) => failures.push(ClassifierFailure { classifier: kind, m, error: e.to_string() }),
            }
            times.push(StageTime { stage: format!("train/{kind}/m{m}"), seconds: start.elapsed().as_secs_f64() });
        }
    }

    let misclass = reports.iter().map(|r| misclass_report(r, &dataset.manifest)).collect();
    let audit = if cfg.audit_ids.is_empty() {
        None
    } else {
        let acfg = AuditConfig {
            global_seed: cfg.global_seed,
            m_list: cfg.audit_m.clone(),
            domain: cfg.domain,
            levels: cfg.levels,
            solver: cfg.solver.clone(),
            threshold_db: cfg.audit_threshold_db,
        };
        let report = stage("audit", &mut times, || {
            let samples = AuditSample::from_dataset(&dataset, &cfg.audit_ids)?;
            privacy_audit(&acfg, &samples, Some(&out.join("audit")))
        })?;
        artifacts.push("audit/audit.csv".into());
        artifacts.push("audit/grid.pgm".into());
        Some(report)
    };

    let mut record = RunRecord {
        config: cfg.to_text(),
        seeds,
        train_words: split.train_words.len(),
        test_words: split.test_words.len(),
        stage_times: times,
        artifacts,
        cv,
        reports,
        misclass,
        failures,
        audit,
    };
    let start = Instant::now();
    let written = write_tables(&out, &cfg.m_list, &cfg.classifiers, &record.cv, &record.reports, &record.misclass).map_err(|e| e.in_stage("report"))?;
    record.stage_times.push(StageTime { stage: "report".into(), seconds: start.elapsed().as_secs_f64() });
    record.artifacts.extend(written);
    record.artifacts.push(RUN_RECORD.into());
    fs::write(out.join(RUN_RECORD), serde_json::to_string_pretty(&record)?).map_err(|e| Error::from(e).in_stage("report"))?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{char_histogram, Confusion, Misclassified};
    use crate::dataset::LabeledSample;

    fn sample(word: &str, label: Label, error: ErrorKind) -> LabeledSample {
        LabeledSample { image_id: LabeledSample::image_id_for(word, label), word: word.into(), label, error, seed: 0 }
    }

    fn report(mis: Vec<Misclassified>) -> EvalReport {
        let words: Vec<&str> = mis.iter().map(|x| x.word.as_str()).collect();
        EvalReport {
            classifier: ClassifierKind::Ld,
            m: 10,
            accuracy: 0.0,
            confusion: Confusion::default(),
            char_histogram: char_histogram(&words),
            misclassified: mis,
        }
    }

    fn miss(word: &str, truth: Label) -> Misclassified {
        let predicted = if truth == Label::Bad { Label::Good } else { Label::Bad };
        Misclassified { image_id: LabeledSample::image_id_for(word, truth), word: word.into(), truth, predicted, score: 0.0 }
    }

    #[test]
    fn empty_report_is_empty() {
        let manifest = DatasetManifest { global_seed: 0, entries: vec![] };
        let s = misclass_report(&report(vec![]), &manifest);
        assert!(s.char_histogram.is_empty());
        assert_eq!((s.bad_as_good, s.good_as_bad), (0, 0));
    }

    #[test]
    fn hand_tally() {
        let manifest = DatasetManifest {
            global_seed: 0,
            entries: vec![
                sample("WAX", Label::Bad, ErrorKind::Blot),
                sample("WIN", Label::Bad, ErrorKind::SlipLine),
                sample("MOM", Label::Good, ErrorKind::None),
                sample("NAB", Label::Bad, ErrorKind::Blot),
            ],
        };
        let s = misclass_report(&report(vec![miss("WAX", Label::Bad)]), &manifest);
        assert_eq!((s.bad_as_good, s.good_as_bad), (1, 0));
        let s = misclass_report(
            &report(vec![miss("WAX", Label::Bad), miss("WIN", Label::Bad), miss("MOM", Label::Good), miss("NAB", Label::Bad)]),
            &manifest,
        );
        assert_eq!((s.bad_as_good, s.good_as_bad), (3, 1));
        assert_eq!(s.by_error.get(&ErrorKind::Blot), Some(&2));
        assert_eq!(s.by_error.get(&ErrorKind::SlipLine), Some(&1));
        assert_eq!(s.char_histogram.get(&'M'), Some(&2));
        assert_eq!(s.char_histogram.get(&'W'), Some(&2));
    }

    #[test]
    fn word_of_strips_label() {
        assert_eq!(word_of("bad-WAX"), "WAX");
        assert_eq!(word_of("good-ABC"), "ABC");
    }
}
