//! Experiment orchestration: dataset, measurements, classifier sweep and
//! privacy audit, with every table written as CSV.

mod audit;
mod config;
mod experiment;
mod split;

pub use audit::{privacy_audit, AuditCell, AuditConfig, AuditReport, AuditSample, LEGIBILITY_DISTRACTORS};
pub use config::{
    ExperimentConfig, DEFAULT_AUDIT_M, DEFAULT_AUDIT_THRESHOLD_DB, DEFAULT_M, DEFAULT_SEED, DESK_TEST_PER_LABEL,
    DESK_TRAIN_PER_LABEL, DESK_WORDS, FULL_TEST_PER_LABEL, FULL_TRAIN_PER_LABEL,
};
pub use experiment::{
    fit_and_evaluate, measure_ids, misclass_report, obtain_dataset, paired_words, run_experiment, to_holdout, to_labeled,
    word_of, write_accuracy_table, write_tables, ClassifierFailure, CvSummary, MisclassSummary, RunRecord, RunSeeds, StageTime,
    ACCURACY_TABLE, CONFUSION_FILE, CV_FILE, HISTOGRAM_FILE, MISCLASSIFIED_FILE, MISCLASS_REPORT_FILE, RUN_RECORD,
    SPLIT_FILE,
};
pub use split::Split;

use crate::seed;

/// Key seed for measurement length `m`; shared by the sweep and the audit.
pub fn matrix_seed(global_seed: u64, m: usize) -> u64 {
    seed::derive(seed::derive_str(global_seed, "harness/matrix"), m as u64)
}

pub fn split_seed(global_seed: u64) -> u64 {
    seed::derive_str(global_seed, "harness/split")
}
