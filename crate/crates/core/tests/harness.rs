use std::fs;
use std::path::Path;
use std::process::Command;

use blindprint::classify::ClassifierKind;
use blindprint::dataset::{render_word, Scale};
use blindprint::harness::*;
use blindprint::image::GrayImage;

fn small_config(out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        scale: Scale::Words(150),
        train_per_label: Some(100),
        test_per_label: Some(50),
        m_list: vec![50],
        classifiers: vec![ClassifierKind::Ld],
        cv_folds: 3,
        output_dir: out.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn accuracy_table_shape() {
    let dir = tempfile::tempdir().unwrap();
    let record = run_experiment(&small_config(dir.path())).unwrap();
    let mut r = csv::Reader::from_path(dir.path().join(ACCURACY_TABLE)).unwrap();
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ["M", "ld"]);
    let rows = csv_rows(&dir.path().join(ACCURACY_TABLE));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "50");
    let acc: f64 = rows[0][1].parse().unwrap();
    assert!((0.0..=100.0).contains(&acc));
    assert_eq!(record.train_words, 100);
    assert_eq!(record.test_words, 50);
    assert!(record.failures.is_empty());
}

#[test]
fn tables_are_consistent_and_split_is_clean() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        m_list: vec![20, 50],
        classifiers: vec![ClassifierKind::Ld, ClassifierKind::Lr],
        ..small_config(dir.path())
    };
    let record = run_experiment(&cfg).unwrap();
    assert_eq!(record.reports.len(), 4);
    for r in &record.reports {
        let c = &r.confusion;
        assert_eq!(c.total(), 100);
        assert!((r.accuracy - 100.0 * c.trace() as f64 / c.total() as f64).abs() < 1e-12);
    }
    // rows sorted descending
    let rows = csv_rows(&dir.path().join(ACCURACY_TABLE));
    assert_eq!(rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["50", "20"]);

    let split = Split::read_csv(&dir.path().join(SPLIT_FILE)).unwrap();
    split.check_disjoint().unwrap();
    // every M measured exactly the split's images
    let train: std::collections::HashSet<String> = split.train_ids().into_iter().collect();
    for m in [20, 50] {
        let set = blindprint::sensing::MeasurementSet::read_csv(&dir.path().join(format!("measurements/m{m}.csv"))).unwrap();
        let ids: std::collections::HashSet<String> =
            set.records.iter().filter(|r| train.contains(&r.image_id)).map(|r| r.image_id.clone()).collect();
        assert_eq!(ids, train);
        assert_eq!(set.records.len(), 300);
    }
    assert_eq!(record.misclass.len(), 4);
    for (s, r) in record.misclass.iter().zip(&record.reports) {
        assert_eq!(s.bad_as_good, r.confusion.bad_as_good());
        assert_eq!(s.good_as_bad, r.confusion.good_as_bad());
    }
}

#[test]
fn identical_runs_write_identical_tables() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&small_config(a.path())).unwrap();
    run_experiment(&small_config(b.path())).unwrap();
    for f in [ACCURACY_TABLE, CONFUSION_FILE, CV_FILE, MISCLASSIFIED_FILE, MISCLASS_REPORT_FILE, HISTOGRAM_FILE, SPLIT_FILE] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn invalid_config_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { m_list: vec![0], ..small_config(dir.path()) };
    let err = run_experiment(&cfg).unwrap_err().to_string();
    assert!(err.contains("config"), "{err}");
    assert!(ExperimentConfig::parse_str("colour = blue\n").is_err());
}

fn word_samples(words: &[&str]) -> Vec<AuditSample> {
    words
        .iter()
        .map(|w| AuditSample { image_id: format!("good-{w}"), word: Some(w.to_string()), image: render_word(w).unwrap() })
        .collect()
}

#[test]
fn audit_without_ids_is_empty() {
    let cfg = AuditConfig { m_list: vec![10], ..AuditConfig::default() };
    let report = privacy_audit(&cfg, &[], None).unwrap();
    assert!(report.cells.is_empty());
}

#[test]
fn blank_page_is_recovered_exactly() {
    let cfg = AuditConfig { m_list: vec![100], ..AuditConfig::default() };
    let blank = AuditSample { image_id: "blank".into(), word: None, image: GrayImage::blank() };
    let report = privacy_audit(&cfg, &[blank], None).unwrap();
    // eight nonzero coefficients; measured near 300 dB
    assert!(report.cells[0].psnr > 100.0, "{}", report.cells[0].psnr);
}

#[test]
fn fewer_measurements_reconstruct_worse() {
    let cfg = AuditConfig { m_list: vec![200, 10], ..AuditConfig::default() };
    let report = privacy_audit(&cfg, &word_samples(&["INK", "TAB", "FOX", "JAM", "RUG"]), None).unwrap();
    assert_eq!(report.cells_at(10).count(), 5);
    for lo in report.cells_at(10) {
        let hi = report.cells_at(200).find(|c| c.image_id == lo.image_id).unwrap();
        assert!(lo.psnr < hi.psnr, "{}: {} vs {}", lo.image_id, lo.psnr, hi.psnr);
    }
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_blindprint")).args(args).output().unwrap()
}

#[test]
fn cli_stages_compose() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).to_string_lossy().into_owned();
    let ok = |o: std::process::Output| {
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8_lossy(&o.stdout).into_owned()
    };
    ok(cli(&["generate", "--seed", "5", "--scale", "words:60", "--out", &p("data")]));
    ok(cli(&["compress", "--data", &p("data"), "--m", "20", "--seed", "5", "--out", &p("meas")]));
    ok(cli(&["train", "--measurements", &p("meas/m20.csv"), "--classifiers", "ld,lr", "--seed", "5", "--out", &p("fit")]));
    let out = ok(cli(&[
        "evaluate",
        "--measurements",
        &p("meas/m20.csv"),
        "--models",
        &p("fit/models"),
        "--split",
        &p("fit/split.csv"),
        "--data",
        &p("data"),
        "--out",
        &p("eval"),
    ]));
    assert!(out.contains("ld M=20"), "{out}");
    let rows = csv_rows(&dir.path().join("eval").join(ACCURACY_TABLE));
    assert_eq!(rows.len(), 1);

    let out = ok(cli(&["audit", "--data", &p("data"), "--ids", "", "--m", "10", "--out", &p("audit")]));
    assert!(out.contains("audit"), "{out}");

    fs::write(dir.path().join("run.cfg"), "scale = words:60\nm_list = 20\nclassifiers = ld\ncv_folds = 3\n").unwrap();
    ok(cli(&["run-all", "--config", &p("run.cfg"), "--out", &p("run")]));
    assert!(dir.path().join("run").join(ACCURACY_TABLE).is_file());
}

#[test]
fn cli_failure_names_stage() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere").to_string_lossy().into_owned();
    let o = cli(&["compress", "--data", &missing, "--m", "20", "--out", &missing]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("stage compress failed"));

    fs::write(dir.path().join("bad.cfg"), "m_lsit = 20\n").unwrap();
    let o = cli(&["run-all", "--config", &dir.path().join("bad.cfg").to_string_lossy()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("stage config failed"));
}
