//! Flat `key = value` experiment configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classify::ClassifierKind;
use crate::dataset::{Scale, WORD_COUNT};
use crate::error::{Error, Result};
use crate::recovery::SolverConfig;
use crate::sensing::Domain;
use crate::wavelet::DEFAULT_LEVELS;

pub const FULL_TRAIN_PER_LABEL: usize = 15000;
pub const FULL_TEST_PER_LABEL: usize = 2576;
pub const DESK_WORDS: usize = 2500;
pub const DESK_TRAIN_PER_LABEL: usize = 2000;
pub const DESK_TEST_PER_LABEL: usize = 500;
pub const DEFAULT_SEED: u64 = 20190;
pub const DEFAULT_M: [usize; 5] = [200, 100, 50, 20, 10];
pub const DEFAULT_AUDIT_M: [usize; 6] = [500, 200, 100, 50, 20, 10];
/// Mean PSNR separating legible from unreadable reconstructions.
pub const DEFAULT_AUDIT_THRESHOLD_DB: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub global_seed: u64,
    pub scale: Scale,
    /// Sorted descending by [`ExperimentConfig::validate`].
    pub m_list: Vec<usize>,
    /// `None` picks the default for the scale.
    pub train_per_label: Option<usize>,
    pub test_per_label: Option<usize>,
    pub classifiers: Vec<ClassifierKind>,
    pub domain: Domain,
    pub levels: usize,
    pub cv_folds: usize,
    pub solver: SolverConfig,
    pub output_dir: PathBuf,
    /// Load images from here instead of generating them.
    pub dataset_dir: Option<PathBuf>,
    pub write_measurements: bool,
    pub save_models: bool,
    /// Image ids reconstructed by the privacy audit; empty skips it.
    pub audit_ids: Vec<String>,
    pub audit_m: Vec<usize>,
    pub audit_threshold_db: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            global_seed: DEFAULT_SEED,
            scale: Scale::Words(DESK_WORDS),
            m_list: DEFAULT_M.to_vec(),
            train_per_label: None,
            test_per_label: None,
            classifiers: ClassifierKind::ROSTER.to_vec(),
            domain: Domain::Wavelet,
            levels: DEFAULT_LEVELS,
            cv_folds: 5,
            solver: SolverConfig::default(),
            output_dir: PathBuf::from("out"),
            dataset_dir: None,
            write_measurements: true,
            save_models: false,
            audit_ids: Vec::new(),
            audit_m: DEFAULT_AUDIT_M.to_vec(),
            audit_threshold_db: DEFAULT_AUDIT_THRESHOLD_DB,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e| Error::Config(format!("{key}: cannot parse {v:?}: {e}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse(key, s)).collect()
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Full corpus with the full-size split.
    pub fn full() -> Self {
        Self { scale: Scale::Full, ..Self::default() }
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got {raw:?}", n + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse_str(&fs::read_to_string(path)?)
    }

    /// Sets one field from its textual form; unknown keys are rejected.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        fn opt(v: &str) -> Option<&str> {
            if v.is_empty() || v == "auto" {
                None
            } else {
                Some(v)
            }
        }
        match key {
            "global_seed" => self.global_seed = parse(key, v)?,
            "scale" => self.scale = parse(key, v)?,
            "m_list" => self.m_list = parse_list(key, v)?,
            "train_per_label" => self.train_per_label = opt(v).map(|v| parse(key, v)).transpose()?,
            "test_per_label" => self.test_per_label = opt(v).map(|v| parse(key, v)).transpose()?,
            "classifiers" => self.classifiers = parse_list(key, v)?,
            "domain" => self.domain = parse(key, v)?,
            "levels" => self.levels = parse(key, v)?,
            "cv_folds" => self.cv_folds = parse(key, v)?,
            "tol_abs" => self.solver.tol_abs = parse(key, v)?,
            "tol_rel" => self.solver.tol_rel = parse(key, v)?,
            "max_iterations" => self.solver.max_iterations = parse(key, v)?,
            "rho" => self.solver.rho = parse(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "dataset_dir" => self.dataset_dir = opt(v).map(PathBuf::from),
            "write_measurements" => self.write_measurements = parse(key, v)?,
            "save_models" => self.save_models = parse(key, v)?,
            "audit_ids" => self.audit_ids = parse_list(key, v)?,
            "audit_m" => self.audit_m = parse_list(key, v)?,
            "audit_threshold_db" => self.audit_threshold_db = parse(key, v)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Text form accepted by [`ExperimentConfig::parse_str`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let opt = |v: &Option<usize>| v.map_or("auto".to_string(), |n| n.to_string());
        let _ = writeln!(s, "global_seed = {}", self.global_seed);
        let _ = writeln!(s, "scale = {}", self.scale);
        let _ = writeln!(s, "m_list = {}", join(&self.m_list));
        let _ = writeln!(s, "train_per_label = {}", opt(&self.train_per_label));
        let _ = writeln!(s, "test_per_label = {}", opt(&self.test_per_label));
        let _ = writeln!(s, "classifiers = {}", join(&self.classifiers));
        let _ = writeln!(s, "domain = {}", self.domain);
        let _ = writeln!(s, "levels = {}", self.levels);
        let _ = writeln!(s, "cv_folds = {}", self.cv_folds);
        let _ = writeln!(s, "tol_abs = {}", self.solver.tol_abs);
        let _ = writeln!(s, "tol_rel = {}", self.solver.tol_rel);
        let _ = writeln!(s, "max_iterations = {}", self.solver.max_iterations);
        let _ = writeln!(s, "rho = {}", self.solver.rho);
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        let _ = writeln!(s, "dataset_dir = {}", self.dataset_dir.as_ref().map_or("auto".into(), |p| p.display().to_string()));
        let _ = writeln!(s, "write_measurements = {}", self.write_measurements);
        let _ = writeln!(s, "save_models = {}", self.save_models);
        let _ = writeln!(s, "audit_ids = {}", join(&self.audit_ids));
        let _ = writeln!(s, "audit_m = {}", join(&self.audit_m));
        let _ = writeln!(s, "audit_threshold_db = {}", self.audit_threshold_db);
        s
    }

    /// `(train, test)` words per label after defaults.
    pub fn split_sizes(&self) -> Result<(usize, usize)> {
        let words = self.scale.word_count()?;
        let (dt, ds) = match self.scale {
            Scale::Full => (FULL_TRAIN_PER_LABEL, FULL_TEST_PER_LABEL),
            Scale::Words(DESK_WORDS) => (DESK_TRAIN_PER_LABEL, DESK_TEST_PER_LABEL),
            _ => {
                let train = words * FULL_TRAIN_PER_LABEL / WORD_COUNT;
                (train, words - train)
            }
        };
        Ok((self.train_per_label.unwrap_or(dt), self.test_per_label.unwrap_or(ds)))
    }

    /// Checks every field and sorts `m_list` descending.
    pub fn validate(&mut self) -> Result<()> {
        let n = self.domain.signal_len();
        let words = self.scale.word_count().map_err(|e| Error::Config(e.to_string()))?;
        if self.m_list.is_empty() {
            return Err(Error::Config("m_list is empty".into()));
        }
        for &m in self.m_list.iter().chain(&self.audit_m) {
            if m == 0 || m >= n {
                return Err(Error::Config(format!("M = {m} must lie in 1..{n} for the {} domain", self.domain)));
            }
        }
        self.m_list.sort_unstable_by(|a, b| b.cmp(a));
        self.m_list.dedup();
        let (train, test) = self.split_sizes()?;
        if train < self.cv_folds || test == 0 {
            return Err(Error::Config(format!("split {train}/{test} per label is too small for {}-fold CV", self.cv_folds)));
        }
        if train + test > words {
            return Err(Error::Config(format!("train {train} + test {test} per label exceeds the {words} available words")));
        }
        if self.classifiers.is_empty() {
            return Err(Error::Config("classifier roster is empty".into()));
        }
        if self.cv_folds < 2 {
            return Err(Error::Config("cv_folds must be at least 2".into()));
        }
        if self.levels == 0 {
            return Err(Error::Config("levels must be at least 1".into()));
        }
        self.solver.validate().map_err(|e| Error::Config(e.to_string()))
    }
}
