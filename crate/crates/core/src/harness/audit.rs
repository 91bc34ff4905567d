//! Privacy audit: best-case reconstruction by an adversary holding the key.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix_seed;
use crate::dataset::{all_words, render_word, Dataset};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::recovery::{correlation, psnr, Reconstructor, SolverConfig};
use crate::seed;
use crate::sensing::{measure_batch, Domain, SensingMatrix};
use crate::wavelet::Dwt2;

pub const LEGIBILITY_DISTRACTORS: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct AuditConfig {
    pub global_seed: u64,
    pub m_list: Vec<usize>,
    pub domain: Domain,
    pub levels: usize,
    pub solver: SolverConfig,
    pub threshold_db: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            global_seed: super::config::DEFAULT_SEED,
            m_list: super::config::DEFAULT_AUDIT_M.to_vec(),
            domain: Domain::Wavelet,
            levels: crate::wavelet::DEFAULT_LEVELS,
            solver: SolverConfig::default(),
            threshold_db: super::config::DEFAULT_AUDIT_THRESHOLD_DB,
        }
    }
}

/// An image to attack; `word` enables the legibility check.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditSample {
    pub image_id: String,
    pub word: Option<String>,
    pub image: GrayImage,
}

impl AuditSample {
    pub fn from_dataset(dataset: &Dataset, ids: &[String]) -> Result<Vec<Self>> {
        ids.iter()
            .map(|id| {
                let i = dataset.manifest.find(id).ok_or_else(|| Error::MissingImage { image_id: id.clone() })?;
                Ok(Self {
                    image_id: id.clone(),
                    word: Some(dataset.manifest.entries[i].word.clone()),
                    image: dataset.images[i].clone(),
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditCell {
    pub image_id: String,
    pub m: usize,
    pub psnr: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Correlation with the clean rendering of the true word.
    pub true_correlation: Option<f64>,
    /// Best correlation with a clean rendering of a random other word.
    pub best_distractor_correlation: Option<f64>,
}

impl AuditCell {
    /// Reconstruction matches its own word better than every distractor.
    pub fn legible(&self) -> Option<bool> {
        Some(self.true_correlation? > self.best_distractor_correlation?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub cells: Vec<AuditCell>,
    /// `(M, mean PSNR)` in the configured order.
    pub mean_psnr: Vec<(usize, f64)>,
    pub threshold_db: f64,
    /// Mean PSNR at every `M <= 20` is below the threshold and at `M = 500` above it.
    pub pass: bool,
    pub non_converged: usize,
}

impl AuditReport {
    pub fn mean_at(&self, m: usize) -> Option<f64> {
        self.mean_psnr.iter().find(|(k, _)| *k == m).map(|(_, v)| *v)
    }

    pub fn cells_at(&self, m: usize) -> impl Iterator<Item = &AuditCell> {
        self.cells.iter().filter(move |c| c.m == m)
    }

    /// `(illegible, with a word)` counts at `m`.
    pub fn illegible_at(&self, m: usize) -> (usize, usize) {
        let verdicts: Vec<bool> = self.cells_at(m).filter_map(AuditCell::legible).collect();
        (verdicts.iter().filter(|&&l| !l).count(), verdicts.len())
    }

    /// `image_id,M,psnr,iterations,converged`; infinite PSNR is written as `inf`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["image_id", "M", "psnr", "iterations", "converged", "true_corr", "best_distractor_corr"])?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.6}"));
        for c in &self.cells {
            w.write_record([
                c.image_id.clone(),
                c.m.to_string(),
                if c.psnr.is_finite() { format!("{:.6}", c.psnr) } else { "inf".into() },
                c.iterations.to_string(),
                c.converged.to_string(),
                opt(c.true_correlation),
                opt(c.best_distractor_correlation),
            ])?;
        }
        fs::write(path, w.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;
        Ok(())
    }
}

fn distractors(word: &str, seed: u64) -> Result<Vec<GrayImage>> {
    let mut pool: Vec<String> = all_words().into_iter().filter(|w| w != word).collect();
    pool.shuffle(&mut seed::rng(seed::derive_str(seed, word)));
    pool.iter().take(LEGIBILITY_DISTRACTORS).map(|w| render_word(w)).collect()
}

/// Reconstructs every sample at every M. Non-convergence is recorded per cell.
/// With `out_dir`, writes `audit.csv`, one PGM per cell and `grid.pgm`
/// (originals on top, one row per M).
pub fn privacy_audit(cfg: &AuditConfig, samples: &[AuditSample], out_dir: Option<&Path>) -> Result<AuditReport> {
    let dwt = Dwt2::new(cfg.levels);
    let legibility_seed = seed::derive_str(cfg.global_seed, "audit/distractors");
    let references: Vec<Option<(GrayImage, Vec<GrayImage>)>> = samples
        .iter()
        .map(|s| match &s.word {
            Some(w) => Ok(Some((render_word(w)?, distractors(w, legibility_seed)?))),
            None => Ok(None),
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    let mut recon_rows = Vec::new();
    let mut mean_psnr = Vec::new();
    for &m in &cfg.m_list {
        let matrix = SensingMatrix::generate(m, cfg.domain.signal_len(), matrix_seed(cfg.global_seed, m), cfg.domain)?;
        let pairs: Vec<(&str, &GrayImage)> = samples.iter().map(|s| (s.image_id.as_str(), &s.image)).collect();
        let ys = measure_batch(&matrix, &dwt, &pairs)?;
        let rec = Reconstructor::new(&matrix, dwt.clone(), cfg.solver.clone())?;
        let results: Vec<_> = ys.par_iter().map(|y| rec.reconstruct(y)).collect::<Result<_>>()?;
        let mut row = Vec::new();
        for ((s, r), refs) in samples.iter().zip(results).zip(&references) {
            let (true_correlation, best_distractor_correlation) = match refs {
                Some((truth, others)) => (
                    Some(correlation(&r.image, truth)),
                    Some(others.iter().map(|o| correlation(&r.image, o)).fold(f64::NEG_INFINITY, f64::max)),
                ),
                None => (None, None),
            };
            cells.push(AuditCell {
                image_id: s.image_id.clone(),
                m,
                psnr: psnr(&s.image, &r.image)?,
                iterations: r.solution.iterations,
                converged: r.solution.converged,
                true_correlation,
                best_distractor_correlation,
            });
            row.push(r.image);
        }
        if !samples.is_empty() {
            let at_m: Vec<f64> = cells.iter().filter(|c| c.m == m).map(|c| c.psnr).collect();
            mean_psnr.push((m, at_m.iter().sum::<f64>() / at_m.len() as f64));
        }
        recon_rows.push(row);
    }

    let by_m: BTreeMap<usize, f64> = mean_psnr.iter().copied().collect();
    let low: Vec<f64> = by_m.range(..=20).map(|(_, v)| *v).collect();
    let pass = !low.is_empty()
        && low.iter().all(|&v| v < cfg.threshold_db)
        && by_m.get(&500).is_some_and(|&v| v > cfg.threshold_db);
    let report = AuditReport {
        non_converged: cells.iter().filter(|c| !c.converged).count(),
        cells,
        mean_psnr,
        threshold_db: cfg.threshold_db,
        pass,
    };

    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        report.write_csv(&dir.join("audit.csv"))?;
        if !samples.is_empty() {
            let mut grid_rows = vec![GrayImage::stack_horizontal(
                &samples.iter().map(|s| s.image.clone()).collect::<Vec<_>>(),
                2,
            )?];
            for (&m, row) in cfg.m_list.iter().zip(&recon_rows) {
                for (s, img) in samples.iter().zip(row) {
                    img.write_pgm(&dir.join(format!("{}_m{m}.pgm", s.image_id)))?;
                }
                grid_rows.push(GrayImage::stack_horizontal(row, 2)?);
            }
            GrayImage::stack_vertical(&grid_rows, 2)?.write_pgm(&dir.join("grid.pgm"))?;
        }
    }
    Ok(report)
}
