//! Word-level train/test split shared by every M of a run.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::dataset::{Label, LabeledSample};
use crate::error::{Error, Result};
use crate::seed;

/// Both images of a word always land on the same side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train_words: Vec<String>,
    pub test_words: Vec<String>,
}

fn ids_for(words: &[String]) -> Vec<String> {
    words
        .iter()
        .flat_map(|w| [LabeledSample::image_id_for(w, Label::Good), LabeledSample::image_id_for(w, Label::Bad)])
        .collect()
}

impl Split {
    pub fn new(words: &[String], train: usize, test: usize, seed: u64) -> Result<Self> {
        if train + test > words.len() {
            return Err(Error::InvalidArgument(format!(
                "split of {train} + {test} words needs more than the {} available",
                words.len()
            )));
        }
        let mut pool = words.to_vec();
        pool.sort_unstable();
        pool.dedup();
        pool.shuffle(&mut seed::rng(seed));
        let mut train_words = pool[..train].to_vec();
        let mut test_words = pool[train..train + test].to_vec();
        train_words.sort_unstable();
        test_words.sort_unstable();
        let split = Self { train_words, test_words };
        split.check_disjoint()?;
        Ok(split)
    }

    pub fn train_ids(&self) -> Vec<String> {
        ids_for(&self.train_words)
    }

    pub fn test_ids(&self) -> Vec<String> {
        ids_for(&self.test_words)
    }

    pub fn check_disjoint(&self) -> Result<()> {
        let train: HashSet<String> = self.train_ids().into_iter().collect();
        let overlap: Vec<String> = self.test_ids().into_iter().filter(|id| train.contains(id)).collect();
        match overlap.first() {
            Some(first) => Err(Error::SplitOverlap { count: overlap.len(), first: first.clone() }),
            None => Ok(()),
        }
    }

    /// `word,set` with set `train` or `test`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["word", "set"])?;
        for word in &self.train_words {
            w.write_record([word.as_str(), "train"])?;
        }
        for word in &self.test_words {
            w.write_record([word.as_str(), "test"])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        fs::write(path, bytes)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let (mut train_words, mut test_words) = (Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            match (rec.get(0), rec.get(1)) {
                (Some(w), Some("train")) => train_words.push(w.to_string()),
                (Some(w), Some("test")) => test_words.push(w.to_string()),
                _ => return Err(Error::MalformedArchive(format!("split row {}: expected word,train|test", i + 2))),
            }
        }
        let split = Self { train_words, test_words };
        split.check_disjoint()?;
        Ok(split)
    }
}
