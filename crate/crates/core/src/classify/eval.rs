//! Holdout evaluation.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{ClassifierKind, LabeledData, TrainedClassifier};
use crate::dataset::Label;
use crate::error::{Error, Result};

/// Test samples with their identities.
#[derive(Clone, Debug, PartialEq)]
pub struct HoldoutSet {
    pub ids: Vec<String>,
    pub words: Vec<String>,
    pub data: LabeledData,
}

impl HoldoutSet {
    pub fn new(ids: Vec<String>, words: Vec<String>, data: LabeledData) -> Result<Self> {
        if ids.len() != data.len() || words.len() != data.len() {
            return Err(Error::DimensionMismatch { expected: data.len(), actual: ids.len().min(words.len()) });
        }
        Ok(Self { ids, words, data })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// `counts[truth][predicted]`, indexed by label code.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub counts: [[usize; 2]; 2],
}

impl Confusion {
    pub fn record(&mut self, truth: Label, predicted: Label) {
        self.counts[truth.code() as usize][predicted.code() as usize] += 1;
    }

    pub fn get(&self, truth: Label, predicted: Label) -> usize {
        self.counts[truth.code() as usize][predicted.code() as usize]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        self.counts[0][0] + self.counts[1][1]
    }

    /// Percent; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => 100.0 * self.trace() as f64 / t as f64,
        }
    }

    pub fn bad_as_good(&self) -> usize {
        self.get(Label::Bad, Label::Good)
    }

    pub fn good_as_bad(&self) -> usize {
        self.get(Label::Good, Label::Bad)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Misclassified {
    pub image_id: String,
    pub word: String,
    pub truth: Label,
    pub predicted: Label,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classifier: ClassifierKind,
    pub m: usize,
    pub accuracy: f64,
    pub confusion: Confusion,
    pub misclassified: Vec<Misclassified>,
    pub char_histogram: BTreeMap<char, usize>,
}

/// Letter counts over `words`.
pub fn char_histogram<S: AsRef<str>>(words: &[S]) -> BTreeMap<char, usize> {
    let mut h = BTreeMap::new();
    for w in words {
        for ch in w.as_ref().chars() {
            *h.entry(ch).or_insert(0) += 1;
        }
    }
    h
}

/// Scores `test` with `model`; rejects any test id that also appears in `train_ids`.
pub fn evaluate_holdout<S: AsRef<str>>(
    model: &TrainedClassifier,
    m: usize,
    train_ids: &[S],
    test: &HoldoutSet,
) -> Result<EvalReport> {
    let train: HashSet<&str> = train_ids.iter().map(AsRef::as_ref).collect();
    let overlap: Vec<&String> = test.ids.iter().filter(|id| train.contains(id.as_str())).collect();
    if let Some(first) = overlap.first() {
        return Err(Error::SplitOverlap { count: overlap.len(), first: (*first).clone() });
    }
    let mut confusion = Confusion::default();
    let mut misclassified = Vec::new();
    for i in 0..test.len() {
        let truth = test.data.labels[i];
        let (predicted, score) = model.predict(test.data.row(i))?;
        confusion.record(truth, predicted);
        if predicted != truth {
            misclassified.push(Misclassified {
                image_id: test.ids[i].clone(),
                word: test.words[i].clone(),
                truth,
                predicted,
                score,
            });
        }
    }
    let words: Vec<&str> = misclassified.iter().map(|x| x.word.as_str()).collect();
    Ok(EvalReport {
        classifier: model.kind,
        m,
        accuracy: confusion.accuracy(),
        confusion,
        char_histogram: char_histogram(&words),
        misclassified,
    })
}
