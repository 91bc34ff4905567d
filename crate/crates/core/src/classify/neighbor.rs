//! One-nearest-neighbour baseline in standardized measurement space.

use serde::{Deserialize, Serialize};

use super::LabeledData;
use crate::dataset::Label;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearestNeighbor {
    pub dim: usize,
    /// Standardized training rows, row-major.
    pub points: Vec<f64>,
    pub labels: Vec<Label>,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl NearestNeighbor {
    pub fn fit(z: &LabeledData) -> Self {
        Self { dim: z.dim(), points: z.features.data().to_vec(), labels: z.labels.clone() }
    }

    /// `d^2(nearest good) - d^2(nearest bad)`.
    pub fn score(&self, z: &[f64]) -> f64 {
        let mut best = [f64::INFINITY; 2];
        for (i, &label) in self.labels.iter().enumerate() {
            let d = squared_distance(&self.points[i * self.dim..(i + 1) * self.dim], z);
            let k = label.code() as usize;
            if d < best[k] {
                best[k] = d;
            }
        }
        best[0] - best[1]
    }
}
