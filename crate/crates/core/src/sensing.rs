//! Seeded binary sensing matrices (the key) and the two acquisition paths:
//! directly on pixels, or on the wavelet coefficients of the padded image.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::image::{GrayImage, PIXELS};
use crate::operator::{DenseMatrix, LinearOperator};
use crate::seed;
use crate::wavelet::{Dwt2, PADDED_LEN};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Pixel,
    Wavelet,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Pixel => "pixel",
            Domain::Wavelet => "wavelet",
        }
    }

    /// Signal length the domain's matrices act on.
    pub fn signal_len(self) -> usize {
        match self {
            Domain::Pixel => PIXELS,
            Domain::Wavelet => PADDED_LEN,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Domain {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pixel" => Ok(Domain::Pixel),
            "wavelet" => Ok(Domain::Wavelet),
            other => Err(format!("unknown domain {other:?}")),
        }
    }
}

/// An `M x N` matrix of i.i.d. fair {0, 1} entries, bit-packed row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct SensingMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
    seed: u64,
    domain: Domain,
}

impl fmt::Debug for SensingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SensingMatrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("seed", &self.seed)
            .field("domain", &self.domain)
            .finish()
    }
}

impl SensingMatrix {
    /// Draws the matrix from `seed`. Requires `0 < rows < cols`.
    pub fn generate(rows: usize, cols: usize, seed: u64, domain: Domain) -> Result<Self> {
        if rows == 0 || rows >= cols {
            return Err(Error::InvalidArgument(format!(
                "sensing matrix needs 0 < M < N, got M={rows}, N={cols}"
            )));
        }
        let words_per_row = cols.div_ceil(64);
        let tail = cols % 64;
        let tail_mask = if tail == 0 { u64::MAX } else { (1u64 << tail) - 1 };
        let mut rng = seed::rng(seed);
        let mut bits = Vec::with_capacity(rows * words_per_row);
        for _ in 0..rows {
            for w in 0..words_per_row {
                let word = rng.next_u64();
                bits.push(if w + 1 == words_per_row { word & tail_mask } else { word });
            }
        }
        Ok(Self { rows, cols, words_per_row, bits, seed, domain })
    }

    /// Matrix for the pixel path, `M x 3500`.
    pub fn for_pixels(rows: usize, seed: u64) -> Result<Self> {
        Self::generate(rows, PIXELS, seed, Domain::Pixel)
    }

    /// Matrix for the wavelet path, `M x 8192`.
    pub fn for_wavelets(rows: usize, seed: u64) -> Result<Self> {
        Self::generate(rows, PADDED_LEN, seed, Domain::Wavelet)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn bits(&self) -> &[u64] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        let word = self.bits[row * self.words_per_row + col / 64];
        word >> (col % 64) & 1 == 1
    }

    fn row_words(&self, row: usize) -> &[u64] {
        &self.bits[row * self.words_per_row..(row + 1) * self.words_per_row]
    }

    pub fn row_ones(&self, row: usize) -> usize {
        self.row_words(row).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones_fraction(&self) -> f64 {
        let ones: usize = self.bits.iter().map(|w| w.count_ones() as usize).sum();
        ones as f64 / (self.rows * self.cols) as f64
    }

    /// Expanded 0/1 entries, for fast repeated products.
    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| if self.get(i, j) { 1.0 } else { 0.0 })
    }

    /// Measures `x`, which must live in this matrix's domain.
    pub fn measure_vector(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, actual: x.len() });
        }
        let mut y = vec![0.0; self.rows];
        self.apply(x, &mut y);
        Ok(y)
    }
}

impl LinearOperator for SensingMatrix {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (w, &word) in self.row_words(i).iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let j = w * 64 + bits.trailing_zeros() as usize;
                    acc += x[j];
                    bits &= bits - 1;
                }
            }
            *o = acc;
        }
    }

    fn apply_adjoint(&self, y: &[f64], out: &mut [f64]) {
        assert_eq!(y.len(), self.rows);
        out.fill(0.0);
        for (i, &yi) in y.iter().enumerate() {
            for (w, &word) in self.row_words(i).iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    out[w * 64 + bits.trailing_zeros() as usize] += yi;
                    bits &= bits - 1;
                }
            }
        }
    }

    /// Exact via popcount of row intersections.
    fn gram(&self) -> DMatrix<f64> {
        let m = self.rows;
        let mut g = DMatrix::zeros(m, m);
        for i in 0..m {
            let ri = self.row_words(i);
            for j in i..m {
                let common: u32 = ri.iter().zip(self.row_words(j)).map(|(a, b)| (a & b).count_ones()).sum();
                g[(i, j)] = f64::from(common);
                g[(j, i)] = f64::from(common);
            }
        }
        g
    }
}

/// A compressed sample vector and the key it was taken with.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub values: Vec<f64>,
    pub matrix_seed: u64,
    pub domain: Domain,
    pub image_id: String,
}

/// `y = phi vec(x)` on raw pixels.
pub fn measure_pixels(matrix: &SensingMatrix, img: &GrayImage, image_id: &str) -> Result<Measurement> {
    if matrix.domain != Domain::Pixel {
        return Err(Error::InvalidArgument("pixel measurement needs a pixel-domain matrix".into()));
    }
    Ok(Measurement {
        values: matrix.measure_vector(img.pixels())?,
        matrix_seed: matrix.seed,
        domain: Domain::Pixel,
        image_id: image_id.to_string(),
    })
}

/// `y = phi dwt2(pad(x))`.
pub fn measure_coeffs(matrix: &SensingMatrix, dwt: &Dwt2, img: &GrayImage, image_id: &str) -> Result<Measurement> {
    if matrix.domain != Domain::Wavelet {
        return Err(Error::InvalidArgument("coefficient measurement needs a wavelet-domain matrix".into()));
    }
    let coeffs = dwt.analyze_image(img)?;
    Ok(Measurement {
        values: matrix.measure_vector(&coeffs.coeffs)?,
        matrix_seed: matrix.seed,
        domain: Domain::Wavelet,
        image_id: image_id.to_string(),
    })
}

/// Measures many images with one key using the dense expansion of the matrix.
pub fn measure_batch(matrix: &SensingMatrix, dwt: &Dwt2, images: &[(&str, &GrayImage)]) -> Result<Vec<Measurement>> {
    use rayon::prelude::*;
    let dense = matrix.to_dense();
    images
        .par_iter()
        .map(|(id, img)| {
            let signal = match matrix.domain {
                Domain::Pixel => img.pixels().to_vec(),
                Domain::Wavelet => dwt.analyze_image(img)?.coeffs,
            };
            if signal.len() != matrix.cols {
                return Err(Error::DimensionMismatch { expected: matrix.cols, actual: signal.len() });
            }
            let mut values = vec![0.0; matrix.rows];
            dense.apply(&signal, &mut values);
            Ok(Measurement { values, matrix_seed: matrix.seed, domain: matrix.domain, image_id: id.to_string() })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub image_id: String,
    pub label: Label,
    pub values: Vec<f64>,
}

/// All measurements taken with one `(M, seed)` key.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet {
    pub m: usize,
    pub seed: u64,
    pub domain: Domain,
    pub records: Vec<MeasurementRecord>,
}

impl MeasurementSet {
    /// CSV with a leading `# m=.. seed=.. domain=..` line, then
    /// `image_id,label,y0..y{M-1}`. Labels use 0 for good, 1 for bad.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        writeln!(out, "# m={} seed={} domain={}", self.m, self.seed, self.domain)?;
        {
            let mut w = csv::Writer::from_writer(&mut out);
            let mut header = vec!["image_id".to_string(), "label".to_string()];
            header.extend((0..self.m).map(|i| format!("y{i}")));
            w.write_record(&header)?;
            for r in &self.records {
                if r.values.len() != self.m {
                    return Err(Error::DimensionMismatch { expected: self.m, actual: r.values.len() });
                }
                let mut row = vec![r.image_id.clone(), r.label.code().to_string()];
                row.extend(r.values.iter().map(|v| v.to_string()));
                w.write_record(&row)?;
            }
            w.flush()?;
        }
        fs::write(path, out)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let (first, rest) = text.split_once('\n').ok_or_else(|| Error::MalformedArchive("empty file".into()))?;
        let meta = first
            .strip_prefix("# ")
            .ok_or_else(|| Error::MalformedArchive("missing metadata line".into()))?;
        let (mut m, mut seed, mut domain) = (None, None, None);
        for kv in meta.split_whitespace() {
            match kv.split_once('=') {
                Some(("m", v)) => m = v.parse().ok(),
                Some(("seed", v)) => seed = v.parse().ok(),
                Some(("domain", v)) => domain = v.parse().ok(),
                _ => return Err(Error::MalformedArchive(format!("unknown metadata field {kv:?}"))),
            }
        }
        let (Some(m), Some(seed), Some(domain)) = (m, seed, domain) else {
            return Err(Error::MalformedArchive("metadata needs m, seed and domain".into()));
        };
        let mut rdr = csv::Reader::from_reader(rest.as_bytes());
        if rdr.headers()?.len() != m + 2 {
            return Err(Error::MalformedArchive(format!("header does not have {} columns", m + 2)));
        }
        let mut records = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = i + 3;
            if rec.len() != m + 2 {
                return Err(Error::MalformedArchive(format!("line {row}: expected {} fields", m + 2)));
            }
            let code: u8 = rec[1].parse().map_err(|_| Error::MalformedArchive(format!("line {row}: bad label")))?;
            let label = Label::from_code(code).ok_or_else(|| Error::MalformedArchive(format!("line {row}: bad label")))?;
            let values = rec
                .iter()
                .skip(2)
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::MalformedArchive(format!("line {row}: {e}")))?;
            records.push(MeasurementRecord { image_id: rec[0].to_string(), label, values });
        }
        Ok(Self { m, seed, domain, records })
    }
}
