//! Separable 2-D orthonormal Daubechies-10 wavelet transform with periodic
//! boundaries, plus the mirror padding that lifts a 35x100 word image onto
//! the 64x128 dyadic grid.

use crate::error::{Error, Result};
use crate::image::GrayImage;

pub const PAD_HEIGHT: usize = 64;
pub const PAD_WIDTH: usize = 128;
/// Length of the padded coefficient vector.
pub const PADDED_LEN: usize = PAD_HEIGHT * PAD_WIDTH;
pub const DEFAULT_LEVELS: usize = 5;

pub const TAPS: usize = 20;

/// Daubechies scaling filter with ten vanishing moments, minimum phase,
/// normalized so the taps sum to sqrt(2).
const DB10_LOWPASS: [f64; TAPS] = [
    0.026670057900555554,
    0.18817680007769149,
    0.52720118893172559,
    0.68845903945360357,
    0.28117234366057746,
    -0.24984642432731538,
    -0.19594627437737704,
    0.12736934033579326,
    0.093057364603572351,
    -0.071394147166397087,
    -0.029457536821875813,
    0.033212674059341002,
    0.0036065535669561697,
    -0.010733175483330575,
    0.0013953517470529012,
    0.0019924052951850561,
    -0.00068585669495971163,
    -0.00011646685512928545,
    0.000093588670320069591,
    -0.000013264202894521245,
];

#[derive(Clone, Debug, PartialEq)]
pub struct Db10Filter {
    lowpass: [f64; TAPS],
    highpass: [f64; TAPS],
}

impl Default for Db10Filter {
    fn default() -> Self {
        Self::new()
    }
}

impl Db10Filter {
    pub fn new() -> Self {
        let lowpass = DB10_LOWPASS;
        let mut highpass = [0.0; TAPS];
        // quadrature mirror: g[n] = (-1)^n h[L-1-n]
        for (n, g) in highpass.iter_mut().enumerate() {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            *g = sign * lowpass[TAPS - 1 - n];
        }
        Self { lowpass, highpass }
    }

    pub fn lowpass(&self) -> &[f64; TAPS] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[f64; TAPS] {
        &self.highpass
    }

    /// Checks normalization and double-shift orthogonality of the taps.
    pub fn verify(&self) -> Result<()> {
        let h = &self.lowpass;
        let sum: f64 = h.iter().sum();
        if (sum - std::f64::consts::SQRT_2).abs() > 1e-12 {
            return Err(Error::Numerical(format!("lowpass sum {sum} differs from sqrt(2)")));
        }
        let energy: f64 = h.iter().map(|v| v * v).sum();
        if (energy - 1.0).abs() > 1e-12 {
            return Err(Error::Numerical(format!("lowpass energy {energy} differs from 1")));
        }
        for k in 1..TAPS / 2 {
            let dot: f64 = (0..TAPS - 2 * k).map(|n| h[n] * h[n + 2 * k]).sum();
            if dot.abs() > 1e-10 {
                return Err(Error::Numerical(format!("shift {k} correlation {dot} is not zero")));
            }
        }
        Ok(())
    }
}

/// Real-valued raster that may leave `[0, 1]` (padded images, inverse transforms).
#[derive(Clone, Debug, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch { expected: width * height, actual: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![0.0; width * height] }
    }

    /// Top-left `width x height` region as an image, clamped into `[0, 1]`.
    pub fn crop(&self, width: usize, height: usize) -> Result<GrayImage> {
        if width > self.width || height > self.height {
            return Err(Error::InvalidArgument(format!(
                "crop {width}x{height} exceeds raster {}x{}",
                self.width, self.height
            )));
        }
        let mut out = Vec::with_capacity(width * height);
        for row in 0..height {
            out.extend_from_slice(&self.data[row * self.width..row * self.width + width]);
        }
        GrayImage::from_clamped(width, height, &out)
    }
}

/// Half-sample symmetric reflection of `i` into `0..n`.
fn reflect(i: usize, n: usize) -> usize {
    let period = 2 * n;
    let m = i % period;
    if m < n {
        m
    } else {
        period - 1 - m
    }
}

/// Mirror-extends an image to 64x128, original content at the top left.
pub fn pad_image(img: &GrayImage) -> Raster {
    pad_to(img, PAD_WIDTH, PAD_HEIGHT)
}

pub fn pad_to(img: &GrayImage, width: usize, height: usize) -> Raster {
    let mut data = Vec::with_capacity(width * height);
    for row in 0..height {
        let r = reflect(row, img.height());
        for col in 0..width {
            data.push(img.get(r, reflect(col, img.width())));
        }
    }
    Raster { width, height, data }
}

/// Which subband a coefficient block belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BandKind {
    Approximation,
    /// Highpass along rows (vertical edges).
    RowDetail,
    /// Highpass along columns (horizontal edges).
    ColumnDetail,
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Band {
    /// 1 is the finest level.
    pub level: usize,
    pub kind: BandKind,
    pub row0: usize,
    pub col0: usize,
    pub rows: usize,
    pub cols: usize,
}

/// Coefficients in the usual nested (Mallat) layout: the approximation band
/// occupies the top-left `height >> levels` by `width >> levels` block.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveletCoeffs {
    pub coeffs: Vec<f64>,
    pub width: usize,
    pub height: usize,
    pub levels: usize,
}

impl WaveletCoeffs {
    pub fn new(coeffs: Vec<f64>, width: usize, height: usize, levels: usize) -> Result<Self> {
        check_levels(width, height, levels)?;
        if coeffs.len() != width * height {
            return Err(Error::DimensionMismatch { expected: width * height, actual: coeffs.len() });
        }
        Ok(Self { coeffs, width, height, levels })
    }

    pub fn bands(&self) -> Vec<Band> {
        let mut bands = Vec::with_capacity(3 * self.levels + 1);
        for level in 1..=self.levels {
            let rows = self.height >> level;
            let cols = self.width >> level;
            bands.push(Band { level, kind: BandKind::RowDetail, row0: 0, col0: cols, rows, cols });
            bands.push(Band { level, kind: BandKind::ColumnDetail, row0: rows, col0: 0, rows, cols });
            bands.push(Band { level, kind: BandKind::Diagonal, row0: rows, col0: cols, rows, cols });
        }
        bands.push(Band {
            level: self.levels,
            kind: BandKind::Approximation,
            row0: 0,
            col0: 0,
            rows: self.height >> self.levels,
            cols: self.width >> self.levels,
        });
        bands
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

fn check_levels(width: usize, height: usize, levels: usize) -> Result<()> {
    if levels == 0 {
        return Err(Error::InvalidArgument("wavelet levels must be at least 1".into()));
    }
    let block = 1usize.checked_shl(levels as u32).unwrap_or(0);
    if block == 0 || width % block != 0 || height % block != 0 {
        return Err(Error::InvalidArgument(format!(
            "{levels} levels infeasible for {width}x{height} raster"
        )));
    }
    Ok(())
}

/// Periodic analysis of `src` (stride `stride`, length `n`) into `lo`/`hi` halves.
fn analyze(filter: &Db10Filter, src: &[f64], out: &mut [f64]) {
    let n = src.len();
    let half = n / 2;
    let (lo, hi) = out.split_at_mut(half);
    for k in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for j in 0..TAPS {
            let x = src[(2 * k + j) % n];
            a += filter.lowpass[j] * x;
            d += filter.highpass[j] * x;
        }
        lo[k] = a;
        hi[k] = d;
    }
}

/// Transpose of [`analyze`].
fn synthesize(filter: &Db10Filter, src: &[f64], out: &mut [f64]) {
    let n = src.len();
    let half = n / 2;
    out.fill(0.0);
    for k in 0..half {
        let a = src[k];
        let d = src[half + k];
        for j in 0..TAPS {
            out[(2 * k + j) % n] += filter.lowpass[j] * a + filter.highpass[j] * d;
        }
    }
}

/// Stateless forward/inverse transform at a fixed depth.
#[derive(Clone, Debug)]
pub struct Dwt2 {
    filter: Db10Filter,
    levels: usize,
}

impl Default for Dwt2 {
    fn default() -> Self {
        Self::new(DEFAULT_LEVELS)
    }
}

impl Dwt2 {
    pub fn new(levels: usize) -> Self {
        Self { filter: Db10Filter::new(), levels }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn forward(&self, raster: &Raster) -> Result<WaveletCoeffs> {
        let (width, height) = (raster.width, raster.height);
        check_levels(width, height, self.levels)?;
        let mut data = raster.data.clone();
        let mut line = vec![0.0; width.max(height)];
        let mut out = vec![0.0; width.max(height)];
        let (mut w, mut h) = (width, height);
        for _ in 0..self.levels {
            for row in 0..h {
                let base = row * width;
                analyze(&self.filter, &data[base..base + w], &mut out[..w]);
                data[base..base + w].copy_from_slice(&out[..w]);
            }
            for col in 0..w {
                for row in 0..h {
                    line[row] = data[row * width + col];
                }
                analyze(&self.filter, &line[..h], &mut out[..h]);
                for row in 0..h {
                    data[row * width + col] = out[row];
                }
            }
            w /= 2;
            h /= 2;
        }
        Ok(WaveletCoeffs { coeffs: data, width, height, levels: self.levels })
    }

    pub fn inverse(&self, coeffs: &WaveletCoeffs) -> Result<Raster> {
        let (width, height) = (coeffs.width, coeffs.height);
        check_levels(width, height, coeffs.levels)?;
        if coeffs.levels != self.levels {
            return Err(Error::InvalidArgument(format!(
                "coefficients have {} levels, transform expects {}",
                coeffs.levels, self.levels
            )));
        }
        if coeffs.coeffs.len() != width * height {
            return Err(Error::DimensionMismatch { expected: width * height, actual: coeffs.coeffs.len() });
        }
        let mut data = coeffs.coeffs.clone();
        let mut line = vec![0.0; width.max(height)];
        let mut out = vec![0.0; width.max(height)];
        for level in (0..self.levels).rev() {
            let w = width >> level;
            let h = height >> level;
            for col in 0..w {
                for row in 0..h {
                    line[row] = data[row * width + col];
                }
                synthesize(&self.filter, &line[..h], &mut out[..h]);
                for row in 0..h {
                    data[row * width + col] = out[row];
                }
            }
            for row in 0..h {
                let base = row * width;
                synthesize(&self.filter, &data[base..base + w], &mut out[..w]);
                data[base..base + w].copy_from_slice(&out[..w]);
            }
        }
        Ok(Raster { width, height, data })
    }

    /// Coefficients of a word image: mirror padding followed by the forward transform.
    pub fn analyze_image(&self, img: &GrayImage) -> Result<WaveletCoeffs> {
        self.forward(&pad_image(img))
    }

    /// Inverse transform, crop back to `width x height`, clamp to `[0, 1]`.
    pub fn synthesize_image(&self, coeffs: &WaveletCoeffs, width: usize, height: usize) -> Result<GrayImage> {
        self.inverse(coeffs)?.crop(width, height)
    }
}

pub fn dwt2(raster: &Raster, levels: usize) -> Result<WaveletCoeffs> {
    Dwt2::new(levels).forward(raster)
}

pub fn idwt2(coeffs: &WaveletCoeffs) -> Result<Raster> {
    Dwt2::new(coeffs.levels).inverse(coeffs)
}
