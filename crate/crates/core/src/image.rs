//! Grayscale rasters and binary PGM (P5) persistence.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub const WIDTH: usize = 100;
pub const HEIGHT: usize = 35;
/// Pixel count of a word image.
pub const PIXELS: usize = WIDTH * HEIGHT;

/// Row-major grayscale raster with intensities in `[0, 1]`.
///
/// Ink is dark (near 0) and paper is light (near 1).
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch { expected: width * height, actual: pixels.len() });
        }
        if let Some(bad) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidArgument(format!("intensity {bad} outside [0, 1]")));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!((0.0..=1.0).contains(&value), "intensity {value} outside [0, 1]");
        Self { width, height, pixels: vec![value; width * height] }
    }

    /// The blank sheet at word-image size.
    pub fn blank() -> Self {
        Self::filled(WIDTH, HEIGHT, 1.0)
    }

    /// Builds an image from arbitrary reals, clamping into `[0, 1]`.
    /// Non-finite values map to 0.
    pub fn from_clamped(width: usize, height: usize, values: &[f64]) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::DimensionMismatch { expected: width * height, actual: values.len() });
        }
        let pixels = values
            .iter()
            .map(|v| if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 })
            .collect();
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!((0.0..=1.0).contains(&value));
        self.pixels[row * self.width + col] = value;
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    /// Number of pixels that differ between two equally sized images.
    pub fn diff_count(&self, other: &GrayImage) -> usize {
        assert_eq!((self.width, self.height), (other.width, other.height));
        self.pixels.iter().zip(&other.pixels).filter(|(a, b)| a != b).count()
    }

    /// Intensities quantized to bytes as `round(i * 255)`.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.pixels.iter().map(|&p| (p * 255.0).round() as u8).collect()
    }

    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height {
            return Err(Error::DimensionMismatch { expected: width * height, actual: bytes.len() });
        }
        let pixels = bytes.iter().map(|&b| f64::from(b) / 255.0).collect();
        Ok(Self { width, height, pixels })
    }

    /// Encodes as binary PGM with maxval 255.
    pub fn encode_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.to_bytes());
        out
    }

    pub fn decode_pgm(data: &[u8], path: &Path) -> Result<Self> {
        let bad = |reason: &str| Error::MalformedPgm { path: path.to_path_buf(), reason: reason.to_string() };
        let mut pos = 0;
        let mut fields = Vec::with_capacity(4);
        while fields.len() < 4 {
            // whitespace and comments between header tokens
            while pos < data.len() && (data[pos].is_ascii_whitespace() || data[pos] == b'#') {
                if data[pos] == b'#' {
                    while pos < data.len() && data[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    pos += 1;
                }
            }
            let start = pos;
            while pos < data.len() && !data[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(bad("truncated header"));
            }
            fields.push(std::str::from_utf8(&data[start..pos]).map_err(|_| bad("non-ascii header"))?);
        }
        if fields[0] != "P5" {
            return Err(bad("magic is not P5"));
        }
        let parse = |s: &str| s.parse::<usize>().map_err(|_| bad("non-numeric header field"));
        let (width, height, maxval) = (parse(fields[1])?, parse(fields[2])?, parse(fields[3])?);
        if maxval != 255 {
            return Err(bad("maxval must be 255"));
        }
        // exactly one whitespace byte separates the header from the raster
        pos += 1;
        let raster = data.get(pos..).ok_or_else(|| bad("missing raster"))?;
        if raster.len() != width * height {
            return Err(bad("raster length does not match dimensions"));
        }
        Self::from_bytes(width, height, raster)
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.encode_pgm())?;
        Ok(())
    }

    pub fn read_pgm(path: &Path) -> Result<Self> {
        let data = fs::read(path)?;
        Self::decode_pgm(&data, path)
    }

    /// Stacks images of equal width vertically, separated by `gap` light rows.
    pub fn stack_vertical(images: &[GrayImage], gap: usize) -> Result<Self> {
        let Some(first) = images.first() else {
            return Ok(Self { width: 0, height: 0, pixels: Vec::new() });
        };
        let width = first.width;
        let mut pixels = Vec::new();
        for (i, img) in images.iter().enumerate() {
            if img.width != width {
                return Err(Error::DimensionMismatch { expected: width, actual: img.width });
            }
            if i > 0 {
                pixels.extend(std::iter::repeat(1.0).take(gap * width));
            }
            pixels.extend_from_slice(&img.pixels);
        }
        let height = pixels.len() / width;
        Ok(Self { width, height, pixels })
    }

    /// Places images side by side, separated by `gap` light columns.
    pub fn stack_horizontal(images: &[GrayImage], gap: usize) -> Result<Self> {
        let Some(first) = images.first() else {
            return Ok(Self { width: 0, height: 0, pixels: Vec::new() });
        };
        let height = first.height;
        if let Some(odd) = images.iter().find(|img| img.height != height) {
            return Err(Error::DimensionMismatch { expected: height, actual: odd.height });
        }
        let width = images.iter().map(|i| i.width).sum::<usize>() + gap * (images.len() - 1);
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for (i, img) in images.iter().enumerate() {
                if i > 0 {
                    pixels.extend(std::iter::repeat(1.0).take(gap));
                }
                pixels.extend_from_slice(&img.pixels[row * img.width..(row + 1) * img.width]);
            }
        }
        Ok(Self { width, height, pixels })
    }
}
