//! Synthetic print-error corpus: word rendering, error injection, and the
//! on-disk dataset layout (`manifest.csv`, `dataset.meta`, `images/*.pgm`).

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::font::{self, GLYPH_COLS, GLYPH_ROWS};
use crate::image::{GrayImage, HEIGHT, WIDTH};
use crate::seed;

/// Number of three-letter uppercase words.
pub const WORD_COUNT: usize = 26 * 26 * 26;

/// Each font dot becomes a `DOT_SCALE x DOT_SCALE` block (glyphs are 20x28 px).
pub const DOT_SCALE: usize = 4;
const GLYPH_W: usize = GLYPH_COLS * DOT_SCALE;
const GLYPH_H: usize = GLYPH_ROWS * DOT_SCALE;
const GLYPH_GAP: usize = 6;
const LEFT_MARGIN: usize = (WIDTH - 3 * GLYPH_W - 2 * GLYPH_GAP) / 2;
/// First row of the text band.
pub const TEXT_TOP: usize = 3;
/// One past the last row of the text band.
pub const TEXT_BOTTOM: usize = TEXT_TOP + GLYPH_H;

pub const INK: f64 = 0.0;
pub const PAPER: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Good,
    Bad,
}

impl Label {
    /// Categorical encoding: 0 for good, 1 for bad.
    pub fn code(self) -> u8 {
        match self {
            Label::Good => 0,
            Label::Bad => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Label::Good),
            1 => Some(Label::Bad),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Good => "good",
            Label::Bad => "bad",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "good" | "0" => Ok(Label::Good),
            "bad" | "1" => Ok(Label::Bad),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    None,
    /// Filled ink splat.
    Blot,
    /// Horizontal streak left by a dragging printhead.
    DragLine,
    /// Band of rows shifted sideways by a slipping printhead.
    SlipLine,
}

impl ErrorKind {
    pub const INJECTABLE: [ErrorKind; 3] = [ErrorKind::Blot, ErrorKind::DragLine, ErrorKind::SlipLine];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::None => "none",
            ErrorKind::Blot => "blot",
            ErrorKind::DragLine => "drag_line",
            ErrorKind::SlipLine => "slip_line",
        }
    }

    pub fn label(self) -> Label {
        if self == ErrorKind::None {
            Label::Good
        } else {
            Label::Bad
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(ErrorKind::None),
            "blot" => Ok(ErrorKind::Blot),
            "drag_line" => Ok(ErrorKind::DragLine),
            "slip_line" => Ok(ErrorKind::SlipLine),
            other => Err(format!("unknown error kind {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledSample {
    pub image_id: String,
    pub word: String,
    pub label: Label,
    pub error: ErrorKind,
    /// Error-injection seed; 0 for good samples.
    pub seed: u64,
}

impl LabeledSample {
    pub fn image_id_for(word: &str, label: Label) -> String {
        format!("{}-{word}", label.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetManifest {
    pub global_seed: u64,
    pub entries: Vec<LabeledSample>,
}

impl DatasetManifest {
    pub fn counts(&self) -> BTreeMap<(Label, ErrorKind), usize> {
        let mut counts = BTreeMap::new();
        for e in &self.entries {
            *counts.entry((e.label, e.error)).or_insert(0) += 1;
        }
        counts
    }

    pub fn count_label(&self, label: Label) -> usize {
        self.entries.iter().filter(|e| e.label == label).count()
    }

    pub fn find(&self, image_id: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.image_id == image_id)
    }
}

/// A manifest together with its images, aligned by index.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub images: Vec<GrayImage>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn image(&self, image_id: &str) -> Option<&GrayImage> {
        self.manifest.find(image_id).map(|i| &self.images[i])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Scale {
    Full,
    /// Fraction of the word list in `(0, 1]`.
    Fraction(f64),
    /// Exact number of words.
    Words(usize),
}

impl Scale {
    pub fn word_count(self) -> Result<usize> {
        match self {
            Scale::Full => Ok(WORD_COUNT),
            Scale::Fraction(f) if f > 0.0 && f <= 1.0 => {
                Ok(((f * WORD_COUNT as f64).round() as usize).max(1))
            }
            Scale::Fraction(f) => Err(Error::InvalidArgument(format!("scale {f} outside (0, 1]"))),
            Scale::Words(n) if (1..=WORD_COUNT).contains(&n) => Ok(n),
            Scale::Words(n) => Err(Error::InvalidArgument(format!("word count {n} outside [1, {WORD_COUNT}]"))),
        }
    }
}

impl FromStr for Scale {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("full") {
            return Ok(Scale::Full);
        }
        if let Some(n) = s.strip_prefix("words:") {
            return n.parse().map(Scale::Words).map_err(|e| format!("bad word count {n:?}: {e}"));
        }
        if let Some((a, b)) = s.split_once('/') {
            let a: f64 = a.trim().parse().map_err(|e| format!("bad scale {s:?}: {e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("bad scale {s:?}: {e}"))?;
            return Ok(Scale::Fraction(a / b));
        }
        s.parse().map(Scale::Fraction).map_err(|e| format!("bad scale {s:?}: {e}"))
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scale::Full => f.write_str("full"),
            Scale::Fraction(x) => write!(f, "{x}"),
            Scale::Words(n) => write!(f, "words:{n}"),
        }
    }
}

/// Ranges for the randomly drawn artifact geometry. All ranges inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorGeometry {
    /// Blot semi-axis lengths in pixels.
    pub blot_axis: (usize, usize),
    pub drag_thickness: (usize, usize),
    pub drag_length: (usize, usize),
    pub slip_band_rows: (usize, usize),
    pub slip_offset: (usize, usize),
    /// An artifact must change at least this many pixels.
    pub min_changed: usize,
    /// Redraws allowed before settling for the largest artifact seen.
    pub max_attempts: u32,
}

impl Default for ErrorGeometry {
    fn default() -> Self {
        Self {
            blot_axis: (4, 10),
            drag_thickness: (1, 3),
            drag_length: (40, 80),
            slip_band_rows: (5, 12),
            slip_offset: (3, 8),
            min_changed: 15,
            max_attempts: 32,
        }
    }
}

impl ErrorGeometry {
    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("blot_axis", self.blot_axis),
            ("drag_thickness", self.drag_thickness),
            ("drag_length", self.drag_length),
            ("slip_band_rows", self.slip_band_rows),
            ("slip_offset", self.slip_offset),
        ];
        for (name, (lo, hi)) in ranges {
            if lo == 0 || lo > hi {
                return Err(Error::InvalidArgument(format!("{name} range ({lo}, {hi}) is empty or zero")));
            }
        }
        if self.drag_thickness.1 > TEXT_BOTTOM - TEXT_TOP || self.slip_band_rows.1 > TEXT_BOTTOM - TEXT_TOP {
            return Err(Error::InvalidArgument("band taller than the text band".into()));
        }
        if self.drag_length.1 > WIDTH || self.slip_offset.1 >= WIDTH {
            return Err(Error::InvalidArgument("horizontal extent exceeds image width".into()));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidArgument("max_attempts must be positive".into()));
        }
        Ok(())
    }
}

fn validate_word(word: &str) -> Result<[char; 3]> {
    if let Some(c) = word.chars().find(|c| !c.is_ascii_uppercase()) {
        return Err(Error::InvalidCharacter(c));
    }
    let chars: Vec<char> = word.chars().collect();
    chars.try_into().map_err(|_| Error::InvalidWordLength(word.to_string()))
}

/// Left edge of the `slot`-th glyph.
pub fn glyph_left(slot: usize) -> usize {
    LEFT_MARGIN + slot * (GLYPH_W + GLYPH_GAP)
}

/// Renders a three-letter word as dark glyphs on a light 35x100 sheet.
pub fn render_word(word: &str) -> Result<GrayImage> {
    let letters = validate_word(word)?;
    let mut img = GrayImage::blank();
    for (slot, &letter) in letters.iter().enumerate() {
        let x0 = glyph_left(slot);
        for row in 0..GLYPH_H {
            for col in 0..GLYPH_W {
                if font::dot(letter, row / DOT_SCALE, col / DOT_SCALE) {
                    img.set(TEXT_TOP + row, x0 + col, INK);
                }
            }
        }
    }
    Ok(img)
}

/// All 17576 words in lexicographic order.
pub fn all_words() -> Vec<String> {
    let mut words = Vec::with_capacity(WORD_COUNT);
    for a in b'A'..=b'Z' {
        for b in b'A'..=b'Z' {
            for c in b'A'..=b'Z' {
                words.push(String::from_utf8(vec![a, b, c]).expect("ascii"));
            }
        }
    }
    words
}

/// Injects one artifact of `kind` with the default geometry.
pub fn inject_error(img: &GrayImage, kind: ErrorKind, seed: u64) -> Result<GrayImage> {
    inject_error_with(img, kind, seed, &ErrorGeometry::default())
}

/// Injects one artifact. Geometry is redrawn (deterministically from `seed`)
/// until it changes at least `min_changed` pixels, and for blots also touches
/// existing ink; if no draw qualifies the largest artifact is kept.
pub fn inject_error_with(img: &GrayImage, kind: ErrorKind, seed: u64, geom: &ErrorGeometry) -> Result<GrayImage> {
    if kind == ErrorKind::None {
        return Err(Error::NoErrorKind);
    }
    if (img.width(), img.height()) != (WIDTH, HEIGHT) {
        return Err(Error::DimensionMismatch { expected: WIDTH * HEIGHT, actual: img.len() });
    }
    geom.validate()?;
    let has_ink = img.pixels().iter().any(|&p| p < 0.5);

    let mut best: Option<(usize, GrayImage)> = None;
    for attempt in 0..geom.max_attempts {
        let mut rng = seed::rng(seed::derive(seed, u64::from(attempt)));
        let (out, touched_ink) = match kind {
            ErrorKind::Blot => draw_blot(img, &mut rng, geom),
            ErrorKind::DragLine => (draw_drag_line(img, &mut rng, geom), true),
            ErrorKind::SlipLine => (draw_slip(img, &mut rng, geom), true),
            ErrorKind::None => unreachable!(),
        };
        let changed = out.diff_count(img);
        if changed >= geom.min_changed && (touched_ink || !has_ink) {
            return Ok(out);
        }
        if best.as_ref().is_none_or(|(c, _)| changed > *c) {
            best = Some((changed, out));
        }
    }
    Ok(best.expect("max_attempts > 0").1)
}

fn uniform(rng: &mut impl Rng, (lo, hi): (usize, usize)) -> usize {
    rng.gen_range(lo..=hi)
}

fn draw_blot(img: &GrayImage, rng: &mut impl Rng, geom: &ErrorGeometry) -> (GrayImage, bool) {
    let slot = rng.gen_range(0..3);
    let cx = (glyph_left(slot) + rng.gen_range(0..GLYPH_W)) as f64;
    let cy = rng.gen_range(TEXT_TOP..TEXT_BOTTOM) as f64;
    let ax = uniform(rng, geom.blot_axis) as f64;
    let ay = uniform(rng, geom.blot_axis) as f64;
    let mut out = img.clone();
    let mut touched_ink = false;
    for row in 0..HEIGHT {
        for col in 0..WIDTH {
            let dx = (col as f64 - cx) / ax;
            let dy = (row as f64 - cy) / ay;
            if dx * dx + dy * dy <= 1.0 {
                touched_ink |= img.get(row, col) < 0.5;
                out.set(row, col, INK);
            }
        }
    }
    (out, touched_ink)
}

fn draw_drag_line(img: &GrayImage, rng: &mut impl Rng, geom: &ErrorGeometry) -> GrayImage {
    let thickness = uniform(rng, geom.drag_thickness);
    let length = uniform(rng, geom.drag_length);
    let start = rng.gen_range(0..=WIDTH - length);
    let row0 = rng.gen_range(TEXT_TOP..=TEXT_BOTTOM - thickness);
    let mut out = img.clone();
    for row in row0..row0 + thickness {
        for col in start..start + length {
            out.set(row, col, INK);
        }
    }
    out
}

fn draw_slip(img: &GrayImage, rng: &mut impl Rng, geom: &ErrorGeometry) -> GrayImage {
    let band = uniform(rng, geom.slip_band_rows);
    let offset = uniform(rng, geom.slip_offset);
    let rightward: bool = rng.gen();
    let row0 = rng.gen_range(TEXT_TOP..=TEXT_BOTTOM - band);
    let mut out = img.clone();
    for row in row0..row0 + band {
        for col in 0..WIDTH {
            let src = if rightward { col.checked_sub(offset) } else { Some(col + offset).filter(|&c| c < WIDTH) };
            out.set(row, col, src.map_or(PAPER, |c| img.get(row, c)));
        }
    }
    out
}

/// Generates the labeled corpus. Every selected word yields one good image
/// and one bad image; error kinds are dealt round-robin over a seeded
/// shuffle of the selected words.
pub fn generate_dataset(global_seed: u64, scale: Scale) -> Result<Dataset> {
    generate_dataset_with(global_seed, scale, &ErrorGeometry::default())
}

pub fn generate_dataset_with(global_seed: u64, scale: Scale, geom: &ErrorGeometry) -> Result<Dataset> {
    geom.validate()?;
    let count = scale.word_count()?;
    let mut words = all_words();
    if count < WORD_COUNT {
        words.shuffle(&mut seed::rng(seed::derive_str(global_seed, "dataset/subsample")));
        words.truncate(count);
        words.sort();
    }

    let mut order: Vec<usize> = (0..words.len()).collect();
    order.shuffle(&mut seed::rng(seed::derive_str(global_seed, "dataset/errors")));
    let mut kinds = vec![ErrorKind::None; words.len()];
    for (pos, &idx) in order.iter().enumerate() {
        kinds[idx] = ErrorKind::INJECTABLE[pos % 3];
    }

    let inject_base = seed::derive_str(global_seed, "dataset/inject");
    let rendered: Vec<(GrayImage, GrayImage, u64)> = words
        .par_iter()
        .zip(kinds.par_iter())
        .map(|(word, &kind)| {
            let good = render_word(word)?;
            let word_seed = seed::derive(inject_base, word_index(word));
            let bad = inject_error_with(&good, kind, word_seed, geom)?;
            Ok((good, bad, word_seed))
        })
        .collect::<Result<_>>()?;

    let mut entries = Vec::with_capacity(2 * words.len());
    let mut images = Vec::with_capacity(2 * words.len());
    let mut bad_entries = Vec::with_capacity(words.len());
    let mut bad_images = Vec::with_capacity(words.len());
    for ((word, kind), (good, bad, word_seed)) in words.iter().zip(kinds).zip(rendered) {
        entries.push(LabeledSample {
            image_id: LabeledSample::image_id_for(word, Label::Good),
            word: word.clone(),
            label: Label::Good,
            error: ErrorKind::None,
            seed: 0,
        });
        images.push(good);
        bad_entries.push(LabeledSample {
            image_id: LabeledSample::image_id_for(word, Label::Bad),
            word: word.clone(),
            label: Label::Bad,
            error: kind,
            seed: word_seed,
        });
        bad_images.push(bad);
    }
    entries.extend(bad_entries);
    images.extend(bad_images);
    Ok(Dataset { manifest: DatasetManifest { global_seed, entries }, images })
}

/// Position of a word in the lexicographic list.
pub fn word_index(word: &str) -> u64 {
    word.bytes().fold(0u64, |acc, b| acc * 26 + u64::from(b - b'A'))
}

#[derive(Serialize, Deserialize)]
struct ManifestRow<'a> {
    image_id: &'a str,
    word: &'a str,
    label: &'a str,
    error: &'a str,
    seed: u64,
}

pub const MANIFEST_FILE: &str = "manifest.csv";
pub const META_FILE: &str = "dataset.meta";
pub const IMAGE_DIR: &str = "images";

pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<()> {
    let image_dir = dir.join(IMAGE_DIR);
    fs::create_dir_all(&image_dir)?;
    let mut w = csv::Writer::from_path(dir.join(MANIFEST_FILE))?;
    for e in &dataset.manifest.entries {
        w.serialize(ManifestRow {
            image_id: &e.image_id,
            word: &e.word,
            label: e.label.as_str(),
            error: e.error.as_str(),
            seed: e.seed,
        })?;
    }
    w.flush()?;
    fs::write(dir.join(META_FILE), format!("global_seed={}\n", dataset.manifest.global_seed))?;
    dataset
        .manifest
        .entries
        .par_iter()
        .zip(dataset.images.par_iter())
        .try_for_each(|(e, img)| img.write_pgm(&image_dir.join(format!("{}.pgm", e.image_id))))
}

pub fn load_manifest(dir: &Path) -> Result<DatasetManifest> {
    let meta = fs::read_to_string(dir.join(META_FILE))?;
    let global_seed = meta
        .lines()
        .find_map(|l| l.strip_prefix("global_seed="))
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::MalformedManifest { row: 0, reason: format!("{META_FILE} lacks global_seed") })?;

    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_path(dir.join(MANIFEST_FILE))?;
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["image_id", "word", "label", "error", "seed"] {
        return Err(Error::MalformedManifest { row: 1, reason: "unexpected header".into() });
    }
    let mut entries = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        // header is row 1
        let row = i + 2;
        let rec = rec.map_err(|e| Error::MalformedManifest { row, reason: e.to_string() })?;
        let bad = |reason: String| Error::MalformedManifest { row, reason };
        if rec.len() != 5 {
            return Err(bad(format!("expected 5 fields, found {}", rec.len())));
        }
        let word = rec[1].to_string();
        validate_word(&word).map_err(|e| bad(e.to_string()))?;
        let label: Label = rec[2].parse().map_err(bad)?;
        let error: ErrorKind = rec[3].parse().map_err(bad)?;
        if error.label() != label {
            return Err(bad(format!("label {label} inconsistent with error {error}")));
        }
        let seed = rec[4].parse().map_err(|e| bad(format!("bad seed: {e}")))?;
        entries.push(LabeledSample { image_id: rec[0].to_string(), word, label, error, seed });
    }
    Ok(DatasetManifest { global_seed, entries })
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let manifest = load_manifest(dir)?;
    let image_dir = dir.join(IMAGE_DIR);
    let images = manifest
        .entries
        .par_iter()
        .map(|e| {
            let path = image_dir.join(format!("{}.pgm", e.image_id));
            if !path.is_file() {
                return Err(Error::MissingImage { image_id: e.image_id.clone() });
            }
            GrayImage::read_pgm(&path)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset { manifest, images })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_is_deterministic() {
        assert_eq!(render_word("AAA").unwrap(), render_word("AAA").unwrap());
    }

    #[test]
    fn ink_darkens() {
        assert!(render_word("AXP").unwrap().mean() < GrayImage::blank().mean());
    }

    #[test]
    fn wide_glyphs_cover_more() {
        // W has 17 dots and I has 11, each dot is 16 px.
        let www = render_word("WWW").unwrap().mean();
        let iii = render_word("III").unwrap().mean();
        let expected_www = 1.0 - (3.0 * 17.0 * 16.0) / 3500.0;
        let expected_iii = 1.0 - (3.0 * 11.0 * 16.0) / 3500.0;
        assert!((www - expected_www).abs() < 1e-12);
        assert!((iii - expected_iii).abs() < 1e-12);
        assert!(www < iii);
    }

    #[test]
    fn glyphs_are_not_clipped() {
        let img = render_word("MWM").unwrap();
        for row in 0..HEIGHT {
            assert_eq!(img.get(row, 0), PAPER);
            assert_eq!(img.get(row, WIDTH - 1), PAPER);
        }
        for col in 0..WIDTH {
            assert_eq!(img.get(0, col), PAPER);
            assert_eq!(img.get(HEIGHT - 1, col), PAPER);
        }
    }

    #[test]
    fn invalid_character_named() {
        match render_word("AbC") {
            Err(Error::InvalidCharacter('b')) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(render_word("AB"), Err(Error::InvalidWordLength(_))));
        assert!(matches!(render_word("A1C"), Err(Error::InvalidCharacter('1'))));
    }

    #[test]
    fn none_kind_rejected() {
        let img = render_word("CAT").unwrap();
        assert!(matches!(inject_error(&img, ErrorKind::None, 1), Err(Error::NoErrorKind)));
    }

    #[test]
    fn injection_deterministic() {
        let img = render_word("AXP").unwrap();
        for kind in ErrorKind::INJECTABLE {
            assert_eq!(inject_error(&img, kind, 42).unwrap(), inject_error(&img, kind, 42).unwrap());
        }
    }

    #[test]
    fn drag_line_changes_enough_pixels() {
        let img = render_word("RYN").unwrap();
        for s in 0..50 {
            let out = inject_error(&img, ErrorKind::DragLine, s).unwrap();
            assert!(out.diff_count(&img) >= 15, "seed {s}");
        }
    }

    #[test]
    fn slip_on_blank_is_confined_to_band() {
        let blank = GrayImage::blank();
        for s in 0..20 {
            let out = inject_error(&blank, ErrorKind::SlipLine, s).unwrap();
            // uniform paper shifted onto itself, vacated columns refilled with paper
            assert_eq!(out, blank);
        }
        let img = render_word("PKC").unwrap();
        let out = inject_error(&img, ErrorKind::SlipLine, 3).unwrap();
        for row in 0..HEIGHT {
            let changed = (0..WIDTH).any(|c| out.get(row, c) != img.get(row, c));
            if changed {
                assert!((TEXT_TOP..TEXT_BOTTOM).contains(&row));
            }
        }
    }

    #[test]
    fn blot_overlaps_ink() {
        let img = render_word("AXP").unwrap();
        for s in 0..30 {
            let out = inject_error(&img, ErrorKind::Blot, s).unwrap();
            assert!(out.diff_count(&img) >= 15);
        }
    }

    #[test]
    fn scale_parsing() {
        assert_eq!("full".parse::<Scale>().unwrap(), Scale::Full);
        assert_eq!("1/676".parse::<Scale>().unwrap().word_count().unwrap(), 26);
        assert_eq!("words:2500".parse::<Scale>().unwrap().word_count().unwrap(), 2500);
        assert!(Scale::Fraction(0.0).word_count().is_err());
        assert!(Scale::Fraction(1.5).word_count().is_err());
    }

    #[test]
    fn geometry_validation() {
        let bad = ErrorGeometry { blot_axis: (5, 4), ..Default::default() };
        assert!(bad.validate().is_err());
        let tall = ErrorGeometry { slip_band_rows: (5, 40), ..Default::default() };
        assert!(tall.validate().is_err());
        assert!(ErrorGeometry::default().validate().is_ok());
    }

    #[test]
    fn word_index_is_lexicographic() {
        let words = all_words();
        assert_eq!(words.len(), WORD_COUNT);
        for (i, w) in words.iter().enumerate().step_by(997) {
            assert_eq!(word_index(w), i as u64);
        }
    }
}
