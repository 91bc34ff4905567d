//! Embedded 5x7 uppercase bitmap font.
//!
//! This is the classic public-domain 5x7 dot-matrix character set. Each glyph
//! is seven rows of five bits, most significant bit leftmost.

pub const GLYPH_COLS: usize = 5;
pub const GLYPH_ROWS: usize = 7;

const GLYPHS: [[u8; GLYPH_ROWS]; 26] = [
    [0b01110, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001], // A
    [0b11110, 0b10001, 0b10001, 0b11110, 0b10001, 0b10001, 0b11110], // B
    [0b01110, 0b10001, 0b10000, 0b10000, 0b10000, 0b10001, 0b01110], // C
    [0b11100, 0b10010, 0b10001, 0b10001, 0b10001, 0b10010, 0b11100], // D
    [0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b11111], // E
    [0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b10000], // F
    [0b01110, 0b10001, 0b10000, 0b10111, 0b10001, 0b10001, 0b01111], // G
    [0b10001, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001], // H
    [0b01110, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110], // I
    [0b00111, 0b00010, 0b00010, 0b00010, 0b00010, 0b10010, 0b01100], // J
    [0b10001, 0b10010, 0b10100, 0b11000, 0b10100, 0b10010, 0b10001], // K
    [0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b11111], // L
    [0b10001, 0b11011, 0b10101, 0b10101, 0b10001, 0b10001, 0b10001], // M
    [0b10001, 0b10001, 0b11001, 0b10101, 0b10011, 0b10001, 0b10001], // N
    [0b01110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110], // O
    [0b11110, 0b10001, 0b10001, 0b11110, 0b10000, 0b10000, 0b10000], // P
    [0b01110, 0b10001, 0b10001, 0b10001, 0b10101, 0b10010, 0b01101], // Q
    [0b11110, 0b10001, 0b10001, 0b11110, 0b10100, 0b10010, 0b10001], // R
    [0b01111, 0b10000, 0b10000, 0b01110, 0b00001, 0b00001, 0b11110], // S
    [0b11111, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100], // T
    [0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110], // U
    [0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01010, 0b00100], // V
    [0b10001, 0b10001, 0b10001, 0b10101, 0b10101, 0b10101, 0b01010], // W
    [0b10001, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001, 0b10001], // X
    [0b10001, 0b10001, 0b01010, 0b00100, 0b00100, 0b00100, 0b00100], // Y
    [0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b10000, 0b11111], // Z
];

/// Bitmap rows for an uppercase ASCII letter.
pub fn glyph(letter: char) -> Option<&'static [u8; GLYPH_ROWS]> {
    letter.is_ascii_uppercase().then(|| &GLYPHS[(letter as u8 - b'A') as usize])
}

/// Whether the dot at `(row, col)` of `letter` is inked.
pub fn dot(letter: char, row: usize, col: usize) -> bool {
    glyph(letter).is_some_and(|g| g[row] & (1 << (GLYPH_COLS - 1 - col)) != 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dots_per_letter() {
        let count = |c| (0..GLYPH_ROWS).flat_map(|r| (0..GLYPH_COLS).map(move |k| (r, k))).filter(|&(r, k)| dot(c, r, k)).count();
        assert_eq!(count('I'), 11);
        assert_eq!(count('W'), 17);
        assert_eq!(count('L'), 11);
    }

    #[test]
    fn only_uppercase() {
        assert!(glyph('a').is_none());
        assert!(glyph('1').is_none());
        assert!(glyph('Z').is_some());
    }
}
