//! How compressible a rendered word is in the db10 basis.
//!
//!   cargo run --release --example wavelet_sparsity -- [WORD]

use blindprint::dataset::render_word;
use blindprint::image::{HEIGHT, WIDTH};
use blindprint::wavelet::{Db10Filter, Dwt2, PADDED_LEN};

fn main() -> blindprint::Result<()> {
    let word = std::env::args().nth(1).unwrap_or_else(|| "INK".into());
    Db10Filter::new().verify()?;
    let img = render_word(&word)?;
    let dwt = Dwt2::default();
    let c = dwt.analyze_image(&img)?;

    let mut mags: Vec<f64> = c.coeffs.iter().map(|v| v * v).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = mags.iter().sum();
    println!("{word}: {PADDED_LEN} coefficients, {} levels", dwt.levels());
    for frac in [0.005, 0.01, 0.02, 0.05, 0.1] {
        let k = (frac * PADDED_LEN as f64) as usize;
        let kept: f64 = mags[..k].iter().sum();
        println!("  largest {k:>4} carry {:>7.3}% of the energy", 100.0 * kept / total);
    }
    for band in c.bands().iter().rev().take(4) {
        let e: f64 = (0..band.rows)
            .flat_map(|r| (0..band.cols).map(move |q| (r, q)))
            .map(|(r, q)| c.coeffs[(band.row0 + r) * c.width + band.col0 + q].powi(2))
            .sum();
        println!("  level {} {:?}: {:>7.3}%", band.level, band.kind, 100.0 * e / total);
    }

    let back = dwt.synthesize_image(&c, WIDTH, HEIGHT)?;
    let err = img.pixels().iter().zip(back.pixels()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("round trip max error {err:.2e}");
    Ok(())
}
