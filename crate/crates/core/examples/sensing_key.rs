//! The sensing matrix as a key: measurements under the right key are
//! reproducible, under any other key they share nothing usable.
//!
//!   cargo run --release --example sensing_key -- [M]

use blindprint::dataset::render_word;
use blindprint::operator::LinearOperator;
use blindprint::sensing::{measure_coeffs, SensingMatrix};
use blindprint::wavelet::Dwt2;

fn corr(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let sab: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let saa: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let sbb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    sab / (saa * sbb).sqrt()
}

fn main() -> blindprint::Result<()> {
    let m: usize = std::env::args().nth(1).map_or(50, |s| s.parse().expect("M"));
    let dwt = Dwt2::default();
    let key = SensingMatrix::for_wavelets(m, 0xfeed)?;
    let again = SensingMatrix::for_wavelets(m, 0xfeed)?;
    let other = SensingMatrix::for_wavelets(m, 0xfeee)?;
    println!("M = {m}, key holds {} bits, ones fraction {:.4}", m * key.cols(), key.ones_fraction());
    println!("same seed regenerates the key: {}", key == again);

    let a = render_word("CAT")?;
    let b = render_word("DOG")?;
    let ya = measure_coeffs(&key, &dwt, &a, "CAT")?;
    let yb = measure_coeffs(&key, &dwt, &b, "DOG")?;
    let ya_other = measure_coeffs(&other, &dwt, &a, "CAT")?;
    println!("first values under key:       {:?}", &ya.values[..4]);
    println!("first values under other key: {:?}", &ya_other.values[..4]);
    println!("corr(CAT, DOG) same key    {:+.3}", corr(&ya.values, &yb.values));
    println!("corr(CAT, CAT) across keys {:+.3}", corr(&ya.values, &ya_other.values));
    Ok(())
}
