//! Basis Pursuit on a toy sparse problem and on a word image.
//!
//!   cargo run --release --example basis_pursuit -- [M]

use blindprint::dataset::render_word;
use blindprint::operator::LinearOperator;
use blindprint::recovery::{psnr, reconstruct_image, solve_bp, SolverConfig};
use blindprint::sensing::{measure_coeffs, Domain, SensingMatrix};
use blindprint::wavelet::Dwt2;

fn main() -> blindprint::Result<()> {
    let m: usize = std::env::args().nth(1).map_or(200, |s| s.parse().expect("M"));
    let cfg = SolverConfig::default();

    // 4-sparse signal of length 64 from 32 binary measurements
    let a = SensingMatrix::generate(32, 64, 7, Domain::Pixel)?.to_dense();
    let mut x = vec![0.0; 64];
    for (i, v) in [(3, 1.5), (17, -0.8), (40, 2.0), (58, -1.2)] {
        x[i] = v;
    }
    let mut y = vec![0.0; 32];
    a.apply(&x, &mut y);
    let sol = solve_bp(&a, &y, &cfg)?;
    let err = sol.coeffs.iter().zip(&x).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    println!(
        "toy: |x - x*| = {err:.2e}, l1 {:.4}, {} iterations, certified {}",
        sol.l1_norm, sol.iterations, sol.certified
    );

    let dwt = Dwt2::default();
    let img = render_word("PEN")?;
    let key = SensingMatrix::for_wavelets(m, 11)?;
    let meas = measure_coeffs(&key, &dwt, &img, "PEN")?;
    let rec = reconstruct_image(&key, &meas, &dwt, &cfg)?;
    println!(
        "PEN at M={m}: PSNR {:.2} dB, {} iterations, converged {}",
        psnr(&img, &rec.image)?,
        rec.solution.iterations,
        rec.solution.converged
    );
    std::fs::create_dir_all("out/basis_pursuit")?;
    rec.image.write_pgm(std::path::Path::new(&format!("out/basis_pursuit/pen_m{m}.pgm")))?;
    Ok(())
}
