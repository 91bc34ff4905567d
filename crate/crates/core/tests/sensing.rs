mod common;

use blindprint::dataset::render_word;
use blindprint::image::GrayImage;
use blindprint::operator::LinearOperator;
use blindprint::sensing::*;
use blindprint::wavelet::{dwt2, Dwt2, Raster};
use proptest::prelude::*;
use rand::Rng;

fn random_image(seed: u64) -> GrayImage {
    let mut rng = blindprint::seed::rng(seed);
    GrayImage::new(100, 35, (0..3500).map(|_| rng.gen::<f64>()).collect()).unwrap()
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}

#[test]
fn toy_matvec_matches_triple_loop() {
    let phi = SensingMatrix::generate(3, 4, 11, Domain::Pixel).unwrap();
    let x = [0.25, -1.5, 2.0, 0.75];
    let fast = phi.measure_vector(&x).unwrap();
    for i in 0..3 {
        let mut acc = 0.0;
        for j in 0..4 {
            if phi.get(i, j) {
                acc += x[j];
            }
        }
        assert_eq!(fast[i], acc);
    }
}

#[test]
fn coefficient_path_matches_explicit_basis() {
    // measure_coeffs on a toy raster equals (phi Psi) x with Psi built tap by tap
    let psi = common::explicit_dwt2_matrix(8, 8, 2);
    let phi = SensingMatrix::generate(20, 64, 5, Domain::Wavelet).unwrap();
    let phi_psi = phi.to_dense().to_nalgebra() * &psi;
    let mut rng = blindprint::seed::rng(3);
    let x: Vec<f64> = (0..64).map(|_| rng.gen()).collect();
    let fast = phi.measure_vector(&dwt2(&Raster::new(8, 8, x.clone()).unwrap(), 2).unwrap().coeffs).unwrap();
    let slow = phi_psi * nalgebra::DVector::from_vec(x);
    for i in 0..20 {
        assert!((fast[i] - slow[i]).abs() < 1e-12);
    }
}

#[test]
fn pixel_path_shares_key_across_domains_only_by_seed() {
    let img = random_image(1);
    let px = SensingMatrix::for_pixels(50, 9).unwrap();
    let wv = SensingMatrix::for_wavelets(50, 9).unwrap();
    assert_eq!(px.cols(), 3500);
    assert_eq!(wv.cols(), 8192);
    assert!(measure_pixels(&wv, &img, "x").is_err());
    assert!(measure_coeffs(&px, &Dwt2::default(), &img, "x").is_err());
}

#[test]
fn batch_equals_single_measurements() {
    let dwt = Dwt2::default();
    let phi = SensingMatrix::for_wavelets(30, 4).unwrap();
    let imgs: Vec<GrayImage> = (0..3).map(random_image).collect();
    let pairs: Vec<(&str, &GrayImage)> = imgs.iter().map(|i| ("id", i)).collect();
    let batch = measure_batch(&phi, &dwt, &pairs).unwrap();
    for (b, img) in batch.iter().zip(&imgs) {
        let single = measure_coeffs(&phi, &dwt, img, "id").unwrap();
        assert!(rel_diff(&b.values, &single.values) < 1e-14);
    }
}

#[test]
fn key_sensitivity_over_seed_pairs() {
    let img = render_word("KEY").unwrap();
    let dwt = Dwt2::default();
    let mut rng = blindprint::seed::rng(99);
    for _ in 0..100 {
        let s: u64 = rng.gen();
        let t: u64 = rng.gen();
        let a = measure_coeffs(&SensingMatrix::for_wavelets(20, s).unwrap(), &dwt, &img, "k").unwrap();
        let b = measure_coeffs(&SensingMatrix::for_wavelets(20, t).unwrap(), &dwt, &img, "k").unwrap();
        assert!(rel_diff(&a.values, &b.values) > 1e-3);
    }
}

#[test]
fn ones_fraction_binomial_bound() {
    // 200 x 3500 entries: +-0.02 is about 13 standard deviations from 1/2
    for seed in 0..20 {
        let f = SensingMatrix::for_pixels(200, seed).unwrap().ones_fraction();
        assert!((0.48..=0.52).contains(&f), "{f}");
    }
}

#[test]
fn archive_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let set = MeasurementSet {
        m: 3,
        seed: 42,
        domain: Domain::Wavelet,
        records: vec![
            MeasurementRecord { image_id: "good-ABC".into(), label: blindprint::dataset::Label::Good, values: vec![0.1, -2.5, 1e-17] },
            MeasurementRecord { image_id: "bad-ABC".into(), label: blindprint::dataset::Label::Bad, values: vec![3.0, 0.0, 1234.5678] },
        ],
    };
    let path = dir.path().join("m3.csv");
    set.write_csv(&path).unwrap();
    assert_eq!(MeasurementSet::read_csv(&path).unwrap(), set);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# m=3 seed=42 domain=wavelet\nimage_id,label,y0,y1,y2\n"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn both_paths_linear(s1 in any::<u64>(), s2 in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let dwt = Dwt2::default();
        let (x1, x2) = (random_image(s1), random_image(s2));
        let phi = SensingMatrix::for_pixels(40, 1).unwrap();
        let psi = SensingMatrix::for_wavelets(40, 1).unwrap();
        let combo: Vec<f64> = x1.pixels().iter().zip(x2.pixels()).map(|(p, q)| a * p + b * q).collect();
        let y1 = phi.measure_vector(x1.pixels()).unwrap();
        let y2 = phi.measure_vector(x2.pixels()).unwrap();
        let yc = phi.measure_vector(&combo).unwrap();
        let expect: Vec<f64> = y1.iter().zip(&y2).map(|(p, q)| a * p + b * q).collect();
        prop_assert!(rel_diff(&yc, &expect) < 1e-9 || expect.iter().all(|v| v.abs() < 1e-9));

        let c1 = dwt.analyze_image(&x1).unwrap().coeffs;
        let c2 = dwt.analyze_image(&x2).unwrap().coeffs;
        let cc: Vec<f64> = c1.iter().zip(&c2).map(|(p, q)| a * p + b * q).collect();
        let w1 = psi.measure_vector(&c1).unwrap();
        let w2 = psi.measure_vector(&c2).unwrap();
        let wc = psi.measure_vector(&cc).unwrap();
        let expect: Vec<f64> = w1.iter().zip(&w2).map(|(p, q)| a * p + b * q).collect();
        prop_assert!(rel_diff(&wc, &expect) < 1e-9 || expect.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn scaling_carries_through(seed in any::<u64>(), a in 0.01f64..1.0) {
        let dwt = Dwt2::default();
        let x = random_image(seed);
        let ax = GrayImage::new(100, 35, x.pixels().iter().map(|v| a * v).collect()).unwrap();
        let phi = SensingMatrix::for_wavelets(25, seed).unwrap();
        let y = measure_coeffs(&phi, &dwt, &x, "x").unwrap().values;
        let ya = measure_coeffs(&phi, &dwt, &ax, "x").unwrap().values;
        let scaled: Vec<f64> = y.iter().map(|v| a * v).collect();
        prop_assert!(rel_diff(&ya, &scaled) < 1e-10);
    }

    #[test]
    fn regeneration_is_bit_exact(m in 1usize..300, seed in any::<u64>()) {
        let a = SensingMatrix::for_pixels(m, seed).unwrap();
        let b = SensingMatrix::for_pixels(m, seed).unwrap();
        prop_assert_eq!(a.bits(), b.bits());
        prop_assert_eq!(a.rows(), m);
    }
}
