//! Basis Pursuit reconstruction: the adversary's best attempt at recovering
//! an image from its measurements with full knowledge of the key.
//!
//! `minimize ||w||_1 subject to A w = y` is solved by ADMM on the splitting
//! `w = z`: the `w`-step is the exact projection onto the affine set
//! `{w : A w = y}` (using a Cholesky factorization of `A A^T` computed once
//! per operator), the `z`-step is soft thresholding, and the penalty is
//! adapted by residual balancing. A final polishing step solves least
//! squares on the support of `z`, which lands exactly on the LP vertex when
//! the support has been identified; a dual certificate built from the ADMM
//! multipliers confirms optimality and ends the iteration early.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{GrayImage, HEIGHT, WIDTH};
use crate::operator::{DenseMatrix, LinearOperator};
use crate::sensing::{Domain, Measurement, SensingMatrix};
use crate::wavelet::{Dwt2, Raster, WaveletCoeffs, PAD_HEIGHT, PAD_WIDTH, PADDED_LEN};

const RHO_UPDATE_INTERVAL: usize = 10;
const CERTIFY_INTERVAL: usize = 500;
const CERTIFY_TOL: f64 = 1e-9;
/// After this many penalty changes the penalty is held fixed.
const MAX_RHO_UPDATES: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub max_iterations: usize,
    /// Initial ADMM penalty.
    pub rho: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    /// Rebalance when one residual exceeds the other by this ratio.
    pub balance_ratio: f64,
    /// Multiplicative penalty step.
    pub rho_step: f64,
    pub polish: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_abs: 1e-6,
            tol_rel: 1e-6,
            max_iterations: 5000,
            rho: 1.0,
            rho_min: 1e-4,
            rho_max: 1e4,
            balance_ratio: 10.0,
            rho_step: 2.0,
            polish: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_abs > 0.0 && self.tol_rel > 0.0) {
            return Err(Error::InvalidArgument("solver tolerances must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be at least 1".into()));
        }
        if !(self.rho_min > 0.0 && self.rho_min <= self.rho && self.rho <= self.rho_max) {
            return Err(Error::InvalidArgument("penalty must satisfy 0 < rho_min <= rho <= rho_max".into()));
        }
        if self.rho_step <= 1.0 || self.balance_ratio <= 1.0 {
            return Err(Error::InvalidArgument("rho_step and balance_ratio must exceed 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BpSolution {
    pub coeffs: Vec<f64>,
    /// `||A coeffs - y||_2`
    pub residual: f64,
    pub l1_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Whether the returned point came from the support least-squares polish.
    pub polished: bool,
    /// Whether a dual certificate proved the returned point optimal.
    pub certified: bool,
    /// Best feasible l1 value seen after each iteration.
    pub objective_trace: Vec<f64>,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Basis Pursuit solver bound to one operator; reusable across measurements.
pub struct BasisPursuit<'a, A: LinearOperator> {
    op: &'a A,
    gram: Cholesky<f64, Dyn>,
    cfg: SolverConfig,
}

impl<'a, A: LinearOperator> BasisPursuit<'a, A> {
    pub fn new(op: &'a A, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        if op.rows() == 0 || op.rows() > op.cols() {
            return Err(Error::InvalidArgument(format!(
                "basis pursuit needs 0 < M <= N, got {}x{}",
                op.rows(),
                op.cols()
            )));
        }
        let gram = Cholesky::new(op.gram())
            .ok_or_else(|| Error::Numerical("A A^T is not positive definite (rank-deficient operator)".into()))?;
        Ok(Self { op, gram, cfg })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// `out = v - A^T (A A^T)^{-1} (A v - y)`
    fn project(&self, v: &[f64], y: &[f64], scratch_m: &mut [f64], out: &mut [f64]) {
        self.op.apply(v, scratch_m);
        for (s, yi) in scratch_m.iter_mut().zip(y) {
            *s -= yi;
        }
        let mut r = DVector::from_column_slice(scratch_m);
        self.gram.solve_mut(&mut r);
        self.op.apply_adjoint(r.as_slice(), out);
        for (o, vi) in out.iter_mut().zip(v) {
            *o = vi - *o;
        }
    }

    fn residual(&self, w: &[f64], y: &[f64]) -> f64 {
        let mut aw = vec![0.0; self.op.rows()];
        self.op.apply(w, &mut aw);
        aw.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    pub fn feasibility_tolerance(&self, y: &[f64]) -> f64 {
        self.cfg.tol_abs + self.cfg.tol_rel * norm2(y)
    }

    pub fn solve(&self, y: &[f64]) -> Result<BpSolution> {
        let (m, n) = (self.op.rows(), self.op.cols());
        if y.len() != m {
            return Err(Error::DimensionMismatch { expected: m, actual: y.len() });
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("measurement {i} is not finite")));
        }
        if y.iter().all(|&v| v == 0.0) {
            return Ok(BpSolution {
                coeffs: vec![0.0; n],
                residual: 0.0,
                l1_norm: 0.0,
                iterations: 0,
                converged: true,
                polished: false,
                certified: true,
                objective_trace: Vec::new(),
            });
        }

        let cfg = &self.cfg;
        let sqrt_n = (n as f64).sqrt();
        let mut rho = cfg.rho;
        let mut x = vec![0.0; n];
        let mut z = vec![0.0; n];
        let mut z_prev = vec![0.0; n];
        let mut u = vec![0.0; n];
        let mut v = vec![0.0; n];
        let mut scratch = vec![0.0; m];
        let mut best = vec![0.0; n];
        let mut best_l1 = f64::INFINITY;
        let mut trace = Vec::new();
        let mut converged = false;
        let mut iterations = 0;
        let mut rho_updates = 0;
        let mut certified = None;

        while iterations < cfg.max_iterations {
            iterations += 1;
            for ((vi, zi), ui) in v.iter_mut().zip(&z).zip(&u) {
                *vi = zi - ui;
            }
            self.project(&v, y, &mut scratch, &mut x);

            std::mem::swap(&mut z, &mut z_prev);
            let kappa = 1.0 / rho;
            let mut r2 = 0.0;
            let mut s2 = 0.0;
            for i in 0..n {
                let t = x[i] + u[i];
                z[i] = if t > kappa {
                    t - kappa
                } else if t < -kappa {
                    t + kappa
                } else {
                    0.0
                };
                let d = x[i] - z[i];
                u[i] += d;
                r2 += d * d;
                let dz = z[i] - z_prev[i];
                s2 += dz * dz;
            }

            let l1 = norm1(&x);
            if l1 < best_l1 {
                best_l1 = l1;
                best.copy_from_slice(&x);
            }
            trace.push(best_l1);

            let r = r2.sqrt();
            let s = rho * s2.sqrt();
            let eps_pri = sqrt_n * cfg.tol_abs + cfg.tol_rel * norm2(&x).max(norm2(&z));
            let eps_dual = sqrt_n * cfg.tol_abs + cfg.tol_rel * rho * norm2(&u);
            if r <= eps_pri && s <= eps_dual {
                converged = true;
                break;
            }
            if cfg.polish && iterations % CERTIFY_INTERVAL == 0 {
                if let Some(p) = self.certified_polish(&z, &u, rho, y) {
                    certified = Some(p);
                    break;
                }
            }

            let adapt = iterations % RHO_UPDATE_INTERVAL == 0 && rho_updates < MAX_RHO_UPDATES;
            let scale = if !adapt {
                1.0
            } else if r > cfg.balance_ratio * s && rho * cfg.rho_step <= cfg.rho_max {
                cfg.rho_step
            } else if s > cfg.balance_ratio * r && rho / cfg.rho_step >= cfg.rho_min {
                1.0 / cfg.rho_step
            } else {
                1.0
            };
            if scale != 1.0 {
                rho_updates += 1;
                rho *= scale;
                // scaled dual variable u = lambda / rho
                for ui in u.iter_mut() {
                    *ui /= scale;
                }
            }
        }

        let tol = self.feasibility_tolerance(y);
        if certified.is_none() && cfg.polish {
            certified = self.certified_polish(&z, &u, rho, y);
        }
        let is_certified = certified.is_some();
        let mut coeffs = best;
        let mut residual = self.residual(&coeffs, y);
        let mut polished = false;
        if let Some(p) = certified {
            coeffs = p;
            residual = self.residual(&coeffs, y);
            polished = true;
        } else if cfg.polish {
            if let Some((p, _)) = self.polish(&z, y) {
                let p_res = self.residual(&p, y);
                if p_res <= tol && norm1(&p) <= norm1(&coeffs) {
                    coeffs = p;
                    residual = p_res;
                    polished = true;
                }
            }
        }
        let l1_norm = norm1(&coeffs);
        if let Some(last) = trace.last_mut() {
            *last = last.min(l1_norm);
        }
        Ok(BpSolution {
            coeffs,
            residual,
            l1_norm,
            iterations,
            converged: (converged || is_certified) && residual <= tol,
            polished,
            certified: is_certified,
            objective_trace: trace,
        })
    }

    /// Least squares restricted to the support of `z`, with `A_S` and `S`.
    fn polish(&self, z: &[f64], y: &[f64]) -> Option<(Vec<f64>, (DMatrix<f64>, Vec<usize>))> {
        let m = self.op.rows();
        let support: Vec<usize> = z.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect();
        if support.is_empty() || support.len() > m {
            return None;
        }
        let k = support.len();
        let mut a_s = DMatrix::zeros(m, k);
        let mut e = vec![0.0; m];
        let mut row = vec![0.0; self.op.cols()];
        for i in 0..m {
            e[i] = 1.0;
            self.op.apply_adjoint(&e, &mut row);
            for (c, &j) in support.iter().enumerate() {
                a_s[(i, c)] = row[j];
            }
            e[i] = 0.0;
        }
        let normal = a_s.tr_mul(&a_s);
        let rhs = a_s.tr_mul(&DVector::from_column_slice(y));
        let w_s = Cholesky::new(normal)?.solve(&rhs);
        let mut w = vec![0.0; self.op.cols()];
        for (c, &j) in support.iter().enumerate() {
            w[j] = w_s[c];
        }
        w.iter().all(|v| v.is_finite()).then_some((w, (a_s, support)))
    }

    /// Polished point, if it is feasible and a dual vector `nu` with
    /// `A_S^T nu = sign(w_S)` and `||A^T nu||_inf <= 1` proves it optimal.
    /// `nu` is the ADMM estimate `-(A A^T)^{-1} A (rho u)` corrected onto
    /// the affine constraint.
    fn certified_polish(&self, z: &[f64], u: &[f64], rho: f64, y: &[f64]) -> Option<Vec<f64>> {
        let (w, (a_s, support)) = self.polish(z, y)?;
        if self.residual(&w, y) > self.feasibility_tolerance(y) {
            return None;
        }
        let (m, n) = (self.op.rows(), self.op.cols());
        let lambda: Vec<f64> = u.iter().map(|v| -rho * v).collect();
        let mut al = vec![0.0; m];
        self.op.apply(&lambda, &mut al);
        let mut nu = DVector::from_vec(al);
        self.gram.solve_mut(&mut nu);
        let signs = DVector::from_iterator(support.len(), support.iter().map(|&j| w[j].signum()));
        let defect = &signs - a_s.tr_mul(&nu);
        let corr = Cholesky::new(a_s.tr_mul(&a_s))?.solve(&defect);
        let nu = nu + &a_s * corr;
        let mut g = vec![0.0; n];
        self.op.apply_adjoint(nu.as_slice(), &mut g);
        let on_support = support.iter().all(|&j| (g[j] - w[j].signum()).abs() <= 1e-6);
        let bounded = g.iter().all(|v| v.abs() <= 1.0 + CERTIFY_TOL);
        (on_support && bounded).then_some(w)
    }
}

/// One-shot Basis Pursuit solve.
pub fn solve_bp<A: LinearOperator>(op: &A, y: &[f64], cfg: &SolverConfig) -> Result<BpSolution> {
    BasisPursuit::new(op, cfg.clone())?.solve(y)
}

/// `phi . crop . idwt2`: pixel-domain measurements as a function of wavelet
/// coefficients. Its adjoint is `dwt2 . zero-extend . phi^T`.
pub struct PixelSynthesis<'a> {
    phi: &'a DenseMatrix,
    dwt: &'a Dwt2,
}

impl<'a> PixelSynthesis<'a> {
    pub fn new(phi: &'a DenseMatrix, dwt: &'a Dwt2) -> Result<Self> {
        if phi.cols() != WIDTH * HEIGHT {
            return Err(Error::DimensionMismatch { expected: WIDTH * HEIGHT, actual: phi.cols() });
        }
        Ok(Self { phi, dwt })
    }
}

impl LinearOperator for PixelSynthesis<'_> {
    fn rows(&self) -> usize {
        self.phi.rows()
    }

    fn cols(&self) -> usize {
        PADDED_LEN
    }

    fn apply(&self, w: &[f64], out: &mut [f64]) {
        let coeffs = WaveletCoeffs { coeffs: w.to_vec(), width: PAD_WIDTH, height: PAD_HEIGHT, levels: self.dwt.levels() };
        let raster = self.dwt.inverse(&coeffs).expect("well-formed coefficients");
        let mut pixels = Vec::with_capacity(WIDTH * HEIGHT);
        for row in 0..HEIGHT {
            pixels.extend_from_slice(&raster.data[row * PAD_WIDTH..row * PAD_WIDTH + WIDTH]);
        }
        self.phi.apply(&pixels, out);
    }

    fn apply_adjoint(&self, y: &[f64], out: &mut [f64]) {
        let mut pixels = vec![0.0; WIDTH * HEIGHT];
        self.phi.apply_adjoint(y, &mut pixels);
        let mut raster = Raster::zeros(PAD_WIDTH, PAD_HEIGHT);
        for row in 0..HEIGHT {
            raster.data[row * PAD_WIDTH..row * PAD_WIDTH + WIDTH].copy_from_slice(&pixels[row * WIDTH..(row + 1) * WIDTH]);
        }
        let c = self.dwt.forward(&raster).expect("dyadic raster");
        out.copy_from_slice(&c.coeffs);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub image: GrayImage,
    pub solution: BpSolution,
}

enum Operator {
    Wavelet(DenseMatrix),
    Pixel(DenseMatrix),
}

/// Reconstructs word images measured with one key. The factorization of
/// `A A^T` is computed once and shared by every call.
pub struct Reconstructor {
    seed: u64,
    domain: Domain,
    dwt: Dwt2,
    cfg: SolverConfig,
    op: Operator,
    gram: Cholesky<f64, Dyn>,
}

impl Reconstructor {
    pub fn new(matrix: &SensingMatrix, dwt: Dwt2, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let dense = matrix.to_dense();
        let (op, gram) = match matrix.domain() {
            Domain::Wavelet => {
                if matrix.cols() != PADDED_LEN {
                    return Err(Error::DimensionMismatch { expected: PADDED_LEN, actual: matrix.cols() });
                }
                (Operator::Wavelet(dense), matrix.gram())
            }
            Domain::Pixel => {
                let synth = PixelSynthesis::new(&dense, &dwt)?;
                let g = synth.gram();
                (Operator::Pixel(dense), g)
            }
        };
        let gram = Cholesky::new(gram).ok_or_else(|| Error::Numerical("sensing matrix is rank deficient".into()))?;
        Ok(Self { seed: matrix.seed(), domain: matrix.domain(), dwt, cfg, op, gram })
    }

    pub fn reconstruct(&self, y: &Measurement) -> Result<Reconstruction> {
        if y.matrix_seed != self.seed || y.domain != self.domain {
            return Err(Error::InvalidArgument(format!(
                "measurement of {} was taken with key ({}, {}), reconstructor holds ({}, {})",
                y.image_id, y.matrix_seed, y.domain, self.seed, self.domain
            )));
        }
        let solution = match &self.op {
            Operator::Wavelet(a) => self.solver(a).solve(&y.values)?,
            Operator::Pixel(phi) => {
                let synth = PixelSynthesis::new(phi, &self.dwt)?;
                self.solver(&synth).solve(&y.values)?
            }
        };
        let coeffs = WaveletCoeffs::new(solution.coeffs.clone(), PAD_WIDTH, PAD_HEIGHT, self.dwt.levels())?;
        let image = self.dwt.synthesize_image(&coeffs, WIDTH, HEIGHT)?;
        Ok(Reconstruction { image, solution })
    }

    fn solver<'a, A: LinearOperator>(&self, op: &'a A) -> BasisPursuit<'a, A> {
        BasisPursuit { op, gram: self.gram.clone(), cfg: self.cfg.clone() }
    }
}

/// Single-image convenience around [`Reconstructor`].
pub fn reconstruct_image(matrix: &SensingMatrix, y: &Measurement, dwt: &Dwt2, cfg: &SolverConfig) -> Result<Reconstruction> {
    Reconstructor::new(matrix, dwt.clone(), cfg.clone())?.reconstruct(y)
}

/// Peak signal-to-noise ratio in dB with peak 1; `+inf` for identical images.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(Error::DimensionMismatch { expected: a.len(), actual: b.len() });
    }
    let mse = a.pixels().iter().zip(b.pixels()).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() / a.len() as f64;
    Ok(if mse == 0.0 { f64::INFINITY } else { 10.0 * (1.0 / mse).log10() })
}

/// Pearson correlation of two images' intensities; 0 when either is constant.
pub fn correlation(a: &GrayImage, b: &GrayImage) -> f64 {
    let (ma, mb) = (a.mean(), b.mean());
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (p, q) in a.pixels().iter().zip(b.pixels()) {
        sab += (p - ma) * (q - mb);
        saa += (p - ma) * (p - ma);
        sbb += (q - mb) * (q - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa.sqrt() * sbb.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(m: usize, n: usize, seed: u64) -> SensingMatrix {
        SensingMatrix::generate(m, n, seed, Domain::Pixel).unwrap()
    }

    #[test]
    fn zero_measurement_gives_zero() {
        let a = toy(8, 20, 1);
        let sol = solve_bp(&a, &[0.0; 8], &SolverConfig::default()).unwrap();
        assert_eq!(sol.iterations, 0);
        assert!(sol.coeffs.iter().all(|&v| v == 0.0));
        assert!(sol.converged);
    }

    #[test]
    fn square_invertible_operator() {
        let a = DenseMatrix::from_fn(6, 6, |i, j| if i == j { 3.0 } else { ((i * 5 + j * 3) % 7) as f64 * 0.1 });
        let truth = [1.0, -2.0, 0.5, 0.0, 3.0, -1.0];
        let mut y = vec![0.0; 6];
        a.apply(&truth, &mut y);
        let sol = solve_bp(&a, &y, &SolverConfig::default()).unwrap();
        let err = norm2(&sol.coeffs.iter().zip(&truth).map(|(p, q)| p - q).collect::<Vec<_>>()) / norm2(&truth);
        assert!(err < 1e-6, "relative error {err}");
    }

    #[test]
    fn trace_is_monotone() {
        let a = toy(10, 40, 3);
        let mut w = vec![0.0; 40];
        w[3] = 1.0;
        w[17] = -2.0;
        let y = a.measure_vector(&w).unwrap();
        let sol = solve_bp(&a, &y, &SolverConfig::default()).unwrap();
        assert!(sol.objective_trace.windows(2).all(|p| p[1] <= p[0]));
    }

    #[test]
    fn rejects_bad_input() {
        let a = toy(4, 10, 1);
        assert!(solve_bp(&a, &[1.0; 3], &SolverConfig::default()).is_err());
        assert!(solve_bp(&a, &[1.0, f64::NAN, 0.0, 0.0], &SolverConfig::default()).is_err());
        let bad = SolverConfig { tol_abs: 0.0, ..Default::default() };
        assert!(solve_bp(&a, &[1.0; 4], &bad).is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        let a = toy(10, 40, 8);
        let mut w = vec![0.0; 40];
        w[1] = 1.0;
        w[30] = 1.0;
        w[22] = -1.5;
        let y = a.measure_vector(&w).unwrap();
        let cfg = SolverConfig { max_iterations: 2, polish: false, ..Default::default() };
        let sol = solve_bp(&a, &y, &cfg).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations, 2);
    }

    #[test]
    fn psnr_contract() {
        let zero = GrayImage::filled(4, 4, 0.0);
        let one = GrayImage::filled(4, 4, 1.0);
        let half = GrayImage::filled(4, 4, 0.5);
        assert_eq!(psnr(&zero, &zero).unwrap(), f64::INFINITY);
        assert!(psnr(&zero, &one).unwrap().abs() < 1e-12);
        assert!((psnr(&zero, &half).unwrap() - 6.020599913279624).abs() < 1e-9);
        assert!(psnr(&zero, &GrayImage::filled(2, 8, 0.0)).is_err());
    }

    #[test]
    fn key_mismatch_rejected() {
        let phi = SensingMatrix::for_wavelets(10, 1).unwrap();
        let y = Measurement { values: vec![0.0; 10], matrix_seed: 2, domain: Domain::Wavelet, image_id: "x".into() };
        assert!(reconstruct_image(&phi, &y, &Dwt2::default(), &SolverConfig::default()).is_err());
    }
}
