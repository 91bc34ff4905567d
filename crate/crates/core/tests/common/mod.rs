#![allow(dead_code)]

use blindprint::wavelet::Db10Filter;
use nalgebra::{DMatrix, DVector};

/// One-level periodic analysis matrix of length `n`, built tap by tap.
pub fn analysis_1d(n: usize) -> DMatrix<f64> {
    let f = Db10Filter::new();
    let mut w = DMatrix::zeros(n, n);
    for k in 0..n / 2 {
        for j in 0..f.lowpass().len() {
            w[(k, (2 * k + j) % n)] += f.lowpass()[j];
            w[(n / 2 + k, (2 * k + j) % n)] += f.highpass()[j];
        }
    }
    w
}

/// Explicit `levels`-deep 2-D transform of the row-major `h x w` raster `x`.
pub fn explicit_dwt2(x: &[f64], w: usize, h: usize, levels: usize) -> Vec<f64> {
    let mut m = DMatrix::from_row_slice(h, w, x);
    let (mut cw, mut ch) = (w, h);
    for _ in 0..levels {
        let block = m.view((0, 0), (ch, cw)).into_owned();
        let t = analysis_1d(ch) * block * analysis_1d(cw).transpose();
        m.view_mut((0, 0), (ch, cw)).copy_from(&t);
        cw /= 2;
        ch /= 2;
    }
    m.transpose().as_slice().to_vec()
}

/// The full `wh x wh` matrix of [`explicit_dwt2`], one impulse per column.
pub fn explicit_dwt2_matrix(w: usize, h: usize, levels: usize) -> DMatrix<f64> {
    let n = w * h;
    let mut psi = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for i in 0..n {
        e[i] = 1.0;
        let col = explicit_dwt2(&e, w, h, levels);
        for (r, v) in col.iter().enumerate() {
            psi[(r, i)] = *v;
        }
        e[i] = 0.0;
    }
    psi
}

/// Exhaustive vertex enumeration of `min ||w||_1 s.t. A w = y`: an optimal
/// vertex of the split LP has at most `M` nonzeros on linearly independent
/// columns, so it is `A_S^{-1} y` for some `M`-subset `S`.
pub fn lp_oracle(a: &DMatrix<f64>, y: &DVector<f64>) -> (f64, DVector<f64>) {
    let (m, n) = a.shape();
    let mut best = (f64::INFINITY, DVector::zeros(n));
    let mut subset: Vec<usize> = (0..m).collect();
    loop {
        let a_s = DMatrix::from_fn(m, m, |i, j| a[(i, subset[j])]);
        let lu = a_s.clone().lu();
        if a_s.determinant().abs() > 1e-9 {
            if let Some(ws) = lu.solve(y) {
                let l1 = ws.iter().map(|v| v.abs()).sum::<f64>();
                if l1 < best.0 {
                    let mut w = DVector::zeros(n);
                    for (k, &j) in subset.iter().enumerate() {
                        w[j] = ws[k];
                    }
                    best = (l1, w);
                }
            }
        }
        // next combination in lexicographic order
        let mut i = m;
        while i > 0 && subset[i - 1] == n - m + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return best;
        }
        subset[i - 1] += 1;
        for k in i..m {
            subset[k] = subset[k - 1] + 1;
        }
    }
}
