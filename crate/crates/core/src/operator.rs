//! Matrix-free linear operators and a small dense row-major matrix.

use nalgebra::DMatrix;

/// A real `rows x cols` linear map accessed only through products.
pub trait LinearOperator: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;

    /// `out = A x`
    fn apply(&self, x: &[f64], out: &mut [f64]);

    /// `out = A^T y`
    fn apply_adjoint(&self, y: &[f64], out: &mut [f64]);

    /// `A A^T` as a dense matrix, assembled from adjoint/forward products by default.
    fn gram(&self) -> DMatrix<f64> {
        let m = self.rows();
        let mut g = DMatrix::zeros(m, m);
        let mut e = vec![0.0; m];
        let mut col = vec![0.0; self.cols()];
        let mut out = vec![0.0; m];
        for i in 0..m {
            e[i] = 1.0;
            self.apply_adjoint(&e, &mut col);
            self.apply(&col, &mut out);
            for (j, v) in out.iter().enumerate() {
                g[(j, i)] = *v;
            }
            e[i] = 0.0;
        }
        // symmetrize away rounding
        let gt = g.transpose();
        (g + gt) * 0.5
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "dense matrix data length");
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    /// `self * other` where `other` is `cols x k`, both row-major.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let prod = self.to_nalgebra() * other.to_nalgebra();
        DenseMatrix::from_fn(self.rows, other.cols, |i, j| prod[(i, j)])
    }
}

/// Four-way unrolled dot product.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

impl LinearOperator for DenseMatrix {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    fn apply_adjoint(&self, y: &[f64], out: &mut [f64]) {
        assert_eq!(y.len(), self.rows);
        out.fill(0.0);
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += yi * a;
            }
        }
    }

    fn gram(&self) -> DMatrix<f64> {
        let a = self.to_nalgebra();
        &a * a.transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_gram_matches_direct() {
        struct Wrapped(DenseMatrix);
        impl LinearOperator for Wrapped {
            fn rows(&self) -> usize {
                self.0.rows()
            }
            fn cols(&self) -> usize {
                self.0.cols()
            }
            fn apply(&self, x: &[f64], out: &mut [f64]) {
                self.0.apply(x, out)
            }
            fn apply_adjoint(&self, y: &[f64], out: &mut [f64]) {
                self.0.apply_adjoint(y, out)
            }
        }
        let a = DenseMatrix::from_fn(3, 5, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let direct = a.gram();
        let generic = Wrapped(a).gram();
        assert!((direct - generic).abs().max() < 1e-12);
    }

    #[test]
    fn dot_handles_tails() {
        let a: Vec<f64> = (0..7).map(f64::from).collect();
        assert_eq!(dot(&a, &a), 91.0);
    }
}
