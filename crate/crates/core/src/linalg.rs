//! Small dense/banded kernels used on the per-step hot path.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CsrMatrix;

use crate::error::{Error, Result};

/// Symmetric band matrix, lower triangle stored row by row:
/// `band[i * (bw + 1) + d] = A(i, i - d)` for `d = 0..=bw`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand {
    n: usize,
    bw: usize,
    band: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            band: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Entry (i, j); zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        if d > self.bw {
            0.0
        } else {
            self.band[i * (self.bw + 1) + d]
        }
    }

    /// Adds `v` to entry (i, j) (and implicitly its mirror). Panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        assert!(d <= self.bw, "entry ({i}, {j}) lies outside the band");
        self.band[i * (self.bw + 1) + d] += v;
    }

    /// `a * self + b * other`, entrywise on the band.
    pub fn combine(&self, a: f64, other: &SymBand, b: f64) -> SymBand {
        assert_eq!((self.n, self.bw), (other.n, other.bw));
        let band = self
            .band
            .iter()
            .zip(&other.band)
            .map(|(x, y)| a * x + b * y)
            .collect();
        SymBand {
            n: self.n,
            bw: self.bw,
            band,
        }
    }

    pub fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        let w = self.bw + 1;
        for o in out.iter_mut() {
            *o = 0.0;
        }
        for i in 0..self.n {
            let row = &self.band[i * w..(i + 1) * w];
            let mut acc = row[0] * x[i];
            for d in 1..=self.bw.min(i) {
                let a = row[d];
                acc += a * x[i - d];
                out[i - d] += a * x[i];
            }
            out[i] += acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Cholesky factorisation `A = L L^T` within the band.
    pub fn cholesky(&self) -> Result<BandCholesky> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let mut s = self.band[i * w + (i - j)];
                let k0 = j0.max(j.saturating_sub(bw));
                for k in k0..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                if i == j {
                    if s.is_nan() || s <= 0.0 || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite("banded Cholesky"));
                    }
                    l[i * w] = s.sqrt();
                } else {
                    l[i * w + (i - j)] = s / l[j * w];
                }
            }
        }
        Ok(BandCholesky { n, bw, l })
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let w = self.bw + 1;
        for i in 0..self.n {
            let mut s = b[i];
            for d in 1..=self.bw.min(i) {
                s -= self.l[i * w + d] * b[i - d];
            }
            b[i] = s / self.l[i * w];
        }
        for i in (0..self.n).rev() {
            let mut s = b[i];
            for d in 1..=self.bw.min(self.n - 1 - i) {
                s -= self.l[(i + d) * w + d] * b[i + d];
            }
            b[i] = s / self.l[i * w];
        }
    }
}

/// `out = a * x` for a CSR matrix.
pub fn csr_mul_into(a: &CsrMatrix<f64>, x: &[f64], out: &mut [f64]) {
    for (o, row) in out.iter_mut().zip(a.row_iter()) {
        *o = row
            .col_indices()
            .iter()
            .zip(row.values())
            .map(|(&j, &v)| v * x[j])
            .sum();
    }
}

/// Drops exact zeros from a dense matrix.
pub fn dense_to_csr(a: &DMatrix<f64>) -> CsrMatrix<f64> {
    let mut indptr = Vec::with_capacity(a.nrows() + 1);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    indptr.push(0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let v = a[(i, j)];
            if v != 0.0 {
                indices.push(j);
                values.push(v);
            }
        }
        indptr.push(indices.len());
    }
    CsrMatrix::try_from_csr_data(a.nrows(), a.ncols(), indptr, indices, values)
        .expect("row-major scan yields valid CSR")
}

/// Sum of squares of a symmetric matrix's off-diagonal part relative to its diagonal.
pub fn max_offdiag_ratio(a: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if i != j {
                let scale = (a[(i, i)].abs() * a[(j, j)].abs()).sqrt();
                worst = worst.max(a[(i, j)].abs() / scale);
            }
        }
    }
    worst
}

pub fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}
