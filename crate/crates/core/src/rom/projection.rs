//! Least-squares projection matrix `P = argmin ||G Z - P Z_s||_F` with
//! `G = R^T A`, computed from a streamed orthogonal factorisation of the tall
//! matrix `T = [Z_s^T | (G Z)^T]`.
//!
//! Only the triangular factor of `T` is kept. Because the columns of `Z_s^T`
//! follow the greedy order, every prefix `m` of the selection can be solved
//! from the same factor.

use nalgebra::{DMatrix, DVector};

use super::snapshots::{SnapshotReader, SnapshotSet};
use crate::error::{invalid, Error, Result};

/// Snapshot columns folded into the factor per update.
pub const BLOCK_COLUMNS: usize = 2048;

/// Relative singular value cut-off of the minimum-norm solve.
pub const SVD_RTOL: f64 = 1e-12;

/// Streaming accumulator of the triangular factor of `T`.
#[derive(Debug, Clone)]
pub struct ProjectionAccumulator {
    indices: Vec<usize>,
    g: DMatrix<f64>,
    rows: usize,
    r: Option<DMatrix<f64>>,
    seen: usize,
}

impl ProjectionAccumulator {
    /// `indices`: selected rows of Z in selection order; `g = R^T A` (r x rows).
    pub fn new(indices: &[usize], g: DMatrix<f64>) -> Result<Self> {
        let rows = g.ncols();
        let mut seen = vec![false; rows];
        for &i in indices {
            if i >= rows || std::mem::replace(&mut seen[i], true) {
                return Err(invalid(
                    "indices",
                    format!("index {i} out of range or repeated"),
                ));
            }
        }
        Ok(Self {
            indices: indices.to_vec(),
            g,
            rows,
            r: None,
            seen: 0,
        })
    }

    fn width(&self) -> usize {
        self.indices.len() + self.g.nrows()
    }

    /// Folds in a column-major block of snapshot columns (`rows x n`).
    pub fn push_columns(&mut self, block: &[f64]) -> Result<()> {
        if !block.len().is_multiple_of(self.rows) {
            return Err(Error::Dimension {
                context: "snapshot block",
                expected: self.rows,
                actual: block.len() % self.rows,
            });
        }
        let n = block.len() / self.rows;
        if n == 0 {
            return Ok(());
        }
        let (k, w) = (self.indices.len(), self.width());
        let z = DMatrix::from_column_slice(self.rows, n, block);
        let gz = &self.g * &z;
        let prev = self.r.as_ref().map_or(0, |r| r.nrows());
        let mut stacked = DMatrix::zeros(prev + n, w);
        if let Some(r) = &self.r {
            stacked.view_mut((0, 0), (prev, w)).copy_from(r);
        }
        for c in 0..n {
            for (j, &i) in self.indices.iter().enumerate() {
                stacked[(prev + c, j)] = z[(i, c)];
            }
            for j in 0..gz.nrows() {
                stacked[(prev + c, k + j)] = gz[(j, c)];
            }
        }
        let r = stacked.qr().r();
        self.r = Some(r);
        self.seen += n;
        Ok(())
    }

    /// Streams every column of an in-memory snapshot set.
    pub fn push_set(&mut self, z: &SnapshotSet) -> Result<()> {
        let mut block = Vec::new();
        let mut start = 0;
        while start < z.cols() {
            let n = BLOCK_COLUMNS.min(z.cols() - start);
            z.columns_into(start, n, &mut block);
            self.push_columns(&block)?;
            start += n;
        }
        Ok(())
    }

    /// Streams every column of a `BWZ1` reader.
    pub fn push_reader<R: std::io::Read>(&mut self, reader: &mut SnapshotReader<R>) -> Result<()> {
        let mut block = Vec::new();
        while reader.next_block(BLOCK_COLUMNS, &mut block)? {
            self.push_columns(&block)?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<ProjectionFactor> {
        let w = self.width();
        let r = self
            .r
            .ok_or_else(|| Error::Analysis("no snapshot columns were supplied".into()))?;
        // pad to w x w when there were fewer columns than unknowns
        let mut tri = DMatrix::zeros(w, w);
        let rows = r.nrows().min(w);
        tri.view_mut((0, 0), (rows, w)).copy_from(&r.rows(0, rows));
        Ok(ProjectionFactor {
            k: self.indices.len(),
            r_modes: self.g.nrows(),
            tri,
            n_columns: self.seen,
        })
    }
}

/// Triangular factor of `T`, with `k` selected-row columns followed by
/// `r_modes` target columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionFactor {
    pub k: usize,
    pub r_modes: usize,
    pub tri: DMatrix<f64>,
    pub n_columns: usize,
}

impl ProjectionFactor {
    pub fn from_parts(
        k: usize,
        r_modes: usize,
        tri: DMatrix<f64>,
        n_columns: usize,
    ) -> Result<Self> {
        if tri.nrows() != k + r_modes || tri.ncols() != k + r_modes {
            return Err(Error::Dimension {
                context: "projection factor",
                expected: k + r_modes,
                actual: tri.nrows(),
            });
        }
        Ok(Self {
            k,
            r_modes,
            tri,
            n_columns,
        })
    }

    fn check(&self, m: usize) -> Result<()> {
        if m > self.k {
            return Err(invalid(
                "m",
                format!("only {} rows were selected, asked for {m}", self.k),
            ));
        }
        Ok(())
    }

    fn target(&self) -> DMatrix<f64> {
        self.tri.columns(self.k, self.r_modes).into_owned()
    }

    /// Minimum-norm least-squares `P` (r x m) for the first `m` selected rows.
    pub fn solve(&self, m: usize) -> Result<DMatrix<f64>> {
        self.check(m)?;
        if m == 0 {
            return Ok(DMatrix::zeros(self.r_modes, 0));
        }
        let r11 = self.tri.view((0, 0), (m, m)).into_owned();
        let rhs = self.target().rows(0, m).into_owned();
        let svd = r11.svd(true, true);
        let smax = svd.singular_values.max();
        let x = svd
            .solve(&rhs, SVD_RTOL * smax)
            .map_err(|e| Error::Analysis(format!("least-squares solve: {e}")))?;
        Ok(x.transpose())
    }

    /// `||G Z - P_m Z_s||_F` for the solution of [`Self::solve`].
    pub fn residual(&self, m: usize) -> Result<f64> {
        self.check(m)?;
        let target = self.target();
        let mut res2 = target.rows(m, target.nrows() - m).norm_squared();
        if m > 0 {
            let p = self.solve(m)?;
            let fit = self.tri.view((0, 0), (m, m)) * p.transpose() - target.rows(0, m);
            res2 += fit.norm_squared();
        }
        Ok(res2.sqrt())
    }

    /// `||G Z||_F`.
    pub fn target_norm(&self) -> f64 {
        self.target().norm()
    }
}

/// Dense reference: `P` from the full transposed system via SVD.
pub fn solve_projection_dense(
    z: &DMatrix<f64>,
    indices: &[usize],
    g: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let zs_t = DMatrix::from_fn(z.ncols(), indices.len(), |c, j| z[(indices[j], c)]);
    let target_t = (g * z).transpose();
    if indices.is_empty() {
        return Ok(DMatrix::zeros(g.nrows(), 0));
    }
    let svd = zs_t.svd(true, true);
    let smax = svd.singular_values.max();
    let x = svd
        .solve(&target_t, SVD_RTOL * smax)
        .map_err(|e| Error::Analysis(format!("least-squares solve: {e}")))?;
    Ok(x.transpose())
}

/// Column of `G Z` residual norms, kept for diagnostics.
pub fn column_residuals(
    z: &DMatrix<f64>,
    indices: &[usize],
    g: &DMatrix<f64>,
    p: &DMatrix<f64>,
) -> DVector<f64> {
    let zs = DMatrix::from_fn(indices.len(), z.ncols(), |j, c| z[(indices[j], c)]);
    let res = g * z - p * zs;
    DVector::from_iterator(res.ncols(), res.column_iter().map(|c| c.norm()))
}
