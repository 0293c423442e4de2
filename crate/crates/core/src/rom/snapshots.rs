//! Snapshot matrices of hysteretic states from randomised full-model runs, and
//! the `BWZ1` container.
//!
//! Layout on disk (little-endian): magic `BWZ1`, u64 rows, u64 cols, u64 N_t,
//! u64 N_s, u64 seed, then `rows * cols` f64 values column by column. Column
//! `j = run * N_t + k` holds all hysteretic variables of run `run` at its
//! `k`-th sample instant.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::beam_fe::BeamModel;
use crate::error::{invalid, Error, Result};
use crate::forcing::Unforced;
use crate::hysteresis::BoucWenParams;
use crate::integrator::{step_count, Problem, SemiImplicit, SimState};
use crate::rng::SeededRng;
use crate::system::BeamSystem;
use crate::trajectory::Record;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"BWZ1";

/// Random modal initial conditions: `xi_k = s u_k`, `u_k` uniform in [-1, 1),
/// with `s = tip_bound / sum_k |R_tip,k|` so the initial tip displacement
/// never exceeds `tip_bound`.
#[derive(Debug, Clone)]
pub struct ModalIcSampler {
    tip_row: Vec<f64>,
    scale: f64,
    rng: SeededRng,
}

impl ModalIcSampler {
    pub fn new(basis: &DMatrix<f64>, tip_dof: usize, tip_bound: f64, seed: u64) -> Result<Self> {
        if !(tip_bound.is_finite() && tip_bound > 0.0) {
            return Err(invalid("ic_scale", format!("must be > 0, got {tip_bound}")));
        }
        let tip_row: Vec<f64> = basis.row(tip_dof).iter().copied().collect();
        let sum: f64 = tip_row.iter().map(|x| x.abs()).sum();
        if sum == 0.0 {
            return Err(invalid("basis", "retained modes do not move the tip"));
        }
        Ok(Self {
            tip_row,
            scale: tip_bound / sum,
            rng: SeededRng::new(seed),
        })
    }

    /// Next modal coordinate vector.
    pub fn draw(&mut self) -> DVector<f64> {
        let scale = self.scale;
        let rng = &mut self.rng;
        DVector::from_iterator(
            self.tip_row.len(),
            (0..self.tip_row.len()).map(|_| scale * rng.symmetric()),
        )
    }

    /// Draws `n` vectors in sequence.
    pub fn draw_many(&mut self, n: usize) -> Vec<DVector<f64>> {
        (0..n).map(|_| self.draw()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotConfig {
    /// Retained modes excited by the random initial conditions.
    pub r: usize,
    /// Number of runs N_s.
    pub n_runs: usize,
    /// Samples per run N_t, at `k T / N_t`, `k = 1..=N_t`.
    pub n_samples: usize,
    pub t_end: f64,
    pub h: f64,
    /// Bound on the initial tip displacement (m).
    pub ic_scale: f64,
    pub seed: u64,
}

impl SnapshotConfig {
    pub fn validate(&self) -> Result<usize> {
        if self.r == 0 || self.n_runs == 0 || self.n_samples == 0 {
            return Err(invalid("snapshots", "r, N_s and N_t must all be >= 1"));
        }
        let steps = step_count(self.t_end, self.h)?;
        if steps % self.n_samples != 0 {
            return Err(invalid(
                "N_t",
                format!(
                    "{steps} steps cannot be sampled at {} equispaced instants",
                    self.n_samples
                ),
            ));
        }
        Ok(steps)
    }
}

/// Snapshot matrix Z held row-major: row `i` is the history of hysteresis
/// point `i` across all runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    rows: usize,
    cols: usize,
    pub n_samples: usize,
    pub n_runs: usize,
    pub seed: u64,
    /// Modal initial displacement of every run.
    pub run_ics: Vec<DVector<f64>>,
    data: Vec<f64>,
}

impl SnapshotSet {
    pub fn from_row_major(
        rows: usize,
        n_samples: usize,
        n_runs: usize,
        seed: u64,
        data: Vec<f64>,
    ) -> Result<Self> {
        let cols = n_samples * n_runs;
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                context: "snapshot data",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            n_samples,
            n_runs,
            seed,
            run_ics: Vec::new(),
            data,
        })
    }

    pub fn from_matrix(
        z: &DMatrix<f64>,
        n_samples: usize,
        n_runs: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(z.len());
        for i in 0..z.nrows() {
            data.extend(z.row(i).iter());
        }
        Self::from_row_major(z.nrows(), n_samples, n_runs, seed, data)
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
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    /// Frobenius norm of the block of run `run`.
    pub fn run_norm(&self, run: usize) -> f64 {
        let (a, b) = (run * self.n_samples, (run + 1) * self.n_samples);
        (0..self.rows)
            .map(|i| self.row(i)[a..b].iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// Streams the columns `[start, start + n)` column-major into `out`.
    pub fn columns_into(&self, start: usize, n: usize, out: &mut Vec<f64>) {
        out.clear();
        out.reserve(n * self.rows);
        for j in start..start + n {
            out.extend((0..self.rows).map(|i| self.data[i * self.cols + j]));
        }
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        write_header(
            &mut w,
            self.rows,
            self.cols,
            self.n_samples,
            self.n_runs,
            self.seed,
        )?;
        let mut col = Vec::new();
        for j in 0..self.cols {
            self.columns_into(j, 1, &mut col);
            for x in &col {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        self.write(File::create(path)?)
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        let mut reader = SnapshotReader::new(r)?;
        let h = reader.header;
        let mut data = vec![0.0; h.rows * h.cols];
        let mut block = Vec::new();
        let mut j0 = 0;
        while reader.next_block(1024, &mut block)? {
            let n = block.len() / h.rows;
            for c in 0..n {
                for i in 0..h.rows {
                    data[i * h.cols + j0 + c] = block[c * h.rows + i];
                }
            }
            j0 += n;
        }
        Self::from_row_major(h.rows, h.n_samples, h.n_runs, h.seed, data)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        Self::read(File::open(path)?)
    }
}

fn write_header<W: Write>(
    w: &mut W,
    rows: usize,
    cols: usize,
    nt: usize,
    ns: usize,
    seed: u64,
) -> Result<()> {
    w.write_all(SNAPSHOT_MAGIC)?;
    for v in [rows as u64, cols as u64, nt as u64, ns as u64, seed] {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnapshotHeader {
    pub rows: usize,
    pub cols: usize,
    pub n_samples: usize,
    pub n_runs: usize,
    pub seed: u64,
}

/// Column-block reader over a `BWZ1` stream.
pub struct SnapshotReader<R: Read> {
    inner: BufReader<R>,
    pub header: SnapshotHeader,
    remaining: usize,
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

impl<R: Read> SnapshotReader<R> {
    pub fn new(r: R) -> Result<Self> {
        let mut inner = BufReader::new(r);
        let mut magic = [0u8; 4];
        inner.read_exact(&mut magic)?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(Error::Format(format!("bad snapshot magic {magic:?}")));
        }
        let rows = read_u64(&mut inner)? as usize;
        let cols = read_u64(&mut inner)? as usize;
        let n_samples = read_u64(&mut inner)? as usize;
        let n_runs = read_u64(&mut inner)? as usize;
        let seed = read_u64(&mut inner)?;
        if n_samples.checked_mul(n_runs) != Some(cols) {
            return Err(Error::Format(format!(
                "column count {cols} differs from N_t * N_s = {n_samples} * {n_runs}"
            )));
        }
        Ok(Self {
            inner,
            header: SnapshotHeader {
                rows,
                cols,
                n_samples,
                n_runs,
                seed,
            },
            remaining: cols,
        })
    }

    /// Reads up to `max_cols` columns (column-major) into `out`; false at the end.
    pub fn next_block(&mut self, max_cols: usize, out: &mut Vec<f64>) -> Result<bool> {
        out.clear();
        let n = max_cols.min(self.remaining);
        if n == 0 {
            return Ok(false);
        }
        let mut bytes = vec![0u8; n * self.header.rows * 8];
        self.inner.read_exact(&mut bytes)?;
        out.extend(
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))),
        );
        self.remaining -= n;
        Ok(true)
    }
}

pub fn open_snapshots(path: &Path) -> Result<SnapshotReader<File>> {
    SnapshotReader::new(File::open(path)?)
}

/// One full-model run from a modal initial displacement; returns the `N_t`
/// sampled z vectors.
pub fn snapshot_run(
    system: &BeamSystem,
    params: &BoucWenParams,
    basis: &DMatrix<f64>,
    xi0: &DVector<f64>,
    n_hyst: usize,
    cfg: &SnapshotConfig,
) -> Result<Vec<DVector<f64>>> {
    let steps = cfg.validate()?;
    let problem = Problem {
        system,
        params,
        forcing: &Unforced,
    };
    let ic = SimState::displaced(basis * xi0, n_hyst);
    let traj = SemiImplicit::new(cfg.h)?.run(
        &problem,
        &ic,
        steps,
        steps / cfg.n_samples,
        Record {
            q: false,
            v: false,
            z: true,
        },
    )?;
    Ok(traj.z.into_iter().skip(1).collect())
}

/// `N_s` randomised runs, each normalised to unit Frobenius norm and stacked.
///
/// Initial conditions are drawn in run order from one seeded stream before any
/// run starts, so the result does not depend on `workers`.
pub fn generate_snapshots(
    model: &BeamModel,
    params: &BoucWenParams,
    basis: &DMatrix<f64>,
    cfg: &SnapshotConfig,
    workers: usize,
) -> Result<SnapshotSet> {
    cfg.validate()?;
    if basis.ncols() != cfg.r || basis.nrows() != model.n_dof() {
        return Err(Error::Dimension {
            context: "snapshot modal basis",
            expected: cfg.r,
            actual: basis.ncols(),
        });
    }
    let mut sampler = ModalIcSampler::new(basis, model.tip_dof(), cfg.ic_scale, cfg.seed)?;
    let ics = sampler.draw_many(cfg.n_runs);
    let system = BeamSystem::new(model);
    let n_hyst = model.n_hyst();
    let run = |(i, xi): (usize, &DVector<f64>)| {
        snapshot_run(&system, params, basis, xi, n_hyst, cfg).map_err(|e| Error::SnapshotRun {
            run: i,
            source: Box::new(e),
        })
    };
    let runs: Vec<Vec<DVector<f64>>> = if workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| invalid("workers", e.to_string()))?;
        pool.install(|| ics.par_iter().enumerate().map(run).collect::<Result<_>>())?
    } else {
        ics.iter().enumerate().map(run).collect::<Result<_>>()?
    };

    let (nt, cols) = (cfg.n_samples, cfg.n_samples * cfg.n_runs);
    let mut data = vec![0.0; n_hyst * cols];
    for (r, samples) in runs.iter().enumerate() {
        let norm = samples.iter().map(|z| z.norm_squared()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::SnapshotRun {
                run: r,
                source: Box::new(Error::Analysis(format!("snapshot block norm is {norm}"))),
            });
        }
        for (k, z) in samples.iter().enumerate() {
            let j = r * nt + k;
            for i in 0..n_hyst {
                data[i * cols + j] = z[i] / norm;
            }
        }
    }
    let mut set = SnapshotSet::from_row_major(n_hyst, nt, cfg.n_runs, cfg.seed, data)?;
    set.run_ics = ics;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam_fe::{assemble, modal_analysis, BeamGeometry};

    fn setup() -> (BeamModel, BoucWenParams, DMatrix<f64>) {
        let p = BoucWenParams::new(0.065, 0.8, 0.5, 0.5, 300.0).unwrap();
        let m = assemble(&BeamGeometry::reference_beam(4).unwrap(), p.gamma_h()).unwrap();
        let basis = modal_analysis(&m, 2).unwrap().shapes;
        (m, p, basis)
    }

    fn config() -> SnapshotConfig {
        SnapshotConfig {
            r: 2,
            n_runs: 3,
            n_samples: 10,
            t_end: 0.05,
            h: 1e-4,
            ic_scale: 0.06,
            seed: 9,
        }
    }

    #[test]
    fn blocks_are_normalised_and_runs_are_reproducible() {
        let (m, p, basis) = setup();
        let a = generate_snapshots(&m, &p, &basis, &config(), 1).unwrap();
        let b = generate_snapshots(&m, &p, &basis, &config(), 3).unwrap();
        assert_eq!(a.data(), b.data());
        assert_eq!((a.rows(), a.cols()), (12, 30));
        for run in 0..3 {
            assert!((a.run_norm(run) - 1.0).abs() < 1e-12);
        }
        for xi in &a.run_ics {
            let tip: f64 = (0..2)
                .map(|k| (basis[(m.tip_dof(), k)] * xi[k]).abs())
                .sum();
            assert!(tip <= 0.06);
        }
    }

    #[test]
    fn container_roundtrip_and_streaming() {
        let (m, p, basis) = setup();
        let z = generate_snapshots(&m, &p, &basis, &config(), 1).unwrap();
        let mut buf = Vec::new();
        z.write(&mut buf).unwrap();
        assert_eq!(&buf[..4], SNAPSHOT_MAGIC);
        assert_eq!(buf.len(), 4 + 5 * 8 + 12 * 30 * 8);
        // first stored value is Z[0, 0], second Z[1, 0]
        let second = f64::from_le_bytes(buf[52..60].try_into().unwrap());
        assert_eq!(second, z.row(1)[0]);
        let back = SnapshotSet::read(&buf[..]).unwrap();
        assert_eq!(back.data(), z.data());
        assert_eq!(back.seed, 9);
        let mut reader = SnapshotReader::new(&buf[..]).unwrap();
        let mut block = Vec::new();
        assert!(reader.next_block(7, &mut block).unwrap());
        let mut expect = Vec::new();
        z.columns_into(0, 7, &mut expect);
        assert_eq!(block, expect);
    }

    #[test]
    fn incompatible_sampling_is_rejected() {
        let cfg = SnapshotConfig {
            n_samples: 7,
            ..config()
        };
        assert!(cfg.validate().is_err());
        assert!(SnapshotReader::new(&b"BWZ2"[..]).is_err());
    }
}
