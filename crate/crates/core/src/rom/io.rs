//! `BWR1` reduced-model artifact.
//!
//! Little-endian layout: magic `BWR1`, u64 version, then u64 dims
//! `n_dof, r, n_hyst, m, k, n_elements, n_gauss, n_columns`, then f64 blocks:
//! geometry `(L, EI, rho A)`, Bouc-Wen `(A, alpha, beta, n_h, gamma_h)`,
//! frequencies (r), M~ (r x r), K~ (r x r), R (N x r), P (r x m), B_s (m x N),
//! all column-major; then u64 indices (m), u64 greedy order (k) and the
//! projection factor (k + r square, f64). The factor lets the model be
//! re-solved for any `m <= k` without the snapshots.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::{ModalProjection, ProjectionFactor, Rom};
use crate::beam_fe::{assemble, BeamGeometry};
use crate::error::{Error, Result};
use crate::hysteresis::BoucWenParams;

pub const ROM_MAGIC: &[u8; 4] = b"BWR1";
pub const ROM_VERSION: u64 = 1;

/// A reduced model together with the full greedy order and the projection
/// factor it was solved from.
#[derive(Debug, Clone)]
pub struct RomArtifact {
    pub rom: Rom,
    pub order: Vec<usize>,
    pub factor: ProjectionFactor,
}

impl RomArtifact {
    /// Re-solves the model for the first `m` points of the greedy order.
    pub fn with_points(&self, m: usize) -> Result<Rom> {
        let p = self.factor.solve(m)?;
        let model = assemble(&self.rom.geometry, self.rom.params.gamma_h())?;
        let modal = ModalProjection {
            basis: self.rom.basis.clone(),
            m_tilde: self.rom.m_tilde.clone(),
            k_tilde: self.rom.k_tilde.clone(),
            frequencies: self.rom.frequencies.clone(),
        };
        Rom::new(&model, self.rom.params, &modal, &self.order[..m], p)
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        let rom = &self.rom;
        let g = &rom.geometry;
        w.write_all(ROM_MAGIC)?;
        let dims = [
            ROM_VERSION,
            rom.basis.nrows() as u64,
            rom.r() as u64,
            g.n_hyst() as u64,
            rom.m() as u64,
            self.order.len() as u64,
            g.n_elements() as u64,
            g.n_gauss() as u64,
            self.factor.n_columns as u64,
        ];
        for d in dims {
            w.write_all(&d.to_le_bytes())?;
        }
        let p = &rom.params;
        let scalars = [
            g.length(),
            g.flexural_rigidity(),
            g.mass_per_length(),
            p.a_bar(),
            p.alpha(),
            p.beta(),
            p.n_h(),
            p.gamma_h(),
        ];
        write_f64s(&mut w, &scalars)?;
        write_f64s(&mut w, &rom.frequencies)?;
        for m in [
            &rom.m_tilde,
            &rom.k_tilde,
            &rom.basis,
            &rom.projection,
            &rom.b_s,
        ] {
            write_f64s(&mut w, m.as_slice())?;
        }
        for &i in rom.indices.iter().chain(&self.order) {
            w.write_all(&(i as u64).to_le_bytes())?;
        }
        write_f64s(&mut w, self.factor.tri.as_slice())?;
        w.flush()?;
        Ok(())
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        self.write(File::create(path)?)
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        let mut r = BufReader::new(r);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != ROM_MAGIC {
            return Err(Error::Format(format!("bad ROM magic {magic:?}")));
        }
        let version = read_u64(&mut r)?;
        if version != ROM_VERSION {
            return Err(Error::Format(format!("unsupported ROM version {version}")));
        }
        let mut dims = [0usize; 8];
        for d in &mut dims {
            *d = read_u64(&mut r)? as usize;
        }
        let [n, rr, n_hyst, m, k, n_e, n_g, n_columns] = dims;
        let s = read_f64s(&mut r, 8)?;
        let geometry = BeamGeometry::new(s[0], s[1], s[2], n_e, n_g)?;
        if geometry.n_dof() != n || geometry.n_hyst() != n_hyst || m > k || k > n_hyst {
            return Err(Error::Format("inconsistent ROM dimensions".into()));
        }
        let params = BoucWenParams::new(s[3], s[4], s[5], s[6], s[7])?;
        let frequencies = read_f64s(&mut r, rr)?;
        let mut mat = |rows: usize, cols: usize| -> Result<DMatrix<f64>> {
            Ok(DMatrix::from_vec(
                rows,
                cols,
                read_f64s(&mut r, rows * cols)?,
            ))
        };
        let m_tilde = mat(rr, rr)?;
        let k_tilde = mat(rr, rr)?;
        let basis = mat(n, rr)?;
        let projection = mat(rr, m)?;
        let b_s = mat(m, n)?;
        let mut ids = |len: usize| -> Result<Vec<usize>> {
            (0..len)
                .map(|_| read_u64(&mut r).map(|v| v as usize))
                .collect()
        };
        let indices = ids(m)?;
        let order = ids(k)?;
        let tri = DMatrix::from_vec(k + rr, k + rr, read_f64s(&mut r, (k + rr) * (k + rr))?);
        let factor = ProjectionFactor::from_parts(k, rr, tri, n_columns)?;
        Ok(Self {
            rom: Rom {
                geometry,
                params,
                basis,
                m_tilde,
                k_tilde,
                frequencies,
                projection,
                indices,
                b_s,
                tip_dof: geometry.tip_dof(),
            },
            order,
            factor,
        })
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        Self::read(File::open(path)?)
    }
}

fn write_f64s<W: Write>(w: &mut W, xs: &[f64]) -> Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; n * 8];
    r.read_exact(&mut bytes)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rom::{project_modal, ProjectionAccumulator};

    #[test]
    fn artifact_roundtrip_is_exact() {
        let params = BoucWenParams::new(0.065, 0.8, 0.5, 0.5, 300.0).unwrap();
        let model = assemble(&BeamGeometry::reference_beam(3).unwrap(), params.gamma_h()).unwrap();
        let modal = project_modal(&model, 2).unwrap();
        let g = super::super::modal_coupling(&model, &modal.basis);
        let z = DMatrix::from_fn(9, 20, |i, j| ((i * 7 + j * 3) as f64).sin());
        let order = vec![4, 0, 8, 2];
        let mut acc = ProjectionAccumulator::new(&order, g).unwrap();
        acc.push_columns(z.as_slice()).unwrap();
        let factor = acc.finish().unwrap();
        let rom = Rom::new(
            &model,
            params,
            &modal,
            &order[..3],
            factor.solve(3).unwrap(),
        )
        .unwrap();
        let art = RomArtifact { rom, order, factor };
        let mut buf = Vec::new();
        art.write(&mut buf).unwrap();
        let back = RomArtifact::read(&buf[..]).unwrap();
        assert_eq!(back.order, art.order);
        assert_eq!(back.factor, art.factor);
        assert_eq!(back.rom.projection, art.rom.projection);
        assert_eq!(back.rom.b_s, art.rom.b_s);
        assert_eq!(back.rom.basis, art.rom.basis);
        assert_eq!(back.rom.params, art.rom.params);
        let re = back.with_points(3).unwrap();
        assert_eq!(re.projection, art.rom.projection);
        assert_eq!(re.b_s, art.rom.b_s);
        buf[0] = b'X';
        assert!(RomArtifact::read(&buf[..]).is_err());
    }
}
