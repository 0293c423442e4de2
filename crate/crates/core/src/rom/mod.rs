//! Reduced order models: modal truncation of the beam plus a greedy subset of
//! hysteresis points whose states drive the modal equations through a
//! least-squares projection matrix.
//!
//! Pipeline: [`generate_snapshots`] -> [`greedy_select_in_place`] ->
//! [`ProjectionAccumulator`] -> [`Rom::new`] -> [`simulate_rom`].

mod greedy;
pub mod io;
mod projection;
mod snapshots;

use nalgebra::{DMatrix, DVector};

pub use greedy::{greedy_select, greedy_select_in_place, GreedyOptions, GreedySelection, TIE_RTOL};
pub use projection::{
    column_residuals, solve_projection_dense, ProjectionAccumulator, ProjectionFactor,
    BLOCK_COLUMNS, SVD_RTOL,
};
pub use snapshots::{
    generate_snapshots, open_snapshots, snapshot_run, ModalIcSampler, SnapshotConfig,
    SnapshotHeader, SnapshotReader, SnapshotSet, SNAPSHOT_MAGIC,
};

use crate::beam_fe::{modal_analysis, BeamGeometry, BeamModel};
use crate::error::{invalid, Error, Result};
use crate::forcing::{Forcing, ProjectedForcing};
use crate::hysteresis::BoucWenParams;
use crate::integrator::{step_count, Problem, SemiImplicit, SimState};
use crate::system::DenseSystem;
use crate::trajectory::{Record, Trajectory};

/// Truncated modal basis with the projected mass and stiffness.
#[derive(Debug, Clone)]
pub struct ModalProjection {
    /// R (N x r), mass-normalised columns.
    pub basis: DMatrix<f64>,
    pub m_tilde: DMatrix<f64>,
    pub k_tilde: DMatrix<f64>,
    pub frequencies: Vec<f64>,
}

pub fn project_modal(model: &BeamModel, r: usize) -> Result<ModalProjection> {
    if r == 0 || r > model.n_dof() {
        return Err(invalid(
            "r",
            format!("must lie in 1..={}, got {r}", model.n_dof()),
        ));
    }
    let modes = modal_analysis(model, r)?;
    let rt = modes.shapes.transpose();
    Ok(ModalProjection {
        m_tilde: &rt * &model.mass * &modes.shapes,
        k_tilde: &rt * &model.stiffness * &modes.shapes,
        basis: modes.shapes,
        frequencies: modes.frequencies,
    })
}

/// Modal generalised force operator `G = R^T A` (r x n_hyst).
pub fn modal_coupling(model: &BeamModel, basis: &DMatrix<f64>) -> DMatrix<f64> {
    basis.transpose() * &model.coupling
}

/// Reduced model `M~ xi'' + K~ xi + P z_s = R^T f0`, `chi_s' = B_s R xi'`.
#[derive(Debug, Clone)]
pub struct Rom {
    pub geometry: BeamGeometry,
    pub params: BoucWenParams,
    pub basis: DMatrix<f64>,
    pub m_tilde: DMatrix<f64>,
    pub k_tilde: DMatrix<f64>,
    pub frequencies: Vec<f64>,
    /// P (r x m).
    pub projection: DMatrix<f64>,
    /// Retained hysteresis points (0-based), in selection order.
    pub indices: Vec<usize>,
    /// Selected rows of B (m x N).
    pub b_s: DMatrix<f64>,
    pub tip_dof: usize,
}

impl Rom {
    pub fn new(
        model: &BeamModel,
        params: BoucWenParams,
        modal: &ModalProjection,
        indices: &[usize],
        projection: DMatrix<f64>,
    ) -> Result<Self> {
        let r = modal.basis.ncols();
        if projection.nrows() != r || projection.ncols() != indices.len() {
            return Err(Error::Dimension {
                context: "projection matrix",
                expected: r * indices.len(),
                actual: projection.len(),
            });
        }
        let mut seen = vec![false; model.n_hyst()];
        for &i in indices {
            if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
                return Err(invalid(
                    "indices",
                    format!("index {i} out of range or repeated"),
                ));
            }
        }
        let b_s = DMatrix::from_fn(indices.len(), model.n_dof(), |j, c| {
            model.curvature[(indices[j], c)]
        });
        Ok(Self {
            geometry: model.geometry,
            params,
            basis: modal.basis.clone(),
            m_tilde: modal.m_tilde.clone(),
            k_tilde: modal.k_tilde.clone(),
            frequencies: modal.frequencies.clone(),
            projection,
            indices: indices.to_vec(),
            b_s,
            tip_dof: model.tip_dof(),
        })
    }

    /// All modes and all hysteresis points with `P = R^T A`: a change of
    /// basis of the full model.
    pub fn full_basis(model: &BeamModel, params: BoucWenParams) -> Result<Self> {
        let modal = project_modal(model, model.n_dof())?;
        let p = modal_coupling(model, &modal.basis);
        let idx: Vec<usize> = (0..model.n_hyst()).collect();
        Self::new(model, params, &modal, &idx, p)
    }

    pub fn r(&self) -> usize {
        self.basis.ncols()
    }

    pub fn m(&self) -> usize {
        self.indices.len()
    }

    /// The reduced equations as a dense structural system.
    pub fn system(&self) -> Result<DenseSystem> {
        DenseSystem::new(
            self.m_tilde.clone(),
            self.k_tilde.clone(),
            self.projection.clone(),
            &self.b_s * &self.basis,
            self.basis.row(self.tip_dof).transpose(),
        )
    }
}

/// Integrates the reduced model from rest at modal displacement `xi0` with the
/// semi-implicit scheme. `forcing` acts on the full dofs and is projected.
/// Records every `stride` steps; `traj.q` holds the modal coordinates.
pub fn simulate_rom(
    rom: &Rom,
    forcing: &dyn Forcing,
    xi0: &DVector<f64>,
    h: f64,
    t_end: f64,
    stride: usize,
    record: Record,
) -> Result<Trajectory> {
    if xi0.len() != rom.r() {
        return Err(Error::Dimension {
            context: "modal initial condition",
            expected: rom.r(),
            actual: xi0.len(),
        });
    }
    let system = rom.system()?;
    let projected = ProjectedForcing {
        inner: forcing,
        basis: &rom.basis,
    };
    let problem = Problem {
        system: &system,
        params: &rom.params,
        forcing: &projected,
    };
    let ic = SimState::displaced(xi0.clone(), rom.m());
    let steps = step_count(t_end, h)?;
    let mut traj = SemiImplicit::new(h)?.run(&problem, &ic, steps, stride, record)?;
    traj.meta.scheme = "semi-implicit-rom".into();
    traj.meta.n_elements = Some(rom.geometry.n_elements());
    Ok(traj)
}
