use nalgebra::DMatrix;

use super::element::{build_element_coupling, build_element_matrices, BeamGeometry};
use crate::error::Result;
use crate::linalg::SymBand;

/// Half-bandwidth of the clamped-beam matrices: two dofs per node, nearest-neighbour coupling.
pub const BANDWIDTH: usize = 3;

/// Global matrices of the clamped beam.
///
/// Dofs are numbered node by node (transverse displacement, rotation) starting
/// from the first free node, so `N = 2 n_e` and the tip displacement is dof
/// `N - 2`. Hysteresis points are numbered element by element, ascending in x
/// within an element: point `k = e n_g + p`. Column `k` of `coupling` and row
/// `k` of `curvature` refer to the same point.
#[derive(Debug, Clone)]
pub struct BeamModel {
    pub geometry: BeamGeometry,
    pub gamma_h: f64,
    /// Consistent mass matrix M (N x N).
    pub mass: DMatrix<f64>,
    /// Stiffness matrix K (N x N).
    pub stiffness: DMatrix<f64>,
    /// Virtual-work weights A (N x n_g n_e).
    pub coupling: DMatrix<f64>,
    /// Curvature operator B (n_g n_e x N).
    pub curvature: DMatrix<f64>,
    /// Physical abscissa of every hysteresis point (m).
    pub gauss_x: Vec<f64>,
}

/// Global dof of element `e`'s local dof `i`, `None` for the clamped node.
pub(crate) fn global_dof(e: usize, i: usize) -> Option<usize> {
    (2 * e + i).checked_sub(2)
}

pub fn build_coupling_matrices(
    geometry: &BeamGeometry,
    gamma_h: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<f64>)> {
    let block = build_element_coupling(geometry, gamma_h)?;
    let (n, ng) = (geometry.n_dof(), geometry.n_gauss());
    let mut a = DMatrix::zeros(n, geometry.n_hyst());
    let mut b = DMatrix::zeros(geometry.n_hyst(), n);
    let mut gauss_x = Vec::with_capacity(geometry.n_hyst());
    let h = geometry.element_length();
    for e in 0..geometry.n_elements() {
        for p in 0..ng {
            let k = e * ng + p;
            gauss_x.push(e as f64 * h + block.local_x[p]);
            for i in 0..4 {
                if let Some(g) = global_dof(e, i) {
                    a[(g, k)] += block.weights[(i, p)];
                    b[(k, g)] = block.curvature[(p, i)];
                }
            }
        }
    }
    Ok((a, b, gauss_x))
}

/// Assembles M, K, A and B with the clamped node's dofs eliminated.
pub fn assemble(geometry: &BeamGeometry, gamma_h: f64) -> Result<BeamModel> {
    let n = geometry.n_dof();
    let (me, ke) = build_element_matrices(geometry);
    let mut mass = DMatrix::zeros(n, n);
    let mut stiffness = DMatrix::zeros(n, n);
    for e in 0..geometry.n_elements() {
        for i in 0..4 {
            let Some(gi) = global_dof(e, i) else { continue };
            for j in 0..4 {
                let Some(gj) = global_dof(e, j) else { continue };
                mass[(gi, gj)] += me[(i, j)];
                stiffness[(gi, gj)] += ke[(i, j)];
            }
        }
    }
    let (coupling, curvature, gauss_x) = build_coupling_matrices(geometry, gamma_h)?;
    Ok(BeamModel {
        geometry: *geometry,
        gamma_h,
        mass,
        stiffness,
        coupling,
        curvature,
        gauss_x,
    })
}

/// Banded assembly of (M, K). Adds the same element contributions in the same
/// order as [`assemble`], so entries agree bit for bit with the dense matrices.
pub fn assemble_banded(geometry: &BeamGeometry) -> (SymBand, SymBand) {
    let n = geometry.n_dof();
    let (me, ke) = build_element_matrices(geometry);
    let mut mass = SymBand::zeros(n, BANDWIDTH);
    let mut stiffness = SymBand::zeros(n, BANDWIDTH);
    for e in 0..geometry.n_elements() {
        for i in 0..4 {
            let Some(gi) = global_dof(e, i) else { continue };
            for j in 0..4 {
                let Some(gj) = global_dof(e, j) else { continue };
                if gi >= gj {
                    mass.add(gi, gj, me[(i, j)]);
                    stiffness.add(gi, gj, ke[(i, j)]);
                }
            }
        }
    }
    (mass, stiffness)
}

impl BeamModel {
    pub fn n_dof(&self) -> usize {
        self.geometry.n_dof()
    }

    pub fn n_hyst(&self) -> usize {
        self.geometry.n_hyst()
    }

    pub fn tip_dof(&self) -> usize {
        self.geometry.tip_dof()
    }

    /// Static response `K q = f` to a transverse tip force.
    pub fn static_tip_deflection(&self, force: f64) -> Result<nalgebra::DVector<f64>> {
        let mut f = nalgebra::DVector::zeros(self.n_dof());
        f[self.tip_dof()] = force;
        let chol = self
            .stiffness
            .clone()
            .cholesky()
            .ok_or(crate::Error::NotPositiveDefinite("stiffness"))?;
        Ok(chol.solve(&f))
    }
}
