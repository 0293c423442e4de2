//! Second-order structural systems `M q'' + C q' + K q + A z = f(t)` with
//! hysteresis driven by `chi' = B q'`, as seen by the time integrators.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CsrMatrix;

use crate::beam_fe::{assemble_banded, BeamModel};
use crate::error::{Error, Result};
use crate::linalg::{csr_mul_into, dense_to_csr, BandCholesky, SymBand};

/// Factorised `M + a C + b K`.
pub trait LinearSolve: Send + Sync {
    fn solve_in_place(&self, rhs: &mut [f64]);
}

pub trait StructuralSystem: Send + Sync {
    fn n_dof(&self) -> usize;
    fn n_hyst(&self) -> usize;
    fn has_damping(&self) -> bool {
        false
    }
    /// `out = M x`
    fn mul_mass(&self, x: &[f64], out: &mut [f64]);
    /// `out = K x`
    fn mul_stiffness(&self, x: &[f64], out: &mut [f64]);
    /// `out = C x`; zero when the system has no viscous damping.
    fn mul_damping(&self, _x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
    }
    /// `out = A z`
    fn mul_coupling(&self, z: &[f64], out: &mut [f64]);
    /// `out = B v`
    fn mul_curvature(&self, v: &[f64], out: &mut [f64]);
    /// Factorises `M + c_coef C + k_coef K`.
    fn factor(&self, c_coef: f64, k_coef: f64) -> Result<Box<dyn LinearSolve>>;
    /// Scalar output (tip displacement) of a displacement vector.
    fn output(&self, q: &[f64]) -> f64;
}

impl LinearSolve for BandCholesky {
    fn solve_in_place(&self, rhs: &mut [f64]) {
        BandCholesky::solve_in_place(self, rhs)
    }
}

/// Finite element beam with banded M, K (and optional C) and sparse A, B.
#[derive(Debug, Clone)]
pub struct BeamSystem {
    mass: SymBand,
    stiffness: SymBand,
    damping: Option<SymBand>,
    coupling: CsrMatrix<f64>,
    curvature: CsrMatrix<f64>,
    tip: usize,
}

impl BeamSystem {
    pub fn new(model: &BeamModel) -> Self {
        let (mass, stiffness) = assemble_banded(&model.geometry);
        Self {
            mass,
            stiffness,
            damping: None,
            coupling: dense_to_csr(&model.coupling),
            curvature: dense_to_csr(&model.curvature),
            tip: model.tip_dof(),
        }
    }

    /// Adds a banded viscous damping matrix with the same bandwidth as M and K.
    pub fn with_damping(mut self, damping: SymBand) -> Result<Self> {
        if damping.dim() != self.mass.dim() || damping.bandwidth() != self.mass.bandwidth() {
            return Err(Error::Dimension {
                context: "damping matrix",
                expected: self.mass.dim(),
                actual: damping.dim(),
            });
        }
        self.damping = Some(damping);
        Ok(self)
    }

    /// Rayleigh damping `C = a M + b K`.
    pub fn with_rayleigh_damping(self, a: f64, b: f64) -> Result<Self> {
        let c = self.mass.combine(a, &self.stiffness, b);
        self.with_damping(c)
    }
}

impl StructuralSystem for BeamSystem {
    fn n_dof(&self) -> usize {
        self.mass.dim()
    }
    fn n_hyst(&self) -> usize {
        self.coupling.ncols()
    }
    fn has_damping(&self) -> bool {
        self.damping.is_some()
    }
    fn mul_mass(&self, x: &[f64], out: &mut [f64]) {
        self.mass.mul_into(x, out)
    }
    fn mul_stiffness(&self, x: &[f64], out: &mut [f64]) {
        self.stiffness.mul_into(x, out)
    }
    fn mul_damping(&self, x: &[f64], out: &mut [f64]) {
        match &self.damping {
            Some(c) => c.mul_into(x, out),
            None => out.iter_mut().for_each(|o| *o = 0.0),
        }
    }
    fn mul_coupling(&self, z: &[f64], out: &mut [f64]) {
        csr_mul_into(&self.coupling, z, out)
    }
    fn mul_curvature(&self, v: &[f64], out: &mut [f64]) {
        csr_mul_into(&self.curvature, v, out)
    }
    fn factor(&self, c_coef: f64, k_coef: f64) -> Result<Box<dyn LinearSolve>> {
        let mut m = self.mass.combine(1.0, &self.stiffness, k_coef);
        if let Some(c) = &self.damping {
            m = m.combine(1.0, c, c_coef);
        }
        Ok(Box::new(m.cholesky()?))
    }
    fn output(&self, q: &[f64]) -> f64 {
        q[self.tip]
    }
}

struct DenseCholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>);

impl LinearSolve for DenseCholesky {
    fn solve_in_place(&self, rhs: &mut [f64]) {
        let mut b = DVector::from_column_slice(rhs);
        self.0.solve_mut(&mut b);
        rhs.copy_from_slice(b.as_slice());
    }
}

/// Dense system used for reduced order models and small synthetic tests.
#[derive(Debug, Clone)]
pub struct DenseSystem {
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    pub damping: Option<DMatrix<f64>>,
    pub coupling: DMatrix<f64>,
    pub curvature: DMatrix<f64>,
    /// Output functional: `y = output_row . q`.
    pub output_row: DVector<f64>,
}

impl DenseSystem {
    pub fn new(
        mass: DMatrix<f64>,
        stiffness: DMatrix<f64>,
        coupling: DMatrix<f64>,
        curvature: DMatrix<f64>,
        output_row: DVector<f64>,
    ) -> Result<Self> {
        let n = mass.nrows();
        let check = |context, expected, actual| {
            if expected == actual {
                Ok(())
            } else {
                Err(Error::Dimension {
                    context,
                    expected,
                    actual,
                })
            }
        };
        check("mass columns", n, mass.ncols())?;
        check("stiffness rows", n, stiffness.nrows())?;
        check("stiffness columns", n, stiffness.ncols())?;
        check("coupling rows", n, coupling.nrows())?;
        check("curvature columns", n, curvature.ncols())?;
        check("curvature rows", coupling.ncols(), curvature.nrows())?;
        check("output row", n, output_row.len())?;
        Ok(Self {
            mass,
            stiffness,
            damping: None,
            coupling,
            curvature,
            output_row,
        })
    }

    /// Dense copy of a full beam model.
    pub fn from_model(model: &BeamModel) -> Self {
        let mut output_row = DVector::zeros(model.n_dof());
        output_row[model.tip_dof()] = 1.0;
        Self {
            mass: model.mass.clone(),
            stiffness: model.stiffness.clone(),
            damping: None,
            coupling: model.coupling.clone(),
            curvature: model.curvature.clone(),
            output_row,
        }
    }
}

fn dense_mul(a: &DMatrix<f64>, x: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum();
    }
}

impl StructuralSystem for DenseSystem {
    fn n_dof(&self) -> usize {
        self.mass.nrows()
    }
    fn n_hyst(&self) -> usize {
        self.coupling.ncols()
    }
    fn has_damping(&self) -> bool {
        self.damping.is_some()
    }
    fn mul_mass(&self, x: &[f64], out: &mut [f64]) {
        dense_mul(&self.mass, x, out)
    }
    fn mul_stiffness(&self, x: &[f64], out: &mut [f64]) {
        dense_mul(&self.stiffness, x, out)
    }
    fn mul_damping(&self, x: &[f64], out: &mut [f64]) {
        match &self.damping {
            Some(c) => dense_mul(c, x, out),
            None => out.iter_mut().for_each(|o| *o = 0.0),
        }
    }
    fn mul_coupling(&self, z: &[f64], out: &mut [f64]) {
        dense_mul(&self.coupling, z, out)
    }
    fn mul_curvature(&self, v: &[f64], out: &mut [f64]) {
        dense_mul(&self.curvature, v, out)
    }
    fn factor(&self, c_coef: f64, k_coef: f64) -> Result<Box<dyn LinearSolve>> {
        let mut m = &self.mass + &self.stiffness * k_coef;
        if let Some(c) = &self.damping {
            m += c * c_coef;
        }
        let chol = m
            .cholesky()
            .ok_or(Error::NotPositiveDefinite("dense step matrix"))?;
        Ok(Box::new(DenseCholesky(chol)))
    }
    fn output(&self, q: &[f64]) -> f64 {
        self.output_row.iter().zip(q).map(|(a, b)| a * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam_fe::{assemble, BeamGeometry};

    #[test]
    fn banded_and_dense_systems_agree() {
        let g = BeamGeometry::reference_beam(4).unwrap();
        let model = assemble(&g, 30.0).unwrap();
        let banded = BeamSystem::new(&model);
        let dense = DenseSystem::from_model(&model);
        let n = model.n_dof();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).cos()).collect();
        let z: Vec<f64> = (0..model.n_hyst())
            .map(|i| (i as f64 * 0.3).sin())
            .collect();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        banded.mul_stiffness(&x, &mut a);
        dense.mul_stiffness(&x, &mut b);
        assert!(a
            .iter()
            .zip(&b)
            .all(|(p, q)| (p - q).abs() < 1e-9 * q.abs().max(1.0)));
        banded.mul_coupling(&z, &mut a);
        dense.mul_coupling(&z, &mut b);
        assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-12));
        let mut ca = vec![0.0; model.n_hyst()];
        let mut cb = vec![0.0; model.n_hyst()];
        banded.mul_curvature(&x, &mut ca);
        dense.mul_curvature(&x, &mut cb);
        assert!(ca.iter().zip(&cb).all(|(p, q)| (p - q).abs() < 1e-12));

        let fa = banded.factor(0.0, 1e-6).unwrap();
        let fb = dense.factor(0.0, 1e-6).unwrap();
        let (mut ra, mut rb) = (x.clone(), x.clone());
        fa.solve_in_place(&mut ra);
        fb.solve_in_place(&mut rb);
        assert!(ra
            .iter()
            .zip(&rb)
            .all(|(p, q)| (p - q).abs() < 1e-10 * q.abs().max(1.0)));
        assert_eq!(banded.output(&x), dense.output(&x));
    }

    #[test]
    fn dense_system_checks_dimensions() {
        let m = DMatrix::identity(2, 2);
        let bad = DenseSystem::new(
            m.clone(),
            m.clone(),
            DMatrix::zeros(2, 3),
            DMatrix::zeros(2, 2),
            DVector::zeros(2),
        );
        assert!(bad.is_err());
    }
}
