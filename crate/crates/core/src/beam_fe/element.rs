use nalgebra::{DMatrix, Matrix4};

use super::gauss::{gauss_legendre, MAX_POINTS};
use crate::error::{invalid, Result};

/// Uniform cantilever discretisation. Construct with [`BeamGeometry::new`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamGeometry {
    length: f64,
    flexural_rigidity: f64,
    mass_per_length: f64,
    n_elements: usize,
    n_gauss: usize,
}

impl BeamGeometry {
    pub fn new(
        length: f64,
        flexural_rigidity: f64,
        mass_per_length: f64,
        n_elements: usize,
        n_gauss: usize,
    ) -> Result<Self> {
        let positive = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(name, format!("must be finite and > 0, got {v}")))
            }
        };
        positive("length", length)?;
        positive("flexural_rigidity", flexural_rigidity)?;
        positive("mass_per_length", mass_per_length)?;
        if n_elements == 0 {
            return Err(invalid("n_elements", "at least one element is required"));
        }
        if !(1..=MAX_POINTS).contains(&n_gauss) {
            return Err(invalid(
                "n_gauss",
                format!("must lie in 1..={MAX_POINTS}, got {n_gauss}"),
            ));
        }
        Ok(Self {
            length,
            flexural_rigidity,
            mass_per_length,
            n_elements,
            n_gauss,
        })
    }

    /// Steel-like 1 m cantilever used throughout the reproduction presets:
    /// EI = 2666.7 N m^2, rho A = 3.14 kg/m, three hysteresis points per element.
    #[allow(clippy::approx_constant)]
    pub fn reference_beam(n_elements: usize) -> Result<Self> {
        Self::new(1.0, 2666.7, 3.14, n_elements, 3)
    }

    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn flexural_rigidity(&self) -> f64 {
        self.flexural_rigidity
    }
    pub fn mass_per_length(&self) -> f64 {
        self.mass_per_length
    }
    pub fn n_elements(&self) -> usize {
        self.n_elements
    }
    pub fn n_gauss(&self) -> usize {
        self.n_gauss
    }
    pub fn element_length(&self) -> f64 {
        self.length / self.n_elements as f64
    }
    /// Free dofs after clamping x = 0.
    pub fn n_dof(&self) -> usize {
        2 * self.n_elements
    }
    /// Hysteresis points in the whole beam.
    pub fn n_hyst(&self) -> usize {
        self.n_gauss * self.n_elements
    }
    /// Index of the tip transverse displacement in the global dof vector.
    pub fn tip_dof(&self) -> usize {
        self.n_dof() - 2
    }
}

/// Cubic Hermite shape functions on an element of length `h`, evaluated at
/// local coordinate `x` in [0, h]. Dof order: (w1, theta1, w2, theta2).
pub fn hermite(h: f64, x: f64) -> [f64; 4] {
    let s = x / h;
    let s2 = s * s;
    let s3 = s2 * s;
    [
        1.0 - 3.0 * s2 + 2.0 * s3,
        h * (s - 2.0 * s2 + s3),
        3.0 * s2 - 2.0 * s3,
        h * (s3 - s2),
    ]
}

/// Second derivatives d^2 psi_i / dx^2 of [`hermite`].
pub fn hermite_curvature(h: f64, x: f64) -> [f64; 4] {
    let s = x / h;
    let h2 = h * h;
    [
        (12.0 * s - 6.0) / h2,
        (6.0 * s - 4.0) / h,
        (6.0 - 12.0 * s) / h2,
        (6.0 * s - 2.0) / h,
    ]
}

/// Consistent mass and stiffness matrices of one element.
pub fn build_element_matrices(geometry: &BeamGeometry) -> (Matrix4<f64>, Matrix4<f64>) {
    let h = geometry.element_length();
    let h2 = h * h;
    let m = geometry.mass_per_length() * h / 420.0;
    #[rustfmt::skip]
    let mass = Matrix4::new(
        156.0 * m,      22.0 * h * m,   54.0 * m,       -13.0 * h * m,
        22.0 * h * m,   4.0 * h2 * m,   13.0 * h * m,   -3.0 * h2 * m,
        54.0 * m,       13.0 * h * m,   156.0 * m,      -22.0 * h * m,
        -13.0 * h * m,  -3.0 * h2 * m,  -22.0 * h * m,  4.0 * h2 * m,
    );
    let k = geometry.flexural_rigidity() / (h2 * h);
    #[rustfmt::skip]
    let stiffness = Matrix4::new(
        12.0 * k,       6.0 * h * k,    -12.0 * k,      6.0 * h * k,
        6.0 * h * k,    4.0 * h2 * k,   -6.0 * h * k,   2.0 * h2 * k,
        -12.0 * k,      -6.0 * h * k,   12.0 * k,       -6.0 * h * k,
        6.0 * h * k,    2.0 * h2 * k,   -6.0 * h * k,   4.0 * h2 * k,
    );
    (mass, stiffness)
}

/// Element-level hysteresis coupling.
///
/// `weights` is the 4 x n_g block `(gamma_h h / 2) Psi W` converting the
/// hysteretic variables of one element into generalised forces, and
/// `curvature` is the n_g x 4 block `Psi^T` giving the curvature at each
/// Gauss point from the element dofs. Column/row `p` of both refers to the
/// same Gauss point `zeta_p`.
#[derive(Debug, Clone)]
pub struct ElementCoupling {
    pub weights: DMatrix<f64>,
    pub curvature: DMatrix<f64>,
    /// Local abscissae of the Gauss points, measured from the element's left node.
    pub local_x: Vec<f64>,
}

pub fn build_element_coupling(geometry: &BeamGeometry, gamma_h: f64) -> Result<ElementCoupling> {
    if !(gamma_h.is_finite() && gamma_h >= 0.0) {
        return Err(invalid(
            "gamma_h",
            format!("must be finite and >= 0, got {gamma_h}"),
        ));
    }
    let ng = geometry.n_gauss();
    let rule = gauss_legendre(ng)?;
    let h = geometry.element_length();
    let scale = 0.5 * gamma_h * h;
    let mut weights = DMatrix::zeros(4, ng);
    let mut curvature = DMatrix::zeros(ng, 4);
    let mut local_x = Vec::with_capacity(ng);
    for (p, &(zeta, w)) in rule.iter().enumerate() {
        let x = 0.5 * h * (1.0 + zeta);
        let d2 = hermite_curvature(h, x);
        for i in 0..4 {
            curvature[(p, i)] = d2[i];
            weights[(i, p)] = scale * d2[i] * w;
        }
        local_x.push(x);
    }
    Ok(ElementCoupling {
        weights,
        curvature,
        local_x,
    })
}
