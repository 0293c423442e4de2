use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::assembly::BeamModel;
use crate::error::{invalid, Error, Result};

/// Lowest undamped modes of `(K - w^2 M) v = 0`.
#[derive(Debug, Clone)]
pub struct ModalBasis {
    /// Natural frequencies in Hz, ascending.
    pub frequencies: Vec<f64>,
    /// Mass-normalised mode shapes as columns (N x r).
    pub shapes: DMatrix<f64>,
}

impl ModalBasis {
    pub fn omegas(&self) -> impl Iterator<Item = f64> + '_ {
        self.frequencies.iter().map(|f| 2.0 * PI * f)
    }
}

/// Solves the symmetric-definite pencil (K, M) densely and returns all
/// eigenvalues ascending together with M-orthonormal eigenvectors.
fn dense_pencil(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let chol = m
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite("mass matrix"))?;
    let l = chol.l();
    // C = L^-1 K L^-T
    let mut y = k.clone();
    if !l.solve_lower_triangular_mut(&mut y) {
        return Err(Error::Eigen("singular mass factor".into()));
    }
    let mut c = y.transpose();
    if !l.solve_lower_triangular_mut(&mut c) {
        return Err(Error::Eigen("singular mass factor".into()));
    }
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(c, f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("symmetric QR iteration did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    // x = L^-T y
    if !l.tr_solve_lower_triangular_mut(&mut vectors) {
        return Err(Error::Eigen("singular mass factor".into()));
    }
    Ok((values, vectors))
}

/// Rayleigh-Ritz on span(R): makes R^T M R = I and R^T K R diagonal to
/// rounding of the small r x r problem.
fn rayleigh_ritz(
    k: &DMatrix<f64>,
    m: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let ks = r.transpose() * k * r;
    let ms = r.transpose() * m * r;
    let ks = (&ks + ks.transpose()) * 0.5;
    let ms = (&ms + ms.transpose()) * 0.5;
    let (values, coeffs) = dense_pencil(&ks, &ms)?;
    Ok((values, r * coeffs))
}

/// First `r` modes of the assembled beam.
pub fn modal_analysis(model: &BeamModel, r: usize) -> Result<ModalBasis> {
    let n = model.n_dof();
    if r == 0 || r > n {
        return Err(invalid("r", format!("must lie in 1..={n}, got {r}")));
    }
    let (_, vectors) = dense_pencil(&model.stiffness, &model.mass)?;
    let basis = vectors.columns(0, r).into_owned();
    let (values, shapes) = rayleigh_ritz(&model.stiffness, &model.mass, &basis)?;
    let frequencies = values
        .iter()
        .map(|&lam| {
            if lam > 0.0 {
                Ok(lam.sqrt() / (2.0 * PI))
            } else {
                Err(Error::Eigen(format!("non-positive eigenvalue {lam}")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModalBasis {
        frequencies,
        shapes: fix_signs(shapes, model.tip_dof()),
    })
}

/// All natural frequencies (Hz), ascending.
pub fn natural_frequencies(model: &BeamModel) -> Result<Vec<f64>> {
    let (values, _) = dense_pencil(&model.stiffness, &model.mass)?;
    Ok(values
        .iter()
        .map(|&l| l.max(0.0).sqrt() / (2.0 * PI))
        .collect())
}

/// Period of the highest mode of the discretisation.
pub fn shortest_period(model: &BeamModel) -> Result<f64> {
    let f = natural_frequencies(model)?;
    Ok(1.0 / f.last().copied().unwrap_or(f64::NAN))
}

/// Fundamental frequency of a uniform Euler-Bernoulli cantilever (Hz).
pub fn cantilever_fundamental(flexural_rigidity: f64, mass_per_length: f64, length: f64) -> f64 {
    const BETA1_L: f64 = 1.875_104_068_711_961;
    BETA1_L * BETA1_L / (2.0 * PI) * (flexural_rigidity / (mass_per_length * length.powi(4))).sqrt()
}

/// Orients each mode so the tip displacement is non-negative; makes the
/// basis deterministic independent of the eigen-solver's sign choice.
fn fix_signs(mut shapes: DMatrix<f64>, tip: usize) -> DMatrix<f64> {
    for mut col in shapes.column_iter_mut() {
        if col[tip] < 0.0 {
            col.neg_mut();
        }
    }
    shapes
}

/// Modal coordinates of a displacement field: xi = R^T M q.
pub fn to_modal(basis: &ModalBasis, mass: &DMatrix<f64>, q: &DVector<f64>) -> DVector<f64> {
    basis.shapes.transpose() * (mass * q)
}
