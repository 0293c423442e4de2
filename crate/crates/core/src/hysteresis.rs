//! Bouc-Wen hysteresis law driven by the local curvature rate.
//!
//! `z' = (A - alpha sign(chi' z) |z|^n - beta |z|^n) chi'`, evaluated
//! independently at every hysteresis point, with the hysteretic moment
//! `gamma_h z` entering the beam equations.

use crate::error::{invalid, Error, Result};

/// Validated Bouc-Wen constants plus the dissipation strength `gamma_h` (N m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoucWenParams {
    a_bar: f64,
    alpha: f64,
    beta: f64,
    n_h: f64,
    gamma_h: f64,
}

impl BoucWenParams {
    pub fn new(a_bar: f64, alpha: f64, beta: f64, n_h: f64, gamma_h: f64) -> Result<Self> {
        let all = [a_bar, alpha, beta, n_h, gamma_h];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid(
                "bouc_wen",
                format!("non-finite parameter in {all:?}"),
            ));
        }
        if a_bar <= 0.0 {
            return Err(invalid("a_bar", format!("must be > 0, got {a_bar}")));
        }
        if alpha <= 0.0 {
            return Err(invalid("alpha", format!("must be > 0, got {alpha}")));
        }
        if !(beta > -alpha && beta < alpha) {
            return Err(invalid(
                "beta",
                format!(
                    "must lie in (-alpha, alpha) = ({}, {alpha}), got {beta}",
                    -alpha
                ),
            ));
        }
        if n_h <= 0.0 {
            return Err(invalid("n_h", format!("must be > 0, got {n_h}")));
        }
        if gamma_h < 0.0 {
            return Err(invalid("gamma_h", format!("must be >= 0, got {gamma_h}")));
        }
        Ok(Self {
            a_bar,
            alpha,
            beta,
            n_h,
            gamma_h,
        })
    }

    pub fn a_bar(&self) -> f64 {
        self.a_bar
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn n_h(&self) -> f64 {
        self.n_h
    }
    pub fn gamma_h(&self) -> f64 {
        self.gamma_h
    }

    /// Same law with a different dissipation strength.
    pub fn with_gamma_h(self, gamma_h: f64) -> Result<Self> {
        Self::new(self.a_bar, self.alpha, self.beta, self.n_h, gamma_h)
    }

    /// Scalar rate, no validation. `sign(0) = 0`.
    #[inline]
    pub fn rate(&self, z: f64, chi_dot: f64) -> f64 {
        let a = z.abs();
        let pow = if a < 1e-300 {
            0.0
        } else {
            (self.n_h * a.ln()).exp()
        };
        let s = sign(chi_dot * z);
        (self.a_bar - self.alpha * s * pow - self.beta * pow) * chi_dot
    }

    /// |z| reached on a monotone loading branch: `(A / (alpha + beta))^(1/n)`.
    pub fn fixed_point_bound(&self) -> f64 {
        (self.a_bar / (self.alpha + self.beta)).powf(1.0 / self.n_h)
    }
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Elementwise rate for vectors of hysteretic variables and curvature rates.
pub fn bw_rate(z: &[f64], chi_dot: &[f64], params: &BoucWenParams) -> Result<Vec<f64>> {
    if z.len() != chi_dot.len() {
        return Err(Error::Dimension {
            context: "bw_rate",
            expected: z.len(),
            actual: chi_dot.len(),
        });
    }
    if z.iter().chain(chi_dot).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            stage: "bw_rate input",
            t: f64::NAN,
        });
    }
    Ok(z.iter()
        .zip(chi_dot)
        .map(|(&zk, &ck)| params.rate(zk, ck))
        .collect())
}

/// Shape factor `F` with `chi_max^(2n) = 2 A^(2-2n) F`.
fn shape_factor(alpha: f64, beta: f64, n: f64) -> f64 {
    let a2 = alpha * alpha;
    let num = (1.0 + n) * (1.0 + 2.0 * n) * (2.0 + 3.0 * n);
    let den = (2.0 * n * n * a2 + 4.0 * n * a2 - n * beta * beta + 2.0 * a2) * (2.0 + n);
    num / den
}

/// Upper limit of the curvature amplitude below which the small-amplitude
/// power law of the dissipation holds.
pub fn chi_max(params: &BoucWenParams) -> f64 {
    let n = params.n_h;
    let f = shape_factor(params.alpha, params.beta, n);
    (2.0 * params.a_bar.powf(2.0 - 2.0 * n) * f).powf(1.0 / (2.0 * n))
}

/// `A_bar` for which [`chi_max`] equals `target`. At `n_h = 1` the bound does
/// not depend on `A_bar` and no inverse exists.
pub fn solve_abar_for_chimax(target: f64, alpha: f64, beta: f64, n_h: f64) -> Result<f64> {
    if !(target.is_finite() && target > 0.0) {
        return Err(invalid(
            "chi_max",
            format!("must be finite and > 0, got {target}"),
        ));
    }
    // validates alpha, beta, n_h with a placeholder A_bar
    BoucWenParams::new(1.0, alpha, beta, n_h, 0.0)?;
    if (n_h - 1.0).abs() < 1e-12 {
        return Err(invalid("n_h", "chi_max is independent of A_bar at n_h = 1"));
    }
    let f = shape_factor(alpha, beta, n_h);
    Ok((target.powf(2.0 * n_h) / (2.0 * f)).powf(1.0 / (2.0 - 2.0 * n_h)))
}
