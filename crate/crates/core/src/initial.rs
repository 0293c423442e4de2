//! Initial displacement fields, released from rest.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::beam_fe::{modal_analysis, to_modal, BeamModel};
use crate::error::{invalid, Error, Result};

/// Shape of the initial displacement. Every variant is scaled so that the
/// tip displacement equals the requested amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialShape {
    /// Static deflection under a tip force.
    StaticTip,
    /// Static tip-force deflection restricted to the lowest `r` modes
    /// (mass-orthogonal projection).
    StaticModes(usize),
    /// Lowest `r` modes, each contributing the same share of the tip value.
    EqualModes(usize),
}

impl InitialShape {
    pub fn displacement(&self, model: &BeamModel, tip: f64) -> Result<DVector<f64>> {
        if !tip.is_finite() {
            return Err(invalid("tip_amplitude", "must be finite"));
        }
        let tip_dof = model.tip_dof();
        let q = match *self {
            InitialShape::StaticTip => model.static_tip_deflection(1.0)?,
            InitialShape::StaticModes(r) => {
                let basis = modal_analysis(model, r)?;
                let s = model.static_tip_deflection(1.0)?;
                &basis.shapes * to_modal(&basis, &model.mass, &s)
            }
            InitialShape::EqualModes(r) => {
                let basis = modal_analysis(model, r)?;
                let mut q = DVector::zeros(model.n_dof());
                for k in 0..r {
                    let col = basis.shapes.column(k);
                    q += col * (1.0 / (r as f64 * col[tip_dof]));
                }
                q
            }
        };
        let at_tip = q[tip_dof];
        if at_tip == 0.0 {
            return Err(Error::Analysis(
                "initial shape does not move the tip".into(),
            ));
        }
        Ok(q * (tip / at_tip))
    }
}

impl fmt::Display for InitialShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialShape::StaticTip => write!(f, "static"),
            InitialShape::StaticModes(r) => write!(f, "static-modes:{r}"),
            InitialShape::EqualModes(r) => write!(f, "equal-modes:{r}"),
        }
    }
}

impl FromStr for InitialShape {
    type Err = Error;

    /// `static`, `static-modes:<r>` or `equal-modes:<r>`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, r) =
            match s.split_once(':') {
                Some((k, r)) => (
                    k,
                    Some(r.parse::<usize>().map_err(|_| {
                        invalid("initial_shape", format!("bad mode count in `{s}`"))
                    })?),
                ),
                None => (s, None),
            };
        match (kind, r) {
            ("static", None) => Ok(InitialShape::StaticTip),
            ("static-modes", Some(r)) if r > 0 => Ok(InitialShape::StaticModes(r)),
            ("equal-modes", Some(r)) if r > 0 => Ok(InitialShape::EqualModes(r)),
            _ => Err(invalid(
                "initial_shape",
                format!("`{s}` is not one of static, static-modes:<r>, equal-modes:<r>"),
            )),
        }
    }
}
