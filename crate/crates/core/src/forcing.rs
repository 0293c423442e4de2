//! External load histories `f0(t)` with analytic time derivatives.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub trait Forcing: Send + Sync {
    fn name(&self) -> &str;
    /// `out = f0(t)`
    fn value(&self, t: f64, out: &mut [f64]);
    /// `out = d f0 / dt (t)`
    fn derivative(&self, t: f64, out: &mut [f64]);
    /// True when `f0` vanishes identically; lets integrators skip evaluations.
    fn is_zero(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Unforced;

impl Forcing for Unforced {
    fn name(&self) -> &str {
        "none"
    }
    fn value(&self, _t: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
    }
    fn derivative(&self, _t: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
    }
    fn is_zero(&self) -> bool {
        true
    }
}

/// `F sin(2 pi f t)` applied to a single dof.
#[derive(Debug, Clone, Copy)]
pub struct HarmonicPointLoad {
    pub dof: usize,
    pub amplitude: f64,
    pub frequency: f64,
}

impl Forcing for HarmonicPointLoad {
    fn name(&self) -> &str {
        "tip-harmonic"
    }
    fn value(&self, t: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        out[self.dof] = self.amplitude * (2.0 * PI * self.frequency * t).sin();
    }
    fn derivative(&self, t: f64, out: &mut [f64]) {
        let w = 2.0 * PI * self.frequency;
        out.iter_mut().for_each(|o| *o = 0.0);
        out[self.dof] = self.amplitude * w * (w * t).cos();
    }
}

/// Modal projection `R^T f0(t)` of a full-model load.
pub struct ProjectedForcing<'a> {
    pub inner: &'a dyn Forcing,
    /// Mode shapes R (N x r).
    pub basis: &'a DMatrix<f64>,
}

impl ProjectedForcing<'_> {
    fn project(&self, full: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self
                .basis
                .column(k)
                .iter()
                .zip(full)
                .map(|(a, b)| a * b)
                .sum();
        }
    }
}

impl Forcing for ProjectedForcing<'_> {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn value(&self, t: f64, out: &mut [f64]) {
        let mut full = vec![0.0; self.basis.nrows()];
        self.inner.value(t, &mut full);
        self.project(&full, out);
    }
    fn derivative(&self, t: f64, out: &mut [f64]) {
        let mut full = vec![0.0; self.basis.nrows()];
        self.inner.derivative(t, &mut full);
        self.project(&full, out);
    }
    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }
}

/// Arguments handed to forcing factories.
#[derive(Debug, Clone, Copy, Default)]
pub struct ForcingArgs {
    pub n_dof: usize,
    pub tip_dof: usize,
    pub amplitude: f64,
    pub frequency: f64,
}

pub type ForcingFactory = fn(&ForcingArgs) -> Result<Box<dyn Forcing>>;

/// Load histories selectable by name.
pub struct ForcingRegistry {
    factories: BTreeMap<&'static str, ForcingFactory>,
}

impl Default for ForcingRegistry {
    fn default() -> Self {
        let mut r = Self {
            factories: BTreeMap::new(),
        };
        r.register("none", |_| Ok(Box::new(Unforced)));
        r.register("tip-harmonic", |a| {
            if !(a.frequency.is_finite() && a.amplitude.is_finite()) {
                return Err(crate::error::invalid(
                    "forcing",
                    "tip-harmonic needs finite amplitude and frequency",
                ));
            }
            if a.tip_dof >= a.n_dof {
                return Err(Error::Dimension {
                    context: "tip-harmonic dof",
                    expected: a.n_dof,
                    actual: a.tip_dof,
                });
            }
            Ok(Box::new(HarmonicPointLoad {
                dof: a.tip_dof,
                amplitude: a.amplitude,
                frequency: a.frequency,
            }))
        });
        r
    }
}

impl ForcingRegistry {
    pub fn register(&mut self, name: &'static str, factory: ForcingFactory) {
        self.factories.insert(name, factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    pub fn build(&self, name: &str, args: &ForcingArgs) -> Result<Box<dyn Forcing>> {
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "forcing",
                name: name.to_string(),
                known: self.names().join(", "),
            })?;
        factory(args)
    }
}
