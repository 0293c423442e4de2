//! Time integration of the coupled beam / hysteresis system.

mod adaptive;
mod semi_implicit;

use std::collections::BTreeMap;

use nalgebra::DVector;

pub use adaptive::{AdaptiveStats, Dopri5};
pub use semi_implicit::{
    mechanical_energy, simulate, split_step, step, step_count, SemiImplicit, StepWorkspace, GAMMA,
};

use crate::error::{Error, Result};
use crate::forcing::Forcing;
use crate::hysteresis::BoucWenParams;
use crate::system::StructuralSystem;
use crate::trajectory::{Record, SampleGrid, Trajectory};

/// Displacements, velocities and hysteretic variables at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub q: DVector<f64>,
    pub v: DVector<f64>,
    pub z: DVector<f64>,
}

impl SimState {
    pub fn zeros(n_dof: usize, n_hyst: usize) -> Self {
        Self {
            t: 0.0,
            q: DVector::zeros(n_dof),
            v: DVector::zeros(n_dof),
            z: DVector::zeros(n_hyst),
        }
    }

    /// At rest in configuration `q`, with virgin hysteresis.
    pub fn displaced(q: DVector<f64>, n_hyst: usize) -> Self {
        let n = q.len();
        Self {
            t: 0.0,
            q,
            v: DVector::zeros(n),
            z: DVector::zeros(n_hyst),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self
                .q
                .iter()
                .chain(self.v.iter())
                .chain(self.z.iter())
                .all(|x| x.is_finite())
    }
}

/// Everything a scheme needs besides the initial state.
#[derive(Clone, Copy)]
pub struct Problem<'a> {
    pub system: &'a dyn StructuralSystem,
    pub params: &'a BoucWenParams,
    pub forcing: &'a dyn Forcing,
}

pub trait Integrator: Send + Sync {
    fn name(&self) -> &str;
    /// Integrates from `ic` and samples at `ic.t + grid.time(k)`, `k = 0..=intervals`.
    fn integrate(
        &self,
        problem: &Problem<'_>,
        ic: &SimState,
        grid: &SampleGrid,
        record: Record,
    ) -> Result<Trajectory>;
}

/// Settings shared by the registered schemes; each reads what applies to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeSettings {
    pub h: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for SchemeSettings {
    fn default() -> Self {
        let d = Dopri5::default();
        Self {
            h: 1e-4,
            rtol: d.rtol,
            atol: d.atol,
            max_steps: d.max_steps,
        }
    }
}

pub type IntegratorFactory = fn(&SchemeSettings) -> Result<Box<dyn Integrator>>;

/// Integration schemes selectable by name.
pub struct IntegratorRegistry {
    factories: BTreeMap<&'static str, IntegratorFactory>,
}

impl Default for IntegratorRegistry {
    fn default() -> Self {
        let mut r = Self {
            factories: BTreeMap::new(),
        };
        r.register("semi-implicit", |s| Ok(Box::new(SemiImplicit::new(s.h)?)));
        r.register("dopri5", |s| {
            let mut d = Dopri5::new(s.rtol, s.atol)?;
            d.max_steps = s.max_steps;
            Ok(Box::new(d))
        });
        r
    }
}

impl IntegratorRegistry {
    pub fn register(&mut self, name: &'static str, factory: IntegratorFactory) {
        self.factories.insert(name, factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    pub fn build(&self, name: &str, settings: &SchemeSettings) -> Result<Box<dyn Integrator>> {
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "integrator",
                name: name.to_string(),
                known: self.names().join(", "),
            })?;
        factory(settings)
    }
}
