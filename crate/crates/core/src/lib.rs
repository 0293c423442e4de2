//! Cantilever beam with distributed Bouc-Wen hysteretic damping.
//!
//! Finite element model ([`beam_fe`]), hysteresis law ([`hysteresis`]), time
//! integrators ([`integrator`]), data-driven reduced order models ([`rom`]) and
//! post-processing ([`analysis`]).

pub mod analysis;
pub mod beam_fe;
pub mod error;
pub mod forcing;
pub mod hysteresis;
pub mod initial;
pub mod integrator;
pub mod linalg;
pub mod rng;
pub mod rom;
pub mod system;
pub mod trajectory;

pub use error::{Error, Result};
pub use hysteresis::BoucWenParams;
pub use integrator::{Integrator, Problem, SimState};
pub use system::{BeamSystem, DenseSystem, StructuralSystem};
pub use trajectory::{Record, SampleGrid, Trajectory};
