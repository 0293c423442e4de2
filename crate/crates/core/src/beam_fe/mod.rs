//! Euler-Bernoulli cantilever discretised with cubic Hermite elements, with the
//! hysteretic moment sampled at Gauss points.

mod assembly;
mod element;
pub mod gauss;
mod modal;

pub use assembly::{assemble, assemble_banded, build_coupling_matrices, BeamModel, BANDWIDTH};
pub use element::{
    build_element_coupling, build_element_matrices, hermite, hermite_curvature, BeamGeometry,
    ElementCoupling,
};
pub use modal::{
    cantilever_fundamental, modal_analysis, natural_frequencies, shortest_period, to_modal,
    ModalBasis,
};
