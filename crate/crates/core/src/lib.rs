//! Frequency-domain analysis of elastic truss structures through the network
//! Laplacian D(ω), with stiffness/mass FEM and reverberation-matrix baselines and
//! an event-driven wavefront simulator.

pub mod assembly;
pub mod error;
pub mod fem;
pub mod layout;
pub mod linalg;
pub mod model;
pub mod scattering;
pub mod spectrum;
pub mod sweep;
pub mod validation;

pub use error::{Result, TrussError};
