//! Exact single-excitation dynamics of a qubit coupled to a hierarchical
//! environment: one lossy cavity m₀ coupled to N mutually coupled lossy
//! cavities.
//!
//! From the survival amplitude `g(t)` the crate computes the BLP
//! non-Markovianity, the quantum-speed-limit time ratio, critical crossover
//! parameters and Ω–N phase diagrams.

pub mod analysis;
pub mod error;
pub mod measures;
pub mod model;
pub mod propagation;

pub use num_complex::Complex64 as C64;

pub use error::{AnalysisError, MeasureError, ModelError, PropagationError};
pub use measures::MeasureReport;
pub use model::{ModelParams, QubitState, Topology};
pub use propagation::{AmplitudeTrajectory, TimeGrid};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest modulus among complex entries.
pub(crate) fn max_modulus<'a>(entries: impl IntoIterator<Item = &'a C64>) -> f64 {
    entries.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}
