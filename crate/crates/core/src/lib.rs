//! Spectral analysis and simulation of a damped Euler-Bernoulli beam with a
//! pointwise feedback damper.

pub mod chareq;
pub mod eigenfunctions;
pub mod error;
pub mod grid;
pub mod model;
pub mod params;
pub mod resolvent;
pub mod simulator;
pub mod spectrum;
pub mod trig;

pub use error::{BeamError, Result};
pub use grid::GridFunction;
pub use model::{Branch, EigenRecord, Provenance, Sign, SpectralPoint};
pub use params::BeamParams;
pub use resolvent::{ResolventInput, ResolventOutput};
pub use simulator::{ModalInit, Trajectory};
pub use spectrum::{compute_spectrum, SpectrumResult};

/// Fixed 17-significant-digit scientific format used in every export.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
