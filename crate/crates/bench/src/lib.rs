//! Shared fixtures for the benchmarks.

use num_complex::Complex64;
use pointdamp_core::{BeamParams, GridFunction, ResolventInput};

/// `a = b = 1`, damper at `1/sqrt(2)`.
pub fn reference(alpha: f64) -> BeamParams {
    BeamParams::damped(1.0, 1.0, alpha, std::f64::consts::FRAC_1_SQRT_2).expect("valid parameters")
}

/// `F = (sin(pi x), 0)` at `mu`.
pub fn sine_input(grid: usize, mu: Complex64) -> ResolventInput {
    let u1 = GridFunction::from_fn(grid, |x| {
        Complex64::new((std::f64::consts::PI * x).sin(), 0.0)
    })
    .expect("grid");
    let v1 = GridFunction::zeros(grid).expect("grid");
    ResolventInput::new(u1, v1, mu).expect("admissible data")
}
