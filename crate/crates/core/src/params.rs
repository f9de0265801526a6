use serde::{Deserialize, Serialize};

use crate::error::{BeamError, Result};

/// Physical configuration of the damped beam.
///
/// `a` is the stiffness ratio EI/(rho A), `b` the distributed damping
/// c/(rho A), `alpha` the pointwise damper, `beta` the pointwise spring and
/// `xi` the attachment point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamParams {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    pub xi: f64,
}

const RATIONAL_MAX_DEN: u64 = 64;
const RATIONAL_TOL: f64 = 1e-12;

impl BeamParams {
    pub fn new(a: f64, b: f64, alpha: f64, beta: f64, xi: f64) -> Result<Self> {
        let p = BeamParams {
            a,
            b,
            alpha,
            beta,
            xi,
        };
        p.validate()?;
        Ok(p)
    }

    /// Pointwise-damper configuration without the stiffness term.
    pub fn damped(a: f64, b: f64, alpha: f64, xi: f64) -> Result<Self> {
        Self::new(a, b, alpha, 0.0, xi)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.b, self.alpha, self.beta, self.xi]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(BeamError::InvalidParams(
                "all parameters must be finite".into(),
            ));
        }
        if self.a <= 0.0 {
            return Err(BeamError::InvalidParams(format!(
                "a must be > 0 (got {})",
                self.a
            )));
        }
        if self.b <= 0.0 {
            return Err(BeamError::InvalidParams(format!(
                "b must be > 0 (got {})",
                self.b
            )));
        }
        if self.alpha < 0.0 {
            return Err(BeamError::InvalidParams(format!(
                "alpha must be >= 0 (got {})",
                self.alpha
            )));
        }
        if self.beta < 0.0 {
            return Err(BeamError::InvalidParams(format!(
                "beta must be >= 0 (got {})",
                self.beta
            )));
        }
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return Err(BeamError::InvalidParams(format!(
                "xi must lie in (0, 1) (got {})",
                self.xi
            )));
        }
        Ok(())
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        BeamParams { alpha, ..*self }
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        BeamParams { beta, ..*self }
    }

    /// True when `xi` sits within 1e-12 of a fraction p/q with q <= 64.
    ///
    /// Several closed-form results need an irrational attachment point; this
    /// cannot be decided in floating point, so it is only a warning flag.
    pub fn xi_is_rational_guard(&self) -> bool {
        rational_approximation(self.xi, RATIONAL_MAX_DEN, RATIONAL_TOL).is_some()
    }

    /// Largest n with 2 sqrt(a) n^2 pi^2 < b (0 when every mode oscillates).
    pub fn overdamped_modes(&self) -> u32 {
        overdamped_modes(self.a, self.b)
    }
}

pub(crate) fn overdamped_modes(a: f64, b: f64) -> u32 {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let mut n = 0u32;
    while 2.0 * a.sqrt() * ((n + 1) as f64).powi(2) * pi2 < b {
        n += 1;
    }
    n
}

/// Best rational approximation p/q (q <= max_den) via continued fractions,
/// returned only if it is within `tol` of `x`.
pub fn rational_approximation(x: f64, max_den: u64, tol: f64) -> Option<(i64, u64)> {
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let ai = r.floor();
        let a = ai as i64;
        let h2 = a * h1 + h0;
        let k2 = (a as u64).saturating_mul(k1).saturating_add(k0);
        if k2 > max_den {
            break;
        }
        if (x - h2 as f64 / k2 as f64).abs() <= tol {
            return Some((h2, k2));
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = r - ai;
        if frac.abs() < 1e-300 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}
