//! The algebraic link between the generator eigenvalue `mu` and the
//! fourth-root parameter `lambda`, `lambda^4 = -(b mu + mu^2) / a`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{BeamError, Result};
use crate::params::BeamParams;

/// Which of the four fourth roots a `lambda` value represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Principal,
    Negated,
    TimesI,
    TimesMinusI,
}

impl Branch {
    pub fn factor(self) -> Complex64 {
        match self {
            Branch::Principal => Complex64::new(1.0, 0.0),
            Branch::Negated => Complex64::new(-1.0, 0.0),
            Branch::TimesI => Complex64::new(0.0, 1.0),
            Branch::TimesMinusI => Complex64::new(0.0, -1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub mu: Complex64,
    pub lambda: Complex64,
    pub branch: Branch,
    pub residual: f64,
}

impl SpectralPoint {
    /// Same `mu`, with `lambda` rotated onto another fourth root.
    pub fn on_branch(&self, branch: Branch) -> SpectralPoint {
        let principal = self.lambda * self.branch.factor().conj();
        SpectralPoint {
            lambda: principal * branch.factor(),
            branch,
            ..*self
        }
    }
}

/// Root `mu_n^+` or `mu_n^-` of the quadratic attached to mode `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Perturbative,
    Contour,
    Tracked,
    Oracle,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed-form",
            Provenance::Perturbative => "perturbative",
            Provenance::Contour => "contour",
            Provenance::Tracked => "tracked",
            Provenance::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub point: SpectralPoint,
    pub n: i32,
    pub sign: Sign,
    pub alg_mult_estimate: u32,
    pub provenance: Provenance,
}

impl EigenRecord {
    pub fn mu(&self) -> Complex64 {
        self.point.mu
    }
}

/// `lambda^4` for a given `mu`, written as a product so it stays accurate
/// next to the roots `mu = 0` and `mu = -b`.
pub fn lambda4(params: &BeamParams, mu: Complex64) -> Complex64 {
    -(mu * (mu + params.b)) / params.a
}

/// Principal fourth root, `arg(lambda)` in `[-pi/4, pi/4)`.
pub fn principal_fourth_root(w: Complex64) -> Complex64 {
    if w.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut arg = w.arg();
    if arg >= PI {
        arg = -PI;
    }
    Complex64::from_polar(w.norm().powf(0.25), arg / 4.0)
}

pub fn lambda_from_mu(params: &BeamParams, mu: Complex64) -> Result<SpectralPoint> {
    let w = lambda4(params, mu);
    if (mu * (mu + params.b)).norm() < 1e-300 {
        return Err(BeamError::DegenerateLambda { mu });
    }
    Ok(SpectralPoint {
        mu,
        lambda: principal_fourth_root(w),
        branch: Branch::Principal,
        residual: 0.0,
    })
}

/// Both roots of `mu^2 + b mu + a lambda^4 = 0`, ordered `(mu+, mu-)` by
/// imaginary part (then real part).
pub fn mu_from_lambda(params: &BeamParams, lambda: Complex64) -> (Complex64, Complex64) {
    let l2 = lambda * lambda;
    let c = params.a * l2 * l2;
    let b = Complex64::new(params.b, 0.0);
    let mut s = (b * b - 4.0 * c).sqrt();
    if s.re < 0.0 {
        s = -s;
    }
    // b > 0 and Re(s) >= 0: no cancellation in b + s.
    let q = -(b + s) / 2.0;
    let r1 = q;
    let r2 = if q.norm() > 0.0 {
        c / q
    } else {
        Complex64::new(0.0, 0.0)
    };
    order_pair(r1, r2)
}

pub(crate) fn order_pair(r1: Complex64, r2: Complex64) -> (Complex64, Complex64) {
    if r1.im > r2.im || (r1.im == r2.im && r1.re >= r2.re) {
        (r1, r2)
    } else {
        (r2, r1)
    }
}

/// `d lambda / d mu` along the principal branch.
pub fn dlambda_dmu(params: &BeamParams, mu: Complex64, lambda: Complex64) -> Complex64 {
    -(params.b + 2.0 * mu) / (4.0 * params.a * lambda * lambda * lambda)
}
