use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BeamError, Result};
use crate::model::Sign;

use super::undamped_pair;

fn check_simple(a: f64, b: f64, n: u32) -> Result<()> {
    let d = b * b - 4.0 * a * (n as f64 * PI).powi(4);
    if d.abs() < 1e-8 {
        return Err(BeamError::NearDoubleRoot(d.abs()));
    }
    Ok(())
}

fn pick(a: f64, b: f64, n: u32, sign: Sign) -> Complex64 {
    let (p, m) = undamped_pair(a, b, n);
    match sign {
        Sign::Plus => p,
        Sign::Minus => m,
    }
}

/// First-order eigenvalue in the damper strength:
/// `mu ~ mu0 - 2 alpha mu0 sin^2(n pi xi) / (2 mu0 + b)`.
///
/// For oscillating modes the real part moves by `-alpha sin^2(n pi xi)`.
pub fn perturbation_mu(
    a: f64,
    b: f64,
    xi: f64,
    alpha: f64,
    n: u32,
    sign: Sign,
) -> Result<Complex64> {
    check_simple(a, b, n)?;
    let mu0 = pick(a, b, n, sign);
    let s = (n as f64 * PI * xi).sin();
    Ok(mu0 - 2.0 * alpha * mu0 * s * s / (2.0 * mu0 + b))
}

/// Real part of the slope `d Re mu / d alpha` as printed for oscillating
/// modes, `-sin^2(2 n pi xi) / 2`. Kept for comparison only.
pub fn remun_slope_stated(xi: f64, n: u32) -> f64 {
    -0.5 * (2.0 * n as f64 * PI * xi).sin().powi(2)
}

/// First-order shift of `Re mu_n^±` caused by the pointwise spring:
/// `Re[-2 beta sin^2(n pi xi) / (2 mu0 + b)]`.
///
/// For overdamped modes this is `∓ 2 beta sin^2(n pi xi) / sqrt(b^2 - 4 a n^4 pi^4)`,
/// so the slower root moves left; oscillating modes only shift in frequency.
pub fn beta_shift(a: f64, b: f64, xi: f64, beta: f64, n: u32, sign: Sign) -> Result<f64> {
    check_simple(a, b, n)?;
    let mu0 = pick(a, b, n, sign);
    let s = (n as f64 * PI * xi).sin();
    Ok((-2.0 * beta * s * s / (2.0 * mu0 + b)).re)
}

/// The printed shift `± 2 sin^2(2 n pi xi) / sqrt(b^2 - 4 a n^4 pi^4) beta`.
pub fn beta_shift_stated(a: f64, b: f64, xi: f64, beta: f64, n: u32, sign: Sign) -> Result<f64> {
    check_simple(a, b, n)?;
    let d = b * b - 4.0 * a * (n as f64 * PI).powi(4);
    if d < 0.0 {
        return Err(BeamError::InvalidParams(format!(
            "mode {n} is oscillating; the stated shift is not real"
        )));
    }
    Ok(sign.as_f64() * 2.0 * (2.0 * n as f64 * PI * xi).sin().powi(2) / d.sqrt() * beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalAlpha {
    pub alpha: f64,
    pub r: f64,
    /// Positive and not degenerate.
    pub admissible: bool,
    /// `sin r = 0`: the numerator vanishes.
    pub degenerate: bool,
}

/// Damping that puts an eigenvalue at `mu = -b/2`:
/// `alpha* = -4 a r^3 sinh r sin r / (b [sinh r sin(r xi) sin(r(xi-1)) - sin r sinh(r xi) sinh(r(xi-1))])`
/// with `r = (b^2 / 4a)^{1/4}`.
pub fn critical_alpha_double(a: f64, b: f64, xi: f64) -> Result<CriticalAlpha> {
    let r = (b * b / (4.0 * a)).powf(0.25);
    let den = r.sinh() * (r * xi).sin() * (r * (xi - 1.0)).sin()
        - r.sin() * (r * xi).sinh() * (r * (xi - 1.0)).sinh();
    if den.abs() < 1e-14 * r.sinh().max(1.0) {
        return Err(BeamError::DenominatorVanishes(xi));
    }
    let degenerate = r.sin().abs() < 1e-12;
    let alpha = if degenerate {
        0.0
    } else {
        -4.0 * a * r.powi(3) * r.sinh() * r.sin() / (b * den)
    };
    Ok(CriticalAlpha {
        alpha,
        r,
        admissible: alpha > 0.0 && !degenerate,
        degenerate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiReport {
    pub alpha_b: f64,
    /// Roots in (0,1) of `P(x) = 1 - (2 alpha b / 3) x^2 (1-x)^2`.
    pub stated_roots: Vec<f64>,
    /// Value of `alpha b` announced as the two-root threshold.
    pub stated_threshold: f64,
    /// Threshold implied by `min P = P(1/2) = 1 - alpha b / 24`.
    pub extremum_threshold: f64,
    pub thresholds_disagree: bool,
    /// Locations where `mu = -b` is an eigenvalue, from the value of the
    /// entire characteristic function at `lambda = 0`:
    /// `1 - (alpha b / 3a) x^2 (1-x)^2 = 0`.
    pub entire_form_roots: Vec<f64>,
    pub entire_form_threshold: f64,
}

/// Roots in (0,1) of `x (1 - x) = c`.
fn symmetric_roots(c: f64) -> Vec<f64> {
    let disc = 1.0 - 4.0 * c;
    if disc < -1e-14 {
        Vec::new()
    } else if disc.abs() <= 1e-14 {
        vec![0.5]
    } else {
        let s = disc.sqrt();
        vec![(1.0 - s) / 2.0, (1.0 + s) / 2.0]
    }
}

pub fn xi_special_report(a: f64, b: f64, alpha: f64) -> XiReport {
    let ab = alpha * b;
    let (stated, entire) = if ab > 0.0 {
        (
            symmetric_roots((3.0 / (2.0 * ab)).sqrt()),
            symmetric_roots((3.0 * a / ab).sqrt()),
        )
    } else {
        (Vec::new(), Vec::new())
    };
    XiReport {
        alpha_b: ab,
        stated_roots: stated,
        stated_threshold: 6.0,
        extremum_threshold: 24.0,
        thresholds_disagree: true,
        entire_form_roots: entire,
        entire_form_threshold: 48.0 * a,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn perturbation_zeroth_order() {
        let mu = perturbation_mu(1.0, 1.0, 0.3, 0.0, 2, Sign::Plus).unwrap();
        assert_eq!(mu, undamped_pair(1.0, 1.0, 2).0);
        assert!(perturbation_mu(1.0, 2.0 * PI * PI, 0.3, 0.1, 1, Sign::Plus).is_err());
    }

    #[test]
    fn perturbation_real_part() {
        let mu = perturbation_mu(1.0, 1.0, FRAC_1_SQRT_2, 1e-3, 1, Sign::Plus).unwrap();
        let s = (PI * FRAC_1_SQRT_2).sin();
        assert!((mu.re - (-0.5 - s * s * 1e-3)).abs() < 1e-15);
        // extremal location for mode 1
        let mu = perturbation_mu(1.0, 1.0, 0.5, 0.1, 1, Sign::Plus).unwrap();
        assert!((mu.re + 0.6).abs() < 1e-14);
    }

    #[test]
    fn beta_shift_values() {
        assert_eq!(beta_shift(1.0, 25.0, 0.3, 0.0, 1, Sign::Plus).unwrap(), 0.0);
        let d = (625.0 - 4.0 * PI.powi(4)).sqrt();
        let s = (0.3 * PI).sin().powi(2);
        let plus = beta_shift(1.0, 25.0, 0.3, 0.01, 1, Sign::Plus).unwrap();
        assert!((plus + 2.0 * s / d * 0.01).abs() < 1e-15);
        let minus = beta_shift(1.0, 25.0, 0.3, 0.01, 1, Sign::Minus).unwrap();
        assert!((minus - 2.0 * s / d * 0.01).abs() < 1e-15);
        let stated = beta_shift_stated(1.0, 25.0, 0.3, 0.01, 1, Sign::Plus).unwrap();
        assert!((stated - 2.0 * (0.6 * PI).sin().powi(2) / 235.3636f64.sqrt() * 0.01).abs() < 1e-6);
        assert!(stated > 0.0);
    }

    #[test]
    fn critical_alpha_degenerate_at_pi() {
        let c = critical_alpha_double(1.0, 2.0 * PI * PI, 0.3).unwrap();
        assert!(c.degenerate && !c.admissible);
        assert!((c.r - PI).abs() < 1e-12);
    }

    #[test]
    fn xi_report_cases() {
        let r = xi_special_report(1.0, 24.0, 1.0);
        assert_eq!(r.stated_roots, vec![0.5]);
        assert!(xi_special_report(1.0, 1.0, 1.0).stated_roots.is_empty());
        let r = xi_special_report(1.0, 48.0, 1.0);
        assert_eq!(r.stated_roots.len(), 2);
        let c = (3.0f64 / 96.0).sqrt();
        for x in &r.stated_roots {
            assert!((x * (1.0 - x) - c).abs() < 1e-14);
        }
        assert!((r.stated_roots[0] + r.stated_roots[1] - 1.0).abs() < 1e-14);
        assert_eq!(r.entire_form_roots, vec![0.5]);
        assert!(r.thresholds_disagree);
    }
}
