//! Characteristic functions whose zeros are the generator eigenvalues.
//!
//! Two forms are provided:
//!
//! * [`char_fn`] is the classical form
//!   `G(mu) = 2 (mu + b) sinh(l) sin(l) + alpha l [sin(l) sinh(l xi) sinh(l(1-xi))
//!   - sinh(l) sin(l xi) sin(l(1-xi))]` with `l` the principal fourth root.
//!   Its modulus is branch independent but its sign flips under
//!   `l -> i l`, and it has a spurious zero at `mu = -b`.
//! * [`char_entire`] is `E(mu) = [2 a l^3 sinh(l) sin(l) - (alpha mu + beta) B(l)] / l^5`.
//!   It depends on `l` only through `l^4`, so it is an entire function of
//!   `mu`. This is the form used for Newton refinement and winding numbers.
//!   The two are related by `G = -l^6 E / mu`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BeamError, Result};
use crate::model::{dlambda_dmu, lambda4, lambda_from_mu, principal_fourth_root};
use crate::params::BeamParams;
use crate::trig::{m_series, poly_eval, q_series, BeamTrig};

/// Above this `|Re l| + |Im l|` the classical form switches to scaled evaluation.
pub const SCALE_THRESHOLD: f64 = 30.0;
/// Below this `|l|` the entire form is evaluated by power series.
const SERIES_RADIUS: f64 = 2.0;

/// A characteristic-function value, possibly with its exponential growth stripped.
///
/// The unscaled value is `prefactor * value * exp(scale_log)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharValue {
    pub value: Complex64,
    pub scaled: bool,
    pub scale_log: f64,
    pub prefactor: Complex64,
}

impl CharValue {
    fn raw(value: Complex64) -> Self {
        CharValue {
            value,
            scaled: false,
            scale_log: 0.0,
            prefactor: Complex64::new(1.0, 0.0),
        }
    }

    pub fn unscaled(&self) -> Complex64 {
        self.prefactor * self.value * self.scale_log.exp()
    }

    /// Phase of the unscaled value (never overflows).
    pub fn arg(&self) -> f64 {
        (self.prefactor * self.value).arg()
    }

    /// `ln |unscaled|`.
    pub fn log_abs(&self) -> f64 {
        (self.prefactor * self.value).norm().ln() + self.scale_log
    }
}

fn principal_lambda(params: &BeamParams, mu: Complex64) -> Result<Complex64> {
    Ok(lambda_from_mu(params, mu)?.lambda)
}

fn effective_alpha(params: &BeamParams, mu: Complex64) -> Result<Complex64> {
    if params.beta == 0.0 {
        return Ok(Complex64::new(params.alpha, 0.0));
    }
    if mu.norm() < 1e-12 {
        return Err(BeamError::DivisionNearZero(mu.norm()));
    }
    Ok(params.alpha + params.beta / mu)
}

fn classical(params: &BeamParams, mu: Complex64, alpha_eff: Complex64) -> Result<CharValue> {
    let lambda = principal_lambda(params, mu)?;
    if lambda.re.abs() + lambda.im.abs() > SCALE_THRESHOLD {
        return scaled_form(params, lambda, mu, alpha_eff);
    }
    let bt = BeamTrig::new(lambda, params.xi);
    let e = bt.scale.exp();
    let g = 2.0 * (mu + params.b) * bt.p() * e + alpha_eff * lambda * bt.bracket() * e;
    Ok(CharValue::raw(g))
}

fn scaled_form(
    params: &BeamParams,
    lambda: Complex64,
    mu: Complex64,
    alpha_eff: Complex64,
) -> Result<CharValue> {
    if lambda.norm() == 0.0 {
        return Err(BeamError::DegenerateLambda { mu });
    }
    let bt = BeamTrig::new(lambda, params.xi);
    let l3 = lambda * lambda * lambda;
    let value = bt.p() - alpha_eff * mu / (2.0 * params.a * l3) * bt.bracket();
    Ok(CharValue {
        value,
        scaled: true,
        scale_log: bt.scale,
        prefactor: 2.0 * (mu + params.b),
    })
}

/// Classical characteristic function (stiffness term ignored).
pub fn char_fn(params: &BeamParams, mu: Complex64) -> Result<CharValue> {
    classical(params, mu, Complex64::new(params.alpha, 0.0))
}

/// Classical characteristic function with `alpha` replaced by `alpha + beta / mu`.
pub fn char_fn_beta(params: &BeamParams, mu: Complex64) -> Result<CharValue> {
    let alpha_eff = effective_alpha(params, mu)?;
    classical(params, mu, alpha_eff)
}

/// Overflow-safe form `S Sh - alpha mu / (2 a l^3) [...]` with every
/// exponential factor bounded by one.
///
/// `value` has modulus at most `1 + O(alpha/|l|)`; the classical value is
/// recovered through `prefactor = 2 (mu + b)` and `scale_log`.
pub fn char_fn_scaled(params: &BeamParams, lambda: Complex64, mu: Complex64) -> Result<CharValue> {
    if lambda.norm() == 0.0 {
        return Err(BeamError::DegenerateLambda { mu });
    }
    let w = lambda4(params, mu);
    let l4 = lambda.powi(4);
    if (l4 - w).norm() > 1e-8 * w.norm().max(1e-300) {
        return Err(BeamError::InvalidParams(format!(
            "lambda {lambda} is not a fourth root for mu = {mu}"
        )));
    }
    scaled_form(params, lambda, mu, effective_alpha(params, mu)?)
}

/// `dG/dmu` of the classical form, through the chain rule in `lambda`.
///
/// Within 1e-3 of `mu in {0, -b}` a central difference is used instead.
pub fn char_derivative(params: &BeamParams, mu: Complex64) -> Result<Complex64> {
    let near = mu.norm().min((mu + params.b).norm());
    if near < 1e-3 {
        let h = 1e-6 * mu.norm().max(1.0);
        let f = |z: Complex64| char_fn_beta(params, z).map(|v| v.unscaled());
        let hr = Complex64::new(h, 0.0);
        return Ok((f(mu + hr)? - f(mu - hr)?) / (2.0 * h));
    }
    let lambda = principal_lambda(params, mu)?;
    let alpha_eff = effective_alpha(params, mu)?;
    let bt = BeamTrig::new(lambda, params.xi);
    let e = bt.scale.exp();
    let dl = dlambda_dmu(params, mu, lambda);
    let p = bt.p() * e;
    let dp = bt.dp() * e;
    let br = bt.bracket() * e;
    let dbr = bt.dbracket(params.xi) * e;
    let dalpha = if params.beta == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        -params.beta / (mu * mu)
    };
    Ok(2.0 * p
        + (2.0 * (mu + params.b) * dp + alpha_eff * (br + lambda * dbr)) * dl
        + dalpha * lambda * br)
}

/// Cached expansion data for the entire form at fixed `xi`.
#[derive(Debug, Clone)]
pub struct EntireSeries {
    q: Vec<f64>,
    m: Vec<f64>,
}

impl EntireSeries {
    pub fn new(xi: f64) -> Self {
        EntireSeries {
            q: q_series(),
            m: m_series(xi),
        }
    }
}

/// Value and `mu`-derivative of the entire form, in a common scale.
#[derive(Debug, Clone, Copy)]
pub struct EntireEval {
    pub value: CharValue,
    /// Derivative, scaled by the same `exp(-scale_log)` as `value`.
    pub derivative: Complex64,
}

impl EntireEval {
    pub fn newton_step(&self) -> Complex64 {
        self.value.value / self.derivative
    }
}

/// Entire characteristic function and its derivative.
pub fn char_entire_eval(params: &BeamParams, series: &EntireSeries, mu: Complex64) -> EntireEval {
    let a = params.a;
    let w = lambda4(params, mu);
    let dw = -(params.b + 2.0 * mu) / a;
    let coupling = params.alpha * mu + params.beta;
    let lambda = principal_fourth_root(w);
    if lambda.norm() < SERIES_RADIUS {
        let (q, dq) = poly_eval(&series.q, w);
        let (m, dm) = poly_eval(&series.m, w);
        let value = 2.0 * a * q - coupling * m;
        let derivative = (2.0 * a * dq - coupling * dm) * dw - params.alpha * m;
        return EntireEval {
            value: CharValue::raw(value),
            derivative,
        };
    }
    let bt = BeamTrig::new(lambda, params.xi);
    let l2 = lambda * lambda;
    let l3 = l2 * lambda;
    let l5 = l3 * l2;
    let q = bt.p() / l2;
    let dq_dl = bt.dp() / l2 - 2.0 * bt.p() / l3;
    let m = bt.bracket() / l5;
    let dm_dl = bt.dbracket(params.xi) / l5 - 5.0 * bt.bracket() / (l5 * lambda);
    let dq = dq_dl / (4.0 * l3);
    let dm = dm_dl / (4.0 * l3);
    let value = 2.0 * a * q - coupling * m;
    let derivative = (2.0 * a * dq - coupling * dm) * dw - params.alpha * m;
    EntireEval {
        value: CharValue {
            value,
            scaled: bt.scale > 0.0,
            scale_log: bt.scale,
            prefactor: Complex64::new(1.0, 0.0),
        },
        derivative,
    }
}

/// Entire characteristic function (includes the stiffness term).
pub fn char_entire(params: &BeamParams, mu: Complex64) -> CharValue {
    char_entire_eval(params, &EntireSeries::new(params.xi), mu).value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Branch;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn params(alpha: f64, xi: f64) -> BeamParams {
        BeamParams::damped(1.0, 1.0, alpha, xi).unwrap()
    }

    fn mu1() -> Complex64 {
        Complex64::new(-0.5, 0.5 * (4.0 * PI.powi(4) - 1.0).sqrt())
    }

    #[test]
    fn undamped_root_is_zero() {
        let g = char_fn(&params(0.0, FRAC_1_SQRT_2), mu1()).unwrap();
        assert!(g.unscaled().norm() < 1e-9, "{}", g.unscaled());
    }

    #[test]
    fn lambda_i_n_pi_is_zero_when_undamped() {
        // lambda = i*2*pi has lambda^4 = 16 pi^4, the same mu as lambda = 2 pi
        let p = params(0.0, 0.4);
        let (mp, _) = crate::model::mu_from_lambda(&p, Complex64::new(0.0, 2.0 * PI));
        assert!(char_fn(&p, mp).unwrap().unscaled().norm() < 1e-8);
    }

    #[test]
    fn degenerate_mu_is_error() {
        let p = params(0.1, 0.3);
        assert!(char_fn(&p, Complex64::new(-1.0, 0.0)).is_err());
        assert!(char_fn(&p, Complex64::new(0.0, 0.0)).is_err());
        let pb = BeamParams::new(1.0, 1.0, 0.1, 0.2, 0.3).unwrap();
        assert!(matches!(
            char_fn_beta(&pb, Complex64::new(1e-13, 0.0)),
            Err(BeamError::DivisionNearZero(_)) | Err(BeamError::DegenerateLambda { .. })
        ));
    }

    #[test]
    fn scaled_euler_identity() {
        // sin(n pi) = 0 kills the S*Sh product
        let p = params(0.3, 0.3);
        let l = Complex64::new(3.0 * PI, 0.0);
        let (mu, _) = crate::model::mu_from_lambda(&p, l);
        let bt = BeamTrig::new(l, p.xi);
        assert!(bt.p().norm() < 1e-15);
        assert!(char_fn_scaled(&p, l, mu).is_ok());
        assert!(char_fn_scaled(&p, Complex64::new(0.0, 0.0), mu).is_err());
    }

    #[test]
    fn scaled_stays_bounded_for_large_lambda() {
        let p = params(0.0, 0.3);
        let l = Complex64::new(40.0, 0.1);
        let (mu, _) = crate::model::mu_from_lambda(&p, l);
        let v = char_fn_scaled(&p, l, mu).unwrap();
        assert!(v.value.norm() <= 4.0);
        let raw = char_fn(&p, mu).unwrap();
        assert!(raw.scaled);

        // moderate lambda: scaled and raw agree after unscaling
        let l = Complex64::new(8.0, 0.1);
        let (mu, _) = crate::model::mu_from_lambda(&p, l);
        let v = char_fn_scaled(&p, l, mu).unwrap();
        let direct = 2.0 * (mu + p.b) * l.sinh() * l.sin();
        assert!((v.unscaled() - direct).norm() < 1e-12 * direct.norm());
    }

    #[test]
    fn second_term_is_order_one_over_lambda() {
        let p = BeamParams::damped(1.0, 1.0, 1.0, 0.3).unwrap();
        let mut products = Vec::new();
        for r in [25.0, 50.0, 100.0] {
            let l = Complex64::from_polar(r, PI / 8.0);
            let (mu, _) = crate::model::mu_from_lambda(&p, l);
            let with = char_fn_scaled(&p, l, mu).unwrap().value;
            let without = char_fn_scaled(&p.with_alpha(0.0), l, mu).unwrap().value;
            let second = (with - without).norm();
            // first-term scale is 1 after stripping
            products.push(second * r);
        }
        for p in &products {
            assert!(*p < 1.0, "{products:?}");
        }
    }

    #[test]
    fn beta_zero_reduces() {
        let p = params(0.2, 0.3);
        for k in 0..100 {
            let mu = Complex64::new(-0.1 - 0.05 * k as f64, 3.0 + 7.3 * k as f64);
            let a = char_fn(&p, mu).unwrap().unscaled();
            let b = char_fn_beta(&p, mu).unwrap().unscaled();
            assert!((a - b).norm() <= 1e-14 * a.norm());
        }
    }

    #[test]
    fn classical_and_entire_are_related() {
        // G = -l^6 E / mu
        let p = BeamParams::new(1.3, 0.7, 0.2, 0.1, 0.41).unwrap();
        for mu in [
            Complex64::new(-0.4, 12.0),
            Complex64::new(-3.0, 90.0),
            Complex64::new(-0.2, 0.3),
        ] {
            let l = lambda_from_mu(&p, mu).unwrap().lambda;
            let g = char_fn_beta(&p, mu).unwrap().unscaled();
            let e = char_entire(&p, mu).unscaled();
            let rel = (g + l.powi(6) * e / mu).norm() / g.norm();
            assert!(rel < 1e-11, "{rel}");
        }
    }

    #[test]
    fn entire_at_minus_b() {
        // E(-b) = 2a - (2 alpha b / 3) xi^2 (1-xi)^2
        let p = BeamParams::damped(2.0, 3.0, 0.7, 0.3).unwrap();
        let e = char_entire(&p, Complex64::new(-3.0, 0.0)).unscaled();
        let expect = 4.0 - 2.0 * 0.7 * 3.0 / 3.0 * 0.09 * 0.49;
        assert!((e - expect).norm() < 1e-14);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let p = BeamParams::new(1.0, 1.0, 0.3, 0.05, FRAC_1_SQRT_2).unwrap();
        let series = EntireSeries::new(p.xi);
        for k in 0..50 {
            let t = k as f64;
            let mu = Complex64::new(-0.2 - 0.07 * t, 0.5 + 3.1 * t + 0.01 * t * t);
            let h = 1e-5 * mu.norm().max(1.0);
            let hr = Complex64::new(h, 0.0);
            let g = |z| char_fn_beta(&p, z).unwrap().unscaled();
            let fd = (g(mu + hr) - g(mu - hr)) / (2.0 * h);
            let an = char_derivative(&p, mu).unwrap();
            assert!((fd - an).norm() <= 1e-6 * an.norm(), "k={k} {fd} {an}");

            let e = |z| char_entire(&p, z).unscaled();
            let fd = (e(mu + hr) - e(mu - hr)) / (2.0 * h);
            let ev = char_entire_eval(&p, &series, mu);
            let an = ev.derivative * ev.value.scale_log.exp();
            assert!(
                (fd - an).norm() <= 1e-6 * an.norm().max(1e-300),
                "k={k} {fd} {an}"
            );
        }
    }

    #[test]
    fn branch_independence_of_modulus() {
        let p = params(0.4, 0.3);
        let mu = Complex64::new(-0.7, 33.0);
        let sp = lambda_from_mu(&p, mu).unwrap();
        let g = |l: Complex64| {
            2.0 * (mu + p.b) * l.sinh() * l.sin()
                + p.alpha
                    * l
                    * (l.sin() * (l * p.xi).sinh() * (l * (1.0 - p.xi)).sinh()
                        - l.sinh() * (l * p.xi).sin() * (l * (1.0 - p.xi)).sin())
        };
        let base = g(sp.lambda).norm();
        for br in [Branch::Negated, Branch::TimesI, Branch::TimesMinusI] {
            let v = g(sp.on_branch(br).lambda).norm();
            assert!((v - base).abs() <= 1e-12 * base);
        }
    }

    proptest! {
        #[test]
        fn conjugate_symmetry(re in -5.0f64..-0.01, im in 0.1f64..200.0) {
            let p = params(0.15, FRAC_1_SQRT_2);
            let mu = Complex64::new(re, im);
            let g = char_fn(&p, mu).unwrap().unscaled();
            let gc = char_fn(&p, mu.conj()).unwrap().unscaled();
            prop_assert!((gc - g.conj()).norm() <= 1e-12 * g.norm());
            let e = char_entire(&p, mu).unscaled();
            let ec = char_entire(&p, mu.conj()).unscaled();
            prop_assert!((ec - e.conj()).norm() <= 1e-12 * e.norm());
        }

        #[test]
        fn undamped_factorization(re in -5.0f64..-0.01, im in 0.1f64..200.0) {
            let p = params(0.0, 0.3);
            let mu = Complex64::new(re, im);
            let l = lambda_from_mu(&p, mu).unwrap().lambda;
            let g = char_fn(&p, mu).unwrap().unscaled();
            let f = 2.0 * (mu + p.b) * l.sinh() * l.sin();
            prop_assert!((g - f).norm() <= 1e-12 * f.norm());
        }

        #[test]
        fn scaled_raw_agree(re in -5.0f64..-0.01, im in 0.1f64..380.0) {
            let p = params(0.3, 0.43);
            let mu = Complex64::new(re, im);
            let l = lambda_from_mu(&p, mu).unwrap().lambda;
            prop_assume!(l.norm() <= 20.0);
            let s = char_fn_scaled(&p, l, mu).unwrap().unscaled();
            let r = 2.0 * (mu + p.b) * l.sinh() * l.sin()
                + p.alpha * l * (l.sin() * (l * p.xi).sinh() * (l * (1.0 - p.xi)).sinh()
                    - l.sinh() * (l * p.xi).sin() * (l * (1.0 - p.xi)).sin());
            prop_assert!((s - r).norm() <= 1e-10 * r.norm());
        }
    }
}
