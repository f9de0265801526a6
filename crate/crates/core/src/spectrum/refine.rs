use num_complex::Complex64;

use crate::chareq::{char_entire_eval, char_fn_scaled, EntireSeries};
use crate::error::{BeamError, Result};
use crate::model::{lambda_from_mu, EigenRecord, Provenance, Sign};
use crate::params::BeamParams;

use super::contour::ContourBox;
use super::undamped_pair;

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;
/// `|G'|` below this fraction of the local scale marks a double root.
pub const DOUBLE_ROOT_RATIO: f64 = 1e-7;

#[derive(Debug, Clone, Copy)]
pub(crate) struct NewtonOutcome {
    pub mu: Complex64,
    pub iterations: usize,
    pub converged: bool,
}

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub(crate) fn newton(
    params: &BeamParams,
    series: &EntireSeries,
    mu0: Complex64,
    max_iter: usize,
) -> NewtonOutcome {
    let mut mu = mu0;
    for it in 1..=max_iter {
        let step = char_entire_eval(params, series, mu).newton_step();
        if !finite(step) {
            return NewtonOutcome {
                mu,
                iterations: it,
                converged: false,
            };
        }
        mu -= step;
        if step.norm() <= NEWTON_TOL * mu.norm().max(1.0) {
            return NewtonOutcome {
                mu,
                iterations: it,
                converged: true,
            };
        }
    }
    NewtonOutcome {
        mu,
        iterations: max_iter,
        converged: false,
    }
}

/// Newton on `G'` with a differenced `G''`; lands on double roots at full precision.
fn newton_derivative(params: &BeamParams, series: &EntireSeries, mu0: Complex64) -> NewtonOutcome {
    let mut mu = mu0;
    for it in 1..=NEWTON_MAX_ITER {
        let ev = char_entire_eval(params, series, mu);
        let h = 1e-5 * mu.norm().max(1.0);
        let dp = rescaled_derivative(params, series, mu + h, ev.value.scale_log);
        let dm = rescaled_derivative(params, series, mu - h, ev.value.scale_log);
        let step = ev.derivative * (2.0 * h) / (dp - dm);
        if !finite(step) {
            break;
        }
        mu -= step;
        if step.norm() <= NEWTON_TOL * mu.norm().max(1.0) {
            return NewtonOutcome {
                mu,
                iterations: it,
                converged: true,
            };
        }
    }
    NewtonOutcome {
        mu,
        iterations: NEWTON_MAX_ITER,
        converged: false,
    }
}

fn rescaled_derivative(
    params: &BeamParams,
    series: &EntireSeries,
    mu: Complex64,
    scale_log: f64,
) -> Complex64 {
    let ev = char_entire_eval(params, series, mu);
    ev.derivative * (ev.value.scale_log - scale_log).exp()
}

/// `|G|` in the overflow-safe normalization (order one away from roots).
pub fn residual(params: &BeamParams, mu: Complex64) -> f64 {
    match lambda_from_mu(params, mu) {
        Ok(sp) => match char_fn_scaled(params, sp.lambda, mu) {
            Ok(v) => v.value.norm(),
            Err(_) => f64::INFINITY,
        },
        Err(_) => f64::INFINITY,
    }
}

/// `|G'|` divided by the secant slope of `|G|` over a small circle.
pub fn derivative_ratio(params: &BeamParams, series: &EntireSeries, mu: Complex64) -> f64 {
    let ev = char_entire_eval(params, series, mu);
    let delta = 1e-4 * mu.norm().max(1.0);
    let mut scale: f64 = 0.0;
    for dir in [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ] {
        let v = char_entire_eval(params, series, mu + dir * delta).value;
        scale = scale.max(v.value.norm() * (v.scale_log - ev.value.scale_log).exp() / delta);
    }
    ev.derivative.norm() / scale
}

/// Nearest undamped label `(n, sign)`.
pub fn label_root(params: &BeamParams, mu: Complex64) -> (i32, Sign) {
    let guess = match lambda_from_mu(params, mu) {
        Ok(sp) => (sp.lambda.norm() / std::f64::consts::PI).round() as i64,
        Err(_) => 1,
    };
    let mut best = (1, Sign::Plus, f64::INFINITY);
    for n in (guess - 3).max(1)..=guess + 3 {
        let (p, m) = undamped_pair(params.a, params.b, n as u32);
        for (s, v) in [(Sign::Plus, p), (Sign::Minus, m)] {
            let d = (v - mu).norm();
            if d < best.2 {
                best = (n as i32, s, d);
            }
        }
    }
    (best.0, best.1)
}

pub(crate) fn make_record(
    params: &BeamParams,
    series: &EntireSeries,
    mu: Complex64,
    label: (i32, Sign),
    provenance: Provenance,
) -> Result<EigenRecord> {
    let mut point = lambda_from_mu(params, mu)?;
    point.residual = residual(params, mu);
    let mult = if derivative_ratio(params, series, mu) < DOUBLE_ROOT_RATIO {
        2
    } else {
        1
    };
    Ok(EigenRecord {
        point,
        n: label.0,
        sign: label.1,
        alg_mult_estimate: mult,
        provenance,
    })
}

fn check_seed(params: &BeamParams, mu0: Complex64) -> Result<()> {
    if mu0.norm() < 1e-8 || (mu0 + params.b).norm() < 1e-8 {
        return Err(BeamError::DegenerateLambda { mu: mu0 });
    }
    Ok(())
}

pub(crate) fn refine_with(
    params: &BeamParams,
    series: &EntireSeries,
    mu0: Complex64,
    basin: Option<&ContourBox>,
) -> Result<Complex64> {
    check_seed(params, mu0)?;
    let mut out = newton(params, series, mu0, NEWTON_MAX_ITER);
    let slow = out.converged && out.iterations > 12;
    if !out.converged || slow {
        let alt = newton_derivative(params, series, out.mu);
        if alt.converged && residual(params, alt.mu) <= 1e-8 {
            out = alt;
        }
    }
    if !out.converged {
        return Err(BeamError::NoConvergence {
            seed: mu0,
            best: out.mu,
            residual: residual(params, out.mu),
        });
    }
    if let Some(b) = basin {
        if !b.contains(out.mu) {
            return Err(BeamError::DriftedOutOfBasin {
                seed: mu0,
                found: out.mu,
            });
        }
    }
    Ok(out.mu)
}

/// Newton polish of `mu0` on the entire characteristic function.
pub fn refine_root(params: &BeamParams, mu0: Complex64) -> Result<EigenRecord> {
    refine_root_in(params, mu0, None)
}

pub fn refine_root_in(
    params: &BeamParams,
    mu0: Complex64,
    basin: Option<&ContourBox>,
) -> Result<EigenRecord> {
    let series = EntireSeries::new(params.xi);
    let mu = refine_with(params, &series, mu0, basin)?;
    make_record(
        params,
        &series,
        mu,
        label_root(params, mu),
        Provenance::Tracked,
    )
}
