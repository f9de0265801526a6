use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chareq::EntireSeries;
use crate::error::{BeamError, Result};
use crate::model::{EigenRecord, Provenance, Sign};
use crate::params::BeamParams;

use super::refine::{make_record, newton};
use super::{undamped_pair, undamped_spectrum};

/// Newton iterations above which a continuation step is halved.
const MAX_STEP_ITER: usize = 8;
const COLLISION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchTrack {
    pub n: i32,
    pub sign: Sign,
    pub points: Vec<(f64, EigenRecord)>,
}

impl BranchTrack {
    pub fn label(&self) -> String {
        format!("({},{})", self.n, self.sign.symbol())
    }
}

fn scaled(target: &BeamParams, t: f64) -> BeamParams {
    BeamParams {
        alpha: target.alpha * t,
        beta: target.beta * t,
        ..*target
    }
}

/// Distance from `mu0` to the nearest other undamped root.
fn local_gap(target: &BeamParams, mu0: Complex64, n: u32) -> f64 {
    let mut gap = f64::INFINITY;
    for m in n.saturating_sub(1).max(1)..=n + 1 {
        let (p, q) = undamped_pair(target.a, target.b, m);
        for v in [p, q] {
            let d = (v - mu0).norm();
            if d > 1e-12 * mu0.norm().max(1.0) {
                gap = gap.min(d);
            }
        }
    }
    gap.max(1e-6)
}

/// Follows one root from the undamped problem (`t = 0`) to `target`
/// (`t = 1`), scaling `alpha` and `beta` together. Returns the root at
/// `t = k/steps`, `k = 0..=steps`.
pub(crate) fn continue_branch(
    target: &BeamParams,
    mu0: Complex64,
    n: u32,
    steps: usize,
) -> Result<Vec<(f64, Complex64)>> {
    let series = EntireSeries::new(target.xi);
    let guard = 0.25 * local_gap(target, mu0, n);
    let mut out = vec![(0.0, mu0)];
    let (mut t, mut mu) = (0.0, mu0);
    let mut prev: Option<(f64, Complex64)> = None;
    let base = 1.0 / steps as f64;
    let mut h = base;
    for k in 1..=steps {
        let goal = k as f64 / steps as f64;
        while goal - t > 1e-15 {
            h = h.min(goal - t);
            let pred = match prev {
                Some((tp, mp)) => mu + (mu - mp) * (h / (t - tp)),
                None => mu,
            };
            let res = newton(&scaled(target, t + h), &series, pred, MAX_STEP_ITER);
            if res.converged && (res.mu - mu).norm() <= guard {
                prev = Some((t, mu));
                t += h;
                mu = res.mu;
                h = (2.0 * h).min(base);
            } else {
                h *= 0.5;
                if h < 1e-10 * base {
                    return Err(BeamError::NoConvergence {
                        seed: mu0,
                        best: mu,
                        residual: f64::NAN,
                    });
                }
            }
        }
        t = goal;
        out.push((goal, mu));
    }
    Ok(out)
}

/// Root loci from every undamped root with `n <= n_max` as `alpha` runs
/// from the value in `params0` (which must be zero) to `alpha_target`.
pub fn track_alpha(
    params0: &BeamParams,
    alpha_target: f64,
    steps: usize,
    n_max: u32,
) -> Result<Vec<BranchTrack>> {
    params0.validate()?;
    if params0.alpha != 0.0 {
        return Err(BeamError::InvalidParams(
            "continuation starts at alpha = 0".into(),
        ));
    }
    if steps < 1 {
        return Err(BeamError::InvalidParams("steps must be at least 1".into()));
    }
    let target = params0.with_alpha(alpha_target);
    target.validate()?;
    let series = EntireSeries::new(target.xi);
    let seeds = undamped_spectrum(params0.a, params0.b, n_max);
    let tracks: Vec<BranchTrack> = seeds
        .par_iter()
        .map(|s| {
            let path = if alpha_target == 0.0 {
                (0..=steps)
                    .map(|k| (k as f64 / steps as f64, s.mu()))
                    .collect()
            } else {
                continue_branch(&target.with_beta(0.0), s.mu(), s.n as u32, steps)?
            };
            let points = path
                .into_iter()
                .map(|(t, mu)| {
                    let p = BeamParams {
                        alpha: alpha_target * t,
                        ..*params0
                    };
                    let prov = if t == 0.0 || alpha_target == 0.0 {
                        Provenance::ClosedForm
                    } else {
                        Provenance::Tracked
                    };
                    let rec = if prov == Provenance::ClosedForm {
                        let mut r = *s;
                        r.point.residual = super::residual(&p, mu);
                        Ok(r)
                    } else {
                        make_record(&p, &series, mu, (s.n, s.sign), prov)
                    };
                    rec.map(|r| (p.alpha, r))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(BranchTrack {
                n: s.n,
                sign: s.sign,
                points,
            })
        })
        .collect::<Result<_>>()?;

    for k in 1..=steps {
        for i in 0..tracks.len() {
            for j in 0..i {
                let (ai, ri) = &tracks[i].points[k];
                let rj = &tracks[j].points[k].1;
                let d = (ri.mu() - rj.mu()).norm();
                if d < COLLISION_TOL * ri.mu().norm().max(1.0) {
                    return Err(BeamError::BranchCollision(
                        tracks[j].label(),
                        tracks[i].label(),
                        *ai,
                    ));
                }
            }
        }
    }
    Ok(tracks)
}
