use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chareq::{char_entire_eval, EntireSeries};
use crate::error::{BeamError, Result};
use crate::model::principal_fourth_root;
use crate::params::BeamParams;

pub const MIN_BOUNDARY_MODULUS: f64 = 1e-9;
pub const MAX_PHASE_SAMPLES: usize = 1 << 20;
const INITIAL_SEGMENTS: usize = 32;

/// Axis-aligned rectangle `[lo.re, hi.re] x [lo.im, hi.im]` in the mu-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourBox {
    pub lo: Complex64,
    pub hi: Complex64,
    pub depth: u32,
    pub winding: Option<i64>,
}

impl ContourBox {
    pub fn new(lo: Complex64, hi: Complex64) -> Self {
        ContourBox {
            lo: Complex64::new(lo.re.min(hi.re), lo.im.min(hi.im)),
            hi: Complex64::new(lo.re.max(hi.re), lo.im.max(hi.im)),
            depth: 0,
            winding: None,
        }
    }

    pub fn around(center: Complex64, half_width: f64) -> Self {
        let d = Complex64::new(half_width, half_width);
        ContourBox::new(center - d, center + d)
    }

    pub fn center(&self) -> Complex64 {
        (self.lo + self.hi) * 0.5
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.lo.re && z.re <= self.hi.re && z.im >= self.lo.im && z.im <= self.hi.im
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            self.lo,
            Complex64::new(self.hi.re, self.lo.im),
            self.hi,
            Complex64::new(self.lo.re, self.hi.im),
        ]
    }

    /// Four quadrants.
    pub fn split(&self) -> [ContourBox; 4] {
        let c = self.center();
        let mk = |lo: Complex64, hi: Complex64| ContourBox {
            depth: self.depth + 1,
            ..ContourBox::new(lo, hi)
        };
        [
            mk(self.lo, c),
            mk(
                Complex64::new(c.re, self.lo.im),
                Complex64::new(self.hi.re, c.im),
            ),
            mk(c, self.hi),
            mk(
                Complex64::new(self.lo.re, c.im),
                Complex64::new(c.re, self.hi.im),
            ),
        ]
    }

    /// Moves every edge outward by `frac` of the box size.
    pub fn perturbed(&self, frac: f64) -> ContourBox {
        let d = (self.hi - self.lo) * frac;
        ContourBox {
            lo: self.lo - d,
            hi: self.hi + d,
            ..*self
        }
    }
}

#[derive(Clone, Copy)]
struct Sample {
    z: Complex64,
    arg: f64,
}

struct Walker<'a> {
    params: &'a BeamParams,
    series: &'a EntireSeries,
    samples: usize,
    min_modulus: f64,
}

impl Walker<'_> {
    fn sample(&mut self, z: Complex64) -> Sample {
        self.samples += 1;
        let ev = char_entire_eval(self.params, self.series, z);
        let w = -z * (z + self.params.b) / self.params.a;
        let l2 = principal_fourth_root(w).norm_sqr().max(1.0);
        let modulus = ev.value.value.norm() * l2 / (2.0 * self.params.a);
        self.min_modulus = self.min_modulus.min(modulus);
        Sample {
            z,
            arg: ev.value.arg(),
        }
    }

    fn edge(&mut self, a: Sample, b: Sample) -> Result<f64> {
        let mut total = 0.0;
        let mut stack = vec![(a, b)];
        while let Some((p, q)) = stack.pop() {
            let mut d = q.arg - p.arg;
            d -= 2.0 * PI * (d / (2.0 * PI)).round();
            if d.abs() < PI / 2.0 {
                total += d;
                continue;
            }
            if self.samples >= MAX_PHASE_SAMPLES {
                return Err(BeamError::NonConvergentPhase {
                    samples: self.samples,
                });
            }
            let m = self.sample((p.z + q.z) * 0.5);
            if (q.z - p.z).norm() < 1e-14 * p.z.norm().max(1.0) {
                return Err(BeamError::BoundaryTooClose {
                    min_abs: self.min_modulus,
                });
            }
            stack.push((m, q));
            stack.push((p, m));
        }
        Ok(total)
    }
}

/// Winding number of the entire characteristic function around `bx`.
pub fn count_zeros(params: &BeamParams, bx: &ContourBox) -> Result<i64> {
    let series = EntireSeries::new(params.xi);
    count_zeros_with(params, &series, bx)
}

pub(crate) fn count_zeros_with(
    params: &BeamParams,
    series: &EntireSeries,
    bx: &ContourBox,
) -> Result<i64> {
    let mut w = Walker {
        params,
        series,
        samples: 0,
        min_modulus: f64::INFINITY,
    };
    let corners = bx.corners();
    let mut total = 0.0;
    for k in 0..4 {
        let (z0, z1) = (corners[k], corners[(k + 1) % 4]);
        let mut prev = w.sample(z0);
        for j in 1..=INITIAL_SEGMENTS {
            let z = z0 + (z1 - z0) * (j as f64 / INITIAL_SEGMENTS as f64);
            let next = w.sample(z);
            total += w.edge(prev, next)?;
            prev = next;
        }
    }
    if w.min_modulus < MIN_BOUNDARY_MODULUS {
        return Err(BeamError::BoundaryTooClose {
            min_abs: w.min_modulus,
        });
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Retries with slightly enlarged boxes when the boundary grazes a zero.
pub(crate) fn count_zeros_robust(
    params: &BeamParams,
    series: &EntireSeries,
    bx: &ContourBox,
) -> Result<(i64, ContourBox)> {
    let mut current = *bx;
    let mut last = None;
    for k in 0..4 {
        match count_zeros_with(params, series, &current) {
            Ok(c) => return Ok((c, current)),
            Err(e @ BeamError::BoundaryTooClose { .. }) => {
                last = Some(e);
                current = bx.perturbed(1e-3 * (k + 1) as f64);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap())
}
