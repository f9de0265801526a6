//! Resolvent `(mu I - A)^{-1}` through the convolution kernel
//! `u0(x) = [sin(l x) - sinh(l x)] / (2 a l^3)`, plus an independent
//! boundary-value solver used to cross-check it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chareq::CharValue;
use crate::error::{BeamError, Result};
use crate::grid::{d4_central, fd_apply, fd_weights, simpson, GridFunction};
use crate::model::lambda_from_mu;
use crate::params::BeamParams;
use crate::trig::BeamTrig;

type C = Complex64;

const SERIES_SWITCH: f64 = 0.5;
/// Below this `|Det| / scale` the point is treated as an eigenvalue.
pub const DET_GUARD: f64 = 1e-12;

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

/// `u0` and its first three `x`-derivatives; zero for `x < 0`.
pub fn kernel_u0_derivs(a: f64, lambda: C, x: f64) -> [C; 4] {
    if x < 0.0 {
        return [C::new(0.0, 0.0); 4];
    }
    let z = lambda * x;
    if z.norm() < SERIES_SWITCH {
        // sin z - sinh z = -2 sum_k z^{4k+3} / (4k+3)!
        let w = lambda.powi(4);
        let mut out = [C::new(0.0, 0.0); 4];
        let mut fact = [6.0, 2.0, 1.0, 1.0];
        let mut wk = C::new(1.0, 0.0);
        for k in 0..8 {
            let p = 4 * k + 3;
            for d in 0..4 {
                let e = p - d;
                let xe = if e == 0 { 1.0 } else { x.powi(e as i32) };
                out[d] -= wk * xe / (fact[d] * a);
            }
            wk *= w;
            for (d, f) in fact.iter_mut().enumerate() {
                let e = (p - d) as f64;
                *f *= (e + 1.0) * (e + 2.0) * (e + 3.0) * (e + 4.0);
            }
        }
        return out;
    }
    let (s, sh, co, ch) = (z.sin(), z.sinh(), z.cos(), z.cosh());
    let l3 = lambda * lambda * lambda;
    [
        (s - sh) / (2.0 * a * l3),
        (co - ch) / (2.0 * a * lambda * lambda),
        -(s + sh) / (2.0 * a * lambda),
        -(co + ch) / (2.0 * a),
    ]
}

pub fn kernel_u0(a: f64, lambda: C, x: f64) -> Result<C> {
    if lambda.norm() == 0.0 {
        return Err(BeamError::DegenerateLambda {
            mu: C::new(0.0, 0.0),
        });
    }
    Ok(kernel_u0_derivs(a, lambda, x)[0])
}

/// `(u0 * f)(x)` with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convolution {
    pub value: C,
    pub d1: C,
    pub d2: C,
}

const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// Cubic Lagrange interpolation of grid samples.
pub fn interpolate(f: &GridFunction, x: f64) -> C {
    let m = f.m;
    let t = x * m as f64;
    let i0 = (t.floor() as isize - 1).clamp(0, m as isize - 3) as usize;
    let mut acc = C::new(0.0, 0.0);
    for j in 0..4 {
        let mut w = 1.0;
        for k in 0..4 {
            if k != j {
                w *= (t - (i0 + k) as f64) / (j as f64 - k as f64);
            }
        }
        acc += f.samples[i0 + j] * w;
    }
    acc
}

/// Cell-wise three-point Gauss with cubic interpolation of `f`.
fn convolve_at(a: f64, lambda: C, f: &GridFunction, x: f64) -> Convolution {
    let h = f.h();
    let mut out = [C::new(0.0, 0.0); 3];
    let mut s0 = 0.0;
    while s0 < x - 1e-15 {
        let s1 = (s0 + h).min(x);
        let (mid, half) = (0.5 * (s0 + s1), 0.5 * (s1 - s0));
        for (g, w) in GAUSS3 {
            let s = mid + half * g;
            let k = kernel_u0_derivs(a, lambda, x - s);
            let fs = interpolate(f, s) * (w * half);
            for d in 0..3 {
                out[d] += k[d] * fs;
            }
        }
        s0 = s1;
    }
    Convolution {
        value: out[0],
        d1: out[1],
        d2: out[2],
    }
}

/// `(u0 * f)(x)` for `x` in `[0, 1]`, checked against the half grid.
pub fn convolve_u0(a: f64, lambda: C, f: &GridFunction, x: f64) -> Result<Convolution> {
    if lambda.norm() == 0.0 {
        return Err(BeamError::DegenerateLambda {
            mu: C::new(0.0, 0.0),
        });
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(BeamError::InvalidParams(format!("x = {x} outside [0, 1]")));
    }
    let full = convolve_at(a, lambda, f, x);
    if f.m.is_multiple_of(2) && f.m >= 16 {
        let half = GridFunction::new(f.m / 2, f.samples.iter().step_by(2).copied().collect())?;
        let coarse = convolve_at(a, lambda, &half, x);
        let gap = (full.value - coarse.value).norm();
        if gap > 1e-8 + 1e-6 * full.value.norm() {
            return Err(BeamError::GridTooCoarse(gap));
        }
    }
    Ok(full)
}

/// Convolution and its second derivative at every node (Toeplitz Simpson).
fn convolve_grid(a: f64, lambda: C, f: &GridFunction) -> (Vec<C>, Vec<C>) {
    let m = f.m;
    let h = f.h();
    let k: Vec<[C; 4]> = (0..=m)
        .map(|j| kernel_u0_derivs(a, lambda, j as f64 * h))
        .collect();
    let mut val = vec![C::new(0.0, 0.0); m + 1];
    let mut dd = vec![C::new(0.0, 0.0); m + 1];
    let mut buf0 = Vec::with_capacity(m + 1);
    let mut buf2 = Vec::with_capacity(m + 1);
    for j in 1..=m {
        buf0.clear();
        buf2.clear();
        for i in 0..=j {
            buf0.push(k[j - i][0] * f.samples[i]);
            buf2.push(k[j - i][2] * f.samples[i]);
        }
        val[j] = simpson(&buf0, h);
        dd[j] = simpson(&buf2, h);
    }
    (val, dd)
}

/// `Det^alpha = 4 l^2 {[-2 l^3 sinh l - (alpha mu / a) sinh(l xi) sinh(l(xi-1))] sin l
/// + (alpha mu / a) sin(l xi) sinh l sin(l(xi-1))}`, exponential growth stripped.
pub fn det_alpha(params: &BeamParams, lambda: C, mu: C) -> Result<CharValue> {
    if lambda.norm() == 0.0 {
        return Err(BeamError::DegenerateLambda { mu });
    }
    let bt = BeamTrig::new(lambda, params.xi);
    let coupling = (params.alpha * mu + params.beta) / params.a;
    let l2 = lambda * lambda;
    let value = 4.0 * l2 * (-2.0 * l2 * lambda * bt.p() + coupling * bt.bracket());
    Ok(CharValue {
        value,
        scaled: bt.scale > 0.0,
        scale_log: bt.scale,
        prefactor: c(1.0),
    })
}

/// `Det^0 = -8 l^5 sinh l sin l`.
pub fn det0(lambda: C) -> C {
    -8.0 * lambda.powi(5) * lambda.sinh() * lambda.sin()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventInput {
    pub u1: GridFunction,
    pub v1: GridFunction,
    pub mu: C,
}

impl ResolventInput {
    pub fn new(u1: GridFunction, v1: GridFunction, mu: C) -> Result<Self> {
        if u1.m != v1.m {
            return Err(BeamError::InvalidParams("u1 and v1 grids differ".into()));
        }
        let scale = u1.max_abs().max(1.0);
        if u1.samples[0].norm() > 1e-12 * scale || u1.samples[u1.m].norm() > 1e-12 * scale {
            return Err(BeamError::InvalidParams(
                "u1 must vanish at both ends".into(),
            ));
        }
        Ok(ResolventInput { u1, v1, mu })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ResolventDiagnostics {
    pub u_at_0: f64,
    pub u_at_1: f64,
    pub udd_at_0: f64,
    pub udd_at_1: f64,
    pub second_gap: f64,
    pub jump_error: f64,
    pub ode_residual: f64,
}

impl ResolventDiagnostics {
    pub fn worst(&self) -> f64 {
        [
            self.u_at_0,
            self.u_at_1,
            self.udd_at_0,
            self.udd_at_1,
            self.second_gap,
            self.jump_error,
            self.ode_residual,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn boundary(&self) -> f64 {
        self.u_at_0
            .max(self.u_at_1)
            .max(self.udd_at_0)
            .max(self.udd_at_1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventOutput {
    pub u: GridFunction,
    pub v: GridFunction,
    pub diagnostics: ResolventDiagnostics,
}

impl ResolventOutput {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("resolvent output serializes")
    }
}

struct Prepared {
    lambda: C,
    f10: GridFunction,
    conv: Vec<C>,
    conv_dd: Vec<C>,
    conv_xi: Convolution,
    u1_xi: C,
}

fn prepare(params: &BeamParams, input: &ResolventInput) -> Result<Prepared> {
    params.validate()?;
    if params.beta != 0.0 {
        return Err(BeamError::InvalidParams(
            "the resolvent is implemented for beta = 0".into(),
        ));
    }
    let mu = input.mu;
    let lambda = lambda_from_mu(params, mu)?.lambda;
    let det = det_alpha(params, lambda, mu)?;
    // compare against the size of the leading term
    let scale = (8.0 * lambda.norm().powi(5)).max(1.0);
    if det.value.norm() < DET_GUARD * scale {
        return Err(BeamError::AtEigenvalue(mu));
    }
    let f10 = GridFunction::new(
        input.u1.m,
        input
            .u1
            .samples
            .iter()
            .zip(&input.v1.samples)
            .map(|(u, v)| (mu + params.b) * u + v)
            .collect(),
    )?;
    let (conv, conv_dd) = convolve_grid(params.a, lambda, &f10);
    let conv_xi = convolve_at(params.a, lambda, &f10, params.xi);
    Ok(Prepared {
        lambda,
        conv,
        conv_dd,
        conv_xi,
        u1_xi: interpolate(&input.u1, params.xi),
        f10,
    })
}

fn finish(
    params: &BeamParams,
    input: &ResolventInput,
    u: Vec<C>,
    m: usize,
) -> Result<ResolventOutput> {
    let u = GridFunction::new(m, u)?.with_mark(params.xi);
    let v = GridFunction::new(
        m,
        u.samples
            .iter()
            .zip(&input.u1.samples)
            .map(|(u, u1)| input.mu * u - u1)
            .collect(),
    )?;
    let mut out = ResolventOutput {
        u,
        v,
        diagnostics: ResolventDiagnostics::default(),
    };
    out.diagnostics = resolvent_residual(params, input, &out);
    Ok(out)
}

/// Coefficients `(c1, c2)` of `u0` and `u0''` cancelling the end values
/// `A = l^2 w(1)` and `B = w''(1)` of a particular piece `w`.
fn end_coefficients(a: f64, l: C, big_a: C, big_b: C) -> (C, C) {
    let (s, sh) = (l.sin(), l.sinh());
    let d0 = det0(l);
    let l4 = l.powi(4);
    let apb = big_a + big_b;
    let amb = big_a - big_b;
    (
        -4.0 * a * l4 * l * l * (apb * s - amb * sh) / d0,
        -4.0 * a * l4 * (apb * s + amb * sh) / d0,
    )
}

/// Closed-form resolvent `u = -[w + c1 u0 + c2 u0'' + c3 u0(x - xi)]` with
/// `w = u0 * f10`. The end conditions fix `c1, c2` in terms of `w` and `c3`,
/// and the jump condition at `xi` fixes `c3`.
pub fn resolvent_apply(params: &BeamParams, input: &ResolventInput) -> Result<ResolventOutput> {
    let pr = prepare(params, input)?;
    let (a, alpha, xi, mu) = (params.a, params.alpha, params.xi, input.mu);
    let l = pr.lambda;
    let m = pr.f10.m;
    let l2 = l * l;
    let (p1, p2) = end_coefficients(a, l, l2 * pr.conv[m], pr.conv_dd[m]);
    let ks = kernel_u0_derivs(a, l, 1.0 - xi);
    let (q1, q2) = end_coefficients(a, l, l2 * ks[0], ks[2]);
    let kx = kernel_u0_derivs(a, l, xi);
    let w_xi = pr.conv_xi.value + p1 * kx[0] + p2 * kx[2];
    let denom = 1.0 - alpha * mu * (q1 * kx[0] + q2 * kx[2]);
    let c3 = alpha * (pr.u1_xi + mu * w_xi) / denom;
    let (c1, c2) = (p1 + c3 * q1, p2 + c3 * q2);
    let u: Vec<C> = (0..=m)
        .map(|j| {
            let x = j as f64 / m as f64;
            let k = kernel_u0_derivs(a, l, x);
            let shifted = kernel_u0_derivs(a, l, x - xi)[0];
            -(pr.conv[j] + c1 * k[0] + c2 * k[2] + c3 * shifted)
        })
        .collect();
    finish(params, input, u, m)
}

/// `1 - alpha mu (q . phi(xi))`, the jump-condition denominator of
/// [`resolvent_apply`]; equals `Det^alpha / Det^0`.
pub fn jump_denominator(params: &BeamParams, lambda: C, mu: C) -> C {
    let (a, xi) = (params.a, params.xi);
    let ks = kernel_u0_derivs(a, lambda, 1.0 - xi);
    let (q1, q2) = end_coefficients(a, lambda, lambda * lambda * ks[0], ks[2]);
    let kx = kernel_u0_derivs(a, lambda, xi);
    1.0 - (params.alpha * mu + params.beta) * (q1 * kx[0] + q2 * kx[2])
}

/// The closed form exactly as printed, kept for comparison. It does not
/// satisfy the boundary problem: the kernel carries the opposite sign and the
/// `u0`/`u0''` multipliers of the undamped part are interchanged.
pub fn resolvent_apply_printed(
    params: &BeamParams,
    input: &ResolventInput,
) -> Result<ResolventOutput> {
    let pr = prepare(params, input)?;
    let (a, alpha, xi, mu) = (params.a, params.alpha, params.xi, input.mu);
    let l = pr.lambda;
    let m = pr.f10.m;
    let (l2, l3) = (l * l, l * l * l);
    let k1 = kernel_u0_derivs(a, l, 1.0 - xi);
    let big_a = l2 * pr.conv[m] + 2.0 * l2 * alpha * pr.u1_xi * k1[0];
    let big_b = pr.conv_dd[m] + 2.0 * alpha * pr.u1_xi * k1[2];
    let big_c = l2 * pr.conv_xi.value;
    let (s, sh) = (l.sin(), l.sinh());
    let (sx, shx) = ((l * xi).sin(), (l * xi).sinh());
    let (sxm, shxm) = ((l * (xi - 1.0)).sin(), (l * (xi - 1.0)).sinh());
    let d0 = det0(l);
    let da = det_alpha(params, l, mu)?.unscaled();
    let apb = big_a + big_b;
    let amb = big_a - big_b;
    let delta = 4.0 * l2 * mu / a * (sx * sxm * sh - shx * shxm * s);
    let delta3 = 4.0 * l * mu / a
        * (sxm * (apb / 2.0 * (shx - sx) - big_c * sh)
            + shxm * (amb / 2.0 * (shx - sx) + big_c * s));
    let delta1 = 4.0 * l3 * mu / a
        * (sxm * (-apb / 2.0 * (shx + sx) + big_c * sh)
            + shxm * (-amb / 2.0 * (shx + sx) + big_c * s));
    let delta0 = -4.0 * l3 * (2.0 * big_c * s * sh - apb * s * shx - amb * sx * sh);
    let r0_u0 = 4.0 * l2 * l2 * (amb * sh + apb * s);
    let r0_udd = 4.0 * l2 * l2 * l2 * (apb * s - amb * sh);
    let u: Vec<C> = (0..=m)
        .map(|j| {
            let x = j as f64 / m as f64;
            let k = kernel_u0_derivs(a, l, x);
            let shifted = kernel_u0_derivs(a, l, x - xi)[0];
            let r0 = pr.conv[j] + a / d0 * (r0_u0 * k[0] + r0_udd * k[2]);
            (d0 * r0
                + alpha
                    * (delta * pr.conv[j] + a * delta3 * k[0] + a * delta1 * k[2]
                        - mu * delta0 * shifted))
                / da
        })
        .collect();
    finish(params, input, u, m)
}

/// Homogeneous basis `sin, cos, sinh, cosh` of `l x` and derivatives.
fn basis(l: C, x: f64, d: usize) -> [C; 4] {
    let z = l * x;
    let (s, co, sh, ch) = (z.sin(), z.cos(), z.sinh(), z.cosh());
    let lp = l.powi(d as i32);
    let v = match d % 4 {
        0 => [s, co, sh, ch],
        1 => [co, -s, ch, sh],
        2 => [-s, -co, sh, ch],
        _ => [-co, s, ch, sh],
    };
    v.map(|t| t * lp)
}

/// Particular solution `-(u0 * f10)` plus homogeneous pieces on each side,
/// fixed by the four end conditions, continuity of `u, u', u''` and the
/// third-derivative jump at `xi`.
pub fn resolvent_collocation(
    params: &BeamParams,
    input: &ResolventInput,
) -> Result<ResolventOutput> {
    let pr = prepare(params, input)?;
    let (a, alpha, xi, mu) = (params.a, params.alpha, params.xi, input.mu);
    let l = pr.lambda;
    let m = pr.f10.m;
    let mut sys = DMatrix::<C>::zeros(8, 8);
    let mut rhs = DVector::<C>::zeros(8);
    // u(0) = 0, u''(0) = 0 (particular part vanishes there)
    for (row, d) in [(0, 0), (1, 2)] {
        let b = basis(l, 0.0, d);
        for k in 0..4 {
            sys[(row, k)] = b[k];
        }
    }
    // u(1) = 0, u''(1) = 0
    rhs[2] = pr.conv[m];
    rhs[3] = pr.conv_dd[m];
    for (row, d) in [(2, 0), (3, 2)] {
        let b = basis(l, 1.0, d);
        for k in 0..4 {
            sys[(row, 4 + k)] = b[k];
        }
    }
    // continuity of u, u', u'' at xi
    for (row, d) in [(4, 0), (5, 1), (6, 2)] {
        let b = basis(l, xi, d);
        for k in 0..4 {
            sys[(row, k)] = b[k];
            sys[(row, 4 + k)] = -b[k];
        }
    }
    // u'''(xi+) - u'''(xi-) + (alpha mu / a) u(xi) = (alpha / a) u1(xi)
    let b3 = basis(l, xi, 3);
    let b0 = basis(l, xi, 0);
    for k in 0..4 {
        sys[(7, k)] = -b3[k] + alpha * mu / a * b0[k];
        sys[(7, 4 + k)] = b3[k];
    }
    rhs[7] = alpha / a * pr.u1_xi + alpha * mu / a * pr.conv_xi.value;
    let coef = sys.lu().solve(&rhs).ok_or(BeamError::AtEigenvalue(mu))?;
    let u: Vec<C> = (0..=m)
        .map(|j| {
            let x = j as f64 / m as f64;
            let b = basis(l, x, 0);
            let off = if x <= xi { 0 } else { 4 };
            let hom: C = (0..4).map(|k| coef[off + k] * b[k]).sum();
            hom - pr.conv[j]
        })
        .collect();
    finish(params, input, u, m)
}

/// Finite-difference audit of a computed resolvent on its own grid.
pub fn resolvent_residual(
    params: &BeamParams,
    input: &ResolventInput,
    output: &ResolventOutput,
) -> ResolventDiagnostics {
    let u = &output.u;
    let m = u.m;
    let mu = input.mu;
    let xi = params.xi;
    let norm = u.max_abs();
    if norm == 0.0 {
        return ResolventDiagnostics::default();
    }
    let stride = (m / 256).max(1);
    let h = stride as f64 / m as f64;
    let k = params.b * mu + mu * mu;
    let f10: Vec<C> = input
        .u1
        .samples
        .iter()
        .zip(&input.v1.samples)
        .map(|(u1, v1)| (mu + params.b) * u1 + v1)
        .collect();
    let f_norm = f10.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let mut ode: f64 = 0.0;
    for (j, fj) in f10
        .iter()
        .enumerate()
        .take(m - 3 * stride + 1)
        .skip(3 * stride)
    {
        let x = j as f64 / m as f64;
        if (x - xi).abs() <= 3.0 * h {
            continue;
        }
        let s: [C; 7] = std::array::from_fn(|t| u.samples[j + t * stride - 3 * stride]);
        let r = params.a * d4_central(&s, h) + k * s[3] - fj;
        ode = ode.max(r.norm());
    }
    let node = |j: usize| j as f64 / m as f64;
    let one_side = |left: bool, order: usize, pts: usize| -> C {
        let base = if left {
            (xi * m as f64).floor() as usize
        } else {
            (xi * m as f64).ceil() as usize
        };
        let idx: Vec<usize> = (0..pts)
            .map(|t| {
                if left {
                    base - t * stride
                } else {
                    base + t * stride
                }
            })
            .collect();
        let xs: Vec<f64> = idx.iter().map(|&j| node(j)).collect();
        let vals: Vec<C> = idx.iter().map(|&j| u.samples[j]).collect();
        fd_apply(&fd_weights(xi, &xs, order), &vals)
    };
    let end_dd = |left_end: bool| -> C {
        let idx: Vec<usize> = (0..6)
            .map(|t| if left_end { t * stride } else { m - t * stride })
            .collect();
        let xs: Vec<f64> = idx.iter().map(|&j| node(j)).collect();
        let vals: Vec<C> = idx.iter().map(|&j| u.samples[j]).collect();
        let z = if left_end { 0.0 } else { 1.0 };
        fd_apply(&fd_weights(z, &xs, 2), &vals)
    };
    let u_xi = one_side(true, 0, 6);
    let g1 = params.alpha / params.a * (-mu * u_xi + interpolate(&input.u1, xi));
    let jump = one_side(false, 3, 8) - one_side(true, 3, 8);
    let d3_scale = one_side(true, 3, 8).norm().max(g1.norm()).max(norm);
    let d2_scale = one_side(true, 2, 7).norm().max(norm);
    ResolventDiagnostics {
        u_at_0: u.samples[0].norm() / norm,
        u_at_1: u.samples[m].norm() / norm,
        udd_at_0: end_dd(true).norm() / d2_scale,
        udd_at_1: end_dd(false).norm() / d2_scale,
        second_gap: (one_side(false, 2, 7) - one_side(true, 2, 7)).norm() / d2_scale,
        jump_error: (jump - g1).norm() / d3_scale,
        ode_residual: ode / f_norm,
    }
}
